#pragma once

#include <span>
#include <string>
#include <vector>

#include "fsep/common.hpp"

namespace fsep {

class FrequencySet;  // freqset.hpp

/// A uniformly sampled finite-duration real signal on one channel.
struct SampledRecord {
    std::vector<double> samples;
    double sample_period = 0.0;  ///< seconds, > 0
    double start_time = 0.0;     ///< seconds
    std::string channel_id;

    std::size_t count() const { return samples.size(); }
    double duration() const { return static_cast<double>(samples.size() - 1) * sample_period; }
    double time_at(std::size_t i) const { return start_time + static_cast<double>(i) * sample_period; }
    double nyquist() const { return kPi / sample_period; }

    /// Times of all samples, in order.
    std::vector<double> time_grid() const;

    /// Throws unless the record has at least two samples and a positive,
    /// finite sample period.
    void validate() const;
};

/// One spectral line: angular frequency plus the complex coefficient C(jw).
/// For real signals the contribution of a line at w > 0 is 2*Re[C e^{jwt}];
/// the line at w = 0 is the real mean itself.
struct HarmonicComponent {
    double omega = 0.0;  ///< rad/s, >= 0
    Complex amplitude{0.0, 0.0};

    void validate() const;
};

/// A discrete (line) spectrum: components sorted by strictly increasing omega.
struct LineSpectrum {
    std::vector<HarmonicComponent> components;

    bool empty() const { return components.empty(); }
    std::size_t size() const { return components.size(); }

    /// Sum of |amplitude|^2 over all lines.
    double power_norm() const;

    /// Largest line frequency, 0 for an empty spectrum.
    double max_omega() const;

    void validate() const;
};

/// Correlation values on a set of lags. `tolerance` is the estimator's own
/// accuracy declaration; the invariant checks (peak at zero lag, even
/// symmetry) are enforced within it.
struct CorrelationEstimate {
    std::vector<double> lags;    ///< seconds
    std::vector<double> values;  ///< same length as lags
    double tolerance = 0.0;

    void validate() const;
};

/// Finite-T estimate of the time average M{x} = lim (1/2T) \int x dt,
/// evaluated as a trapezoidal mean over the record's support.
/// Error: degenerate record (fewer than 2 samples).
double besicovitch_mean(const SampledRecord& record);

/// Finite-T Bohr-Fourier coefficient (1/T) \int x(t) e^{-j w t} dt by
/// trapezoidal quadrature. For a component C e^{j w0 t} in x the result
/// converges to C when w == w0; a component at w0 != w leaks at most
/// 2|C| / (T |w - w0|) plus quadrature error.
Complex bohr_coefficient(const SampledRecord& record, double omega);

/// Projects the record onto every frequency of `freqs`: one line per
/// requested frequency via bohr_coefficient, the w = 0 entry via
/// besicovitch_mean.
LineSpectrum project_onto(const SampledRecord& record, const FrequencySet& freqs);

/// Evaluates 2*Re sum_{w>0} C e^{jwt} + C0 at each requested time.
std::vector<double> reconstruct(const LineSpectrum& spectrum, std::span<const double> times);

/// Single-realization autocorrelation z(tau) = M{x(t-tau) x(t)} on the
/// mean-removed record. Lags are snapped to the sample grid; each time
/// average runs over the overlapping support of length T - |tau|
/// (unbiased normalization). Requires |tau| < T/2.
CorrelationEstimate autocorrelation_single(const SampledRecord& record, std::span<const double> lags);

/// Ensemble-side correlation R(tau) = sum_k g_k cos(w_k tau), where the
/// weight g_k is carried in the real part of the k-th amplitude and means
/// the per-line mean power E{(a^2 + b^2)/2}.
CorrelationEstimate correlation_from_spectrum(const LineSpectrum& weights, std::span<const double> lags);

}  // namespace fsep
