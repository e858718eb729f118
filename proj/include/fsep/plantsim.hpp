#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsep/freqset.hpp"
#include "fsep/ident.hpp"
#include "fsep/signal.hpp"

namespace fsep {

/// Ground-truth MIMO plant: per-channel rational frequency responses,
/// per-input line spectra, cross-input coupling interference and additive
/// line noise. Line amplitudes are the complex coefficients C(jw); the
/// time-domain contribution of a line is 2|C| cos(wt + phi) with the phase
/// drawn per realization.
struct PlantConfig {
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
    std::vector<LineSpectrum> input_spectra;  ///< exact components x_q
    /// channels[q][p]: response of input q at output p; nullopt = no path
    std::vector<std::vector<std::optional<RationalModel>>> channels;

    struct Coupling {
        std::size_t input_a = 0;
        std::size_t input_b = 0;
        LineSpectrum spectrum;  ///< the same waveform enters both inputs
    };
    std::vector<Coupling> coupling;

    std::vector<LineSpectrum> input_noise;   ///< n_q, one per input (may be empty)
    std::vector<LineSpectrum> output_noise;  ///< m_p, one per output (may be empty)

    double duration = 0.0;
    double sample_period = 0.0;
    std::uint64_t seed = 1;
    /// When set, realized line magnitudes are scaled by a uniform [0.5, 1.5]
    /// draw per line, making second-order statistics vary per realization.
    bool random_amplitudes = false;

    std::size_t n_inputs() const { return input_spectra.size(); }
    std::size_t n_outputs() const { return output_labels.size(); }
    double coincidence_delta() const { return kTwoPi / duration; }

    void validate() const;
};

/// One synthetic realization: the observed records plus every ground-truth
/// spectrum the oracles need.
struct Realization {
    std::vector<SampledRecord> inputs;   ///< observed x~_q = exact + coupling + noise
    std::vector<SampledRecord> outputs;  ///< observed y^_p

    struct Truth {
        std::vector<LineSpectrum> input_exact;     ///< realized phases
        std::vector<LineSpectrum> input_coupling;  ///< coupling content entering each input
        std::vector<LineSpectrum> input_noise;
        /// output_by_channel[p][q]: exact contribution of input q at output p
        std::vector<std::vector<LineSpectrum>> output_by_channel;
        std::vector<LineSpectrum> output_exact;     ///< sum over channels
        std::vector<LineSpectrum> output_coupling;  ///< coupling-induced component
        std::vector<LineSpectrum> output_noise;
    } truth;
};

/// Deterministic-by-seed frequencies in [omega_min, omega_max] with pairwise
/// gaps >= min_gap. Requires (omega_max - omega_min) >= count * min_gap.
FrequencySet gen_disjoint_frequencies(std::size_t count, double omega_min, double omega_max,
                                      double min_gap, std::uint64_t seed, double delta = 0.0);

/// Like gen_disjoint_frequencies, but the result also keeps at least
/// avoid_gap away from every frequency in `avoid`. Rejection-sampled;
/// errors out when the band cannot accommodate the request.
FrequencySet gen_disjoint_frequencies_avoiding(std::size_t count, double omega_min, double omega_max,
                                               double min_gap, std::span<const double> avoid,
                                               double avoid_gap, std::uint64_t seed, double delta = 0.0);

/// Replaces every line's phase with a seed-determined draw; magnitudes are
/// kept (or scaled by a uniform [0.5, 1.5] draw when randomize_amplitudes).
/// The w = 0 line is left untouched.
LineSpectrum realize_phases(const LineSpectrum& spectrum, std::uint64_t seed,
                            bool randomize_amplitudes = false);

/// Evaluates the spectrum's trigonometric sum on a uniform time grid.
SampledRecord render_samples(const LineSpectrum& spectrum, double duration, double sample_period,
                             std::string channel_id = {}, double start_time = 0.0);

/// One random realization of the process with the given line magnitudes:
/// samples of m + sum 2|C_k| cos(w_k t + phi_k), phases drawn by seed.
SampledRecord synthesize(const LineSpectrum& spectrum, std::uint64_t seed, double duration,
                         double sample_period, std::string channel_id = {});

/// Exact steady-state simulation in the frequency domain: each realized
/// input line C at w contributes C * W_qp(jw) at output p; coupling lines
/// pass through the sum of the two channels they enter; noise is added
/// last. All ground truth is retained for oracles.
Realization simulate(const PlantConfig& config);

}  // namespace fsep
