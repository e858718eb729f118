#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsep/freqset.hpp"
#include "fsep/signal.hpp"
#include "fsep/spectrum.hpp"

namespace fsep {

/// Proper rational transfer function with real coefficients,
///
///   W(jv) = B(jv) / D(jv),   D(jv) = (jv)^s * A(jv),  A(0) != 0,
///
/// stored as the numerator b0..bm and the full denominator a0..an with
/// a_n = 1; the first s = astatism entries of the denominator are zero.
struct RationalModel {
    std::vector<double> numerator;    ///< b0..bm
    std::vector<double> denominator;  ///< a0..an, a_n = 1
    int astatism = 0;                 ///< pure integrators s >= 0
    bool degenerate = false;          ///< all-zero data, denominator arbitrary

    int order_n() const { return static_cast<int>(denominator.size()) - 1; }
    int order_m() const { return static_cast<int>(numerator.size()) - 1; }

    Complex evaluate(double nu) const;
    void validate() const;

    /// Builds from numerator b and the reduced denominator A (coefficients
    /// of A(x), lowest first); the full denominator becomes x^s * A(x),
    /// normalized so its leading coefficient is one.
    static RationalModel from_factored(std::vector<double> b, std::vector<double> a_reduced,
                                       int astatism);
};

/// Per-frequency complex response of one input->output channel.
struct ChannelEstimate {
    struct Point {
        double nu = 0.0;  ///< rad/s
        Complex response{0.0, 0.0};
    };
    struct Excluded {
        double nu = 0.0;
        std::string reason;
    };

    std::string input_label;
    std::string output_label;
    std::vector<Point> points;  ///< sorted by nu ascending
    std::vector<Excluded> excluded;
    std::optional<RationalModel> fit;

    std::size_t matched_count() const { return points.size(); }
    void validate() const;
};

/// Frequencies shared by a channel's input and output sets: the midpoints
/// of the tolerance intersection. When several inputs exist the input set
/// must already be de-correlated.
FrequencySet select_channel_frequencies(const FrequencySet& input_set, const FrequencySet& output_set);

/// w(jv) = Y(jv) / X(jv) at every requested frequency. Points whose input
/// projection magnitude falls below guard_ratio times the largest input
/// projection are excluded and reported instead of divided through.
/// Errors if every point ends up excluded.
ChannelEstimate estimate_response(const SampledRecord& input, const SampledRecord& output,
                                  const FrequencySet& nus, double guard_ratio = 1e-3);

/// Noise suppression by projection: project the record onto `nus`, then
/// reconstruct at the requested times. An empty set yields the zero signal.
std::vector<double> filter_record(const SampledRecord& record, const FrequencySet& nus,
                                  std::span<const double> times);

struct FitOptions {
    bool iterative_reweighting = true;  ///< Sanathanan-Koerner style 1/|D| row weights
    int max_iterations = 50;
    double coefficient_tolerance = 1e-8;
};

struct FitResult {
    RationalModel model;
    std::vector<double> residuals;  ///< per point: |W_fit(jv) - w| / max(|w|, eps)
    int iterations = 0;
    double max_residual = 0.0;
};

/// Weighted complex linear least squares on the equation error
/// B(jv) - w(jv) (jv)^s A(jv) = 0 with A monic, real and imaginary parts
/// stacked so the coefficients stay real. Requires the identifiability
/// inequality 2 d >= (m+1) + n + 1. A rank-deficient system raises an
/// error naming the dependent columns.
FitResult fit_rational(const ChannelEstimate& points, int order_n, int order_m, int astatism,
                       const FitOptions& options = {});

struct FitOrders {
    int n = 0;
    int m = 0;
    int astatism = 0;
};

struct MimoConfig {
    double omega_min = -1.0;   ///< < 0: one coincidence width above DC
    double omega_max = -1.0;   ///< < 0: 95% of the common Nyquist
    double grid_step = -1.0;   ///< < 0: delta/4
    double delta = -1.0;       ///< < 0: 2*pi/T of the records
    PeakParams peaks{};
    double guard_ratio = 1e-3;
    std::optional<FitOrders> fit_all;  ///< fit every channel with these orders
    std::map<std::pair<std::size_t, std::size_t>, FitOrders> fit_overrides;  ///< per (q,p)
    FitOptions fit_options{};
};

/// Where a detected output frequency came from.
struct ProvenanceEntry {
    double omega = 0.0;
    enum class Kind { matched_input, coupling, unexplained } kind = Kind::unexplained;
    std::string detail;  ///< input label for matched lines
};

struct ChannelRun {
    std::size_t input_index = 0;
    std::size_t output_index = 0;
    FrequencySet matched;  ///< quaternary data: midpoints for this channel
    MatchTable match;      ///< traceability back to both detections
    std::optional<ChannelEstimate> estimate;
    std::optional<std::string> failure;    ///< estimation failed entirely
    std::optional<std::string> fit_error;  ///< estimate fine, fit failed
    std::optional<double> fit_max_residual;
};

struct MimoResult {
    double delta = 0.0;
    std::vector<FrequencySet> input_detected;      ///< secondary data
    std::vector<FrequencySet> output_detected;     ///< secondary data
    std::vector<FrequencySet> input_decorrelated;  ///< tertiary data
    FrequencySet coupling;
    std::vector<ChannelRun> channels;  ///< all l x d channels
    std::vector<std::vector<ProvenanceEntry>> output_provenance;  ///< per output

    bool any_estimate() const;
};

/// The full pipeline: scan + detect every record, de-correlate the input
/// sets, then per channel select frequencies, estimate the response and
/// optionally fit a rational model. Per-channel failures are recorded and
/// do not abort the remaining channels.
MimoResult identify_mimo(const std::vector<SampledRecord>& inputs,
                         const std::vector<SampledRecord>& outputs, const MimoConfig& config = {});

}  // namespace fsep
