#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fsep/common.hpp"

namespace fsep {

/// A sorted set of angular frequencies with a coincidence tolerance delta:
/// two frequencies closer than delta are regarded as the same spectral line.
/// delta = 0 turns every operation into exact set algebra.
class FrequencySet {
public:
    FrequencySet() = default;
    FrequencySet(std::vector<double> freqs, double delta, std::string label = {});

    const std::vector<double>& freqs() const { return freqs_; }
    double delta() const { return delta_; }
    const std::string& label() const { return label_; }

    std::size_t size() const { return freqs_.size(); }
    bool empty() const { return freqs_.empty(); }
    double operator[](std::size_t i) const { return freqs_[i]; }

    /// Indices (i, i+1) of consecutive entries that lie within delta of each
    /// other. Such sets are legal but ambiguous for matching; callers that
    /// care audit with this.
    std::vector<std::size_t> self_coincidences() const;

private:
    std::vector<double> freqs_;  ///< strictly increasing, all >= 0
    double delta_ = 0.0;
    std::string label_;
};

/// The one-to-one matching materialized by set_intersect.
struct MatchTable {
    struct Pair {
        std::size_t index_a;
        std::size_t index_b;
        double omega_a;
        double omega_b;
        double midpoint;  ///< matched frequency (a + b)/2
    };
    std::vector<Pair> pairs;              ///< sorted by index_a
    std::vector<std::size_t> unmatched_a;
    std::vector<std::size_t> unmatched_b;

    std::vector<double> midpoints() const;
};

/// |a - b| <= delta. Requires delta >= 0.
bool coincident(double a, double b, double delta);

/// Greedy one-to-one nearest matching between A and B: candidate pairs
/// within delta are taken closest-first, so chains a~b~c with a/~c resolve
/// in favor of the closest pair. Requires A.delta == B.delta; use the
/// explicit-tolerance overload otherwise.
MatchTable set_intersect(const FrequencySet& a, const FrequencySet& b);
MatchTable set_intersect(const FrequencySet& a, const FrequencySet& b, double delta);

/// Entries of A not coincident (within delta) with any entry of B.
/// Label and tolerance of A are preserved.
FrequencySet set_difference(const FrequencySet& a, const FrequencySet& b);

struct SemiringViolation {
    std::size_t set_a;
    std::size_t set_b;
    double omega_a;
    double omega_b;
};

struct SemiringReport {
    bool disjoint = true;
    std::vector<SemiringViolation> violations;
};

/// True iff every pairwise intersection of the given sets is empty at the
/// common tolerance. Requires at least two sets sharing one delta.
SemiringReport semiring_check(const std::vector<FrequencySet>& sets);

/// How decorrelate removes coincident content.
enum class DecorrelateMode {
    /// Build the coupling set F from all pairwise matches and subtract F
    /// from every input; iterate until the outputs are pairwise disjoint.
    global_difference,
    /// Remove matched entries only from the two sets of each matching pair;
    /// the result is audited but not forced disjoint.
    pairwise_removal,
};

struct DecorrelateResult {
    std::vector<FrequencySet> outputs;   ///< one per input, same labels
    FrequencySet coupling;               ///< matched midpoints, merged
    SemiringReport audit;                ///< disjointness of the outputs
    int passes = 0;                      ///< subtraction rounds performed
};

/// Removes cross-input coincident frequencies. In global_difference mode
/// the outputs are guaranteed pairwise disjoint (the audit always passes);
/// in pairwise_removal mode the audit reports whatever remains.
DecorrelateResult decorrelate(const std::vector<FrequencySet>& inputs,
                              DecorrelateMode mode = DecorrelateMode::global_difference);

}  // namespace fsep
