#include "fsep/freqset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fsep {

namespace {

void check_common_delta(const std::vector<FrequencySet>& sets) {
    for (std::size_t i = 1; i < sets.size(); ++i) {
        require(sets[i].delta() == sets[0].delta(),
                "frequency sets carry different tolerances; pass an explicit delta");
    }
}

}  // namespace

FrequencySet::FrequencySet(std::vector<double> freqs, double delta, std::string label)
    : freqs_(std::move(freqs)), delta_(delta), label_(std::move(label)) {
    require(std::isfinite(delta_) && delta_ >= 0.0, "frequency set: delta must be finite and >= 0");
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
        require(std::isfinite(freqs_[i]) && freqs_[i] >= 0.0,
                "frequency set '" + label_ + "': frequencies must be finite and >= 0");
        if (i > 0) {
            require(freqs_[i] > freqs_[i - 1],
                    "frequency set '" + label_ + "': frequencies must be strictly increasing");
        }
    }
}

std::vector<std::size_t> FrequencySet::self_coincidences() const {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i + 1 < freqs_.size(); ++i) {
        if (freqs_[i + 1] - freqs_[i] <= delta_) {
            hits.push_back(i);
        }
    }
    return hits;
}

std::vector<double> MatchTable::midpoints() const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.push_back(p.midpoint);
    }
    return out;
}

bool coincident(double a, double b, double delta) {
    require(std::isfinite(delta) && delta >= 0.0, "coincident: delta must be finite and >= 0");
    return std::abs(a - b) <= delta;
}

MatchTable set_intersect(const FrequencySet& a, const FrequencySet& b) {
    require(a.delta() == b.delta(), "set_intersect: tolerance mismatch (" + std::to_string(a.delta()) +
                                        " vs " + std::to_string(b.delta()) + "); pass an explicit delta");
    return set_intersect(a, b, a.delta());
}

MatchTable set_intersect(const FrequencySet& a, const FrequencySet& b, double delta) {
    require(std::isfinite(delta) && delta >= 0.0, "set_intersect: delta must be finite and >= 0");

    struct Candidate {
        double dist;
        std::size_t ia;
        std::size_t ib;
    };
    std::vector<Candidate> candidates;
    // each a-entry can only match b-entries inside [a - delta, a + delta]
    std::size_t lo = 0;
    for (std::size_t ia = 0; ia < a.size(); ++ia) {
        while (lo < b.size() && b[lo] < a[ia] - delta) {
            ++lo;
        }
        for (std::size_t ib = lo; ib < b.size() && b[ib] <= a[ia] + delta; ++ib) {
            candidates.push_back({std::abs(a[ia] - b[ib]), ia, ib});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.dist != y.dist) return x.dist < y.dist;
        if (x.ia != y.ia) return x.ia < y.ia;
        return x.ib < y.ib;
    });

    std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
    MatchTable table;
    for (const auto& c : candidates) {
        if (used_a[c.ia] || used_b[c.ib]) {
            continue;
        }
        used_a[c.ia] = true;
        used_b[c.ib] = true;
        table.pairs.push_back({c.ia, c.ib, a[c.ia], b[c.ib], 0.5 * (a[c.ia] + b[c.ib])});
    }
    std::sort(table.pairs.begin(), table.pairs.end(),
              [](const MatchTable::Pair& x, const MatchTable::Pair& y) { return x.index_a < y.index_a; });
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!used_a[i]) table.unmatched_a.push_back(i);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!used_b[i]) table.unmatched_b.push_back(i);
    }
    return table;
}

FrequencySet set_difference(const FrequencySet& a, const FrequencySet& b) {
    require(a.delta() == b.delta(), "set_difference: tolerance mismatch");
    const double delta = a.delta();
    std::vector<double> kept;
    kept.reserve(a.size());
    std::size_t lo = 0;
    for (std::size_t ia = 0; ia < a.size(); ++ia) {
        while (lo < b.size() && b[lo] < a[ia] - delta) {
            ++lo;
        }
        const bool hit = lo < b.size() && b[lo] <= a[ia] + delta;
        if (!hit) {
            kept.push_back(a[ia]);
        }
    }
    return FrequencySet(std::move(kept), delta, a.label());
}

SemiringReport semiring_check(const std::vector<FrequencySet>& sets) {
    require(sets.size() >= 2, "semiring_check: needs at least 2 sets");
    check_common_delta(sets);
    const double delta = sets[0].delta();

    SemiringReport report;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            const auto& a = sets[i];
            const auto& b = sets[j];
            std::size_t lo = 0;
            for (std::size_t ia = 0; ia < a.size(); ++ia) {
                while (lo < b.size() && b[lo] < a[ia] - delta) {
                    ++lo;
                }
                for (std::size_t ib = lo; ib < b.size() && b[ib] <= a[ia] + delta; ++ib) {
                    report.violations.push_back({i, j, a[ia], b[ib]});
                }
            }
        }
    }
    report.disjoint = report.violations.empty();
    return report;
}

DecorrelateResult decorrelate(const std::vector<FrequencySet>& inputs, DecorrelateMode mode) {
    require(inputs.size() >= 2, "decorrelate: needs at least 2 input sets");
    check_common_delta(inputs);
    const double delta = inputs[0].delta();

    DecorrelateResult result;

    if (mode == DecorrelateMode::pairwise_removal) {
        // remove matched entries only from the two arrays of each pair
        std::vector<std::set<double>> removed(inputs.size());
        std::vector<double> coupling;
        for (std::size_t q = 0; q < inputs.size(); ++q) {
            for (std::size_t p = q + 1; p < inputs.size(); ++p) {
                const MatchTable m = set_intersect(inputs[q], inputs[p], delta);
                for (const auto& pair : m.pairs) {
                    removed[q].insert(pair.omega_a);
                    removed[p].insert(pair.omega_b);
                    coupling.push_back(pair.midpoint);
                }
            }
        }
        for (std::size_t q = 0; q < inputs.size(); ++q) {
            std::vector<double> kept;
            for (double w : inputs[q].freqs()) {
                if (!removed[q].count(w)) {
                    kept.push_back(w);
                }
            }
            result.outputs.emplace_back(std::move(kept), delta, inputs[q].label());
        }
        std::sort(coupling.begin(), coupling.end());
        coupling.erase(std::unique(coupling.begin(), coupling.end()), coupling.end());
        result.coupling = FrequencySet(std::move(coupling), delta, "coupling");
        result.audit = semiring_check(result.outputs);
        result.passes = 1;
        return result;
    }

    // global difference: subtract the union F of matched midpoints from every
    // input. With tolerance matching a single subtraction can leave chained
    // coincidences (a~b, midpoint removes a but a second entry within delta
    // of b survives), so the subtraction is repeated on the residual sets
    // until the family is pairwise disjoint. One pass suffices whenever the
    // internal spacing of each input exceeds delta.
    std::vector<double> coupling;
    std::vector<FrequencySet> outputs(inputs.begin(), inputs.end());
    int pass = 0;
    while (true) {
        ++pass;
        bool matched_any = false;
        for (std::size_t q = 0; q < outputs.size(); ++q) {
            for (std::size_t p = q + 1; p < outputs.size(); ++p) {
                const MatchTable m = set_intersect(outputs[q], outputs[p], delta);
                for (const auto& pair : m.pairs) {
                    coupling.push_back(pair.midpoint);
                    matched_any = true;
                }
            }
        }
        if (!matched_any) {
            break;
        }
        std::sort(coupling.begin(), coupling.end());
        coupling.erase(std::unique(coupling.begin(), coupling.end()), coupling.end());
        const FrequencySet coupling_set(coupling, delta, "coupling");
        for (std::size_t q = 0; q < outputs.size(); ++q) {
            outputs[q] = set_difference(inputs[q], coupling_set);
        }
    }

    // self-coincidence thinning: drop a midpoint only when every input entry
    // it covers is already covered by a kept midpoint, so the reported set
    // yields exactly the same differences
    std::vector<double> universe;
    for (const auto& s : inputs) {
        universe.insert(universe.end(), s.freqs().begin(), s.freqs().end());
    }
    std::sort(universe.begin(), universe.end());
    std::vector<double> kept;
    for (double f : coupling) {
        const bool near_kept = !kept.empty() && f - kept.back() <= delta;
        if (near_kept) {
            bool redundant = true;
            auto first = std::lower_bound(universe.begin(), universe.end(), f - delta);
            for (auto it = first; it != universe.end() && *it <= f + delta; ++it) {
                bool covered = false;
                for (double k : kept) {
                    if (std::abs(*it - k) <= delta) {
                        covered = true;
                        break;
                    }
                }
                if (!covered) {
                    redundant = false;
                    break;
                }
            }
            if (redundant) {
                continue;
            }
        }
        kept.push_back(f);
    }

    result.outputs = std::move(outputs);
    result.coupling = FrequencySet(std::move(kept), delta, "coupling");
    result.audit = semiring_check(result.outputs);
    result.passes = pass;
    return result;
}

}  // namespace fsep
