#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fsep/freqset.hpp"

using namespace fsep;

namespace {

// random strictly-increasing set on a coarse lattice so that coincidences
// at the tolerance actually occur
FrequencySet random_set(Rng& rng, double delta, const std::string& label) {
    const std::size_t n = 1 + rng.index(8);
    std::vector<double> freqs;
    double w = rng.uniform(0.1, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        w += rng.uniform(0.3, 3.0) * delta;
        freqs.push_back(w);
    }
    return FrequencySet(freqs, delta, label);
}

bool coincides_with_any(double w, const FrequencySet& set) {
    for (double f : set.freqs()) {
        if (std::abs(w - f) <= set.delta()) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("coincident: paper tolerance delta = 2 pi / 137") {
    CHECK(coincident(2.0, 2.0, 1e-12));
    const double delta = 2.0 * kPi / 137.0;  // ~0.04586
    CHECK(coincident(2.00, 2.04, delta));
    CHECK_FALSE(coincident(2.00, 2.10, delta));
    CHECK_THROWS_AS(coincident(1.0, 1.0, -0.1), Error);
}

TEST_CASE("set_intersect: hand-evaluated matching") {
    const FrequencySet a({1.0, 2.0, 5.0}, 0.05, "A");
    const FrequencySet b({2.01, 7.0}, 0.05, "B");
    const MatchTable t = set_intersect(a, b);
    REQUIRE(t.pairs.size() == 1);
    CHECK(t.pairs[0].omega_a == 2.0);
    CHECK(t.pairs[0].omega_b == 2.01);
    CHECK(t.pairs[0].midpoint == doctest::Approx(2.005).epsilon(1e-15));
    CHECK(t.unmatched_a == std::vector<std::size_t>{0, 2});
    CHECK(t.unmatched_b == std::vector<std::size_t>{1});

    SUBCASE("identical sets fully match") {
        const MatchTable self = set_intersect(a, a);
        CHECK(self.pairs.size() == a.size());
        CHECK(self.unmatched_a.empty());
        CHECK(self.unmatched_b.empty());
    }
    SUBCASE("sets farther than delta do not match") {
        const FrequencySet c({3.0, 4.0}, 0.05, "C");
        CHECK(set_intersect(a, c).pairs.empty());
    }
    SUBCASE("mismatched tolerances require the explicit-delta overload") {
        const FrequencySet c({2.0}, 0.01, "C");
        CHECK_THROWS_WITH_AS(set_intersect(a, c), doctest::Contains("tolerance"), Error);
        CHECK(set_intersect(a, c, 0.05).pairs.size() == 1);
    }
}

TEST_CASE("set_difference: hand oracle and trivial cases") {
    const FrequencySet a({1.0, 2.0, 5.0}, 0.05, "A");
    CHECK(set_difference(a, FrequencySet({2.01}, 0.05)).freqs() == std::vector<double>{1.0, 5.0});
    CHECK(set_difference(a, FrequencySet({}, 0.05)).freqs() == a.freqs());
    CHECK(set_difference(a, a).empty());
    // label and tolerance survive
    const FrequencySet left = set_difference(a, FrequencySet({5.0}, 0.05));
    CHECK(left.label() == "A");
    CHECK(left.delta() == 0.05);
}

TEST_CASE("semiring_check: disjointness with a violation report") {
    const std::vector<FrequencySet> good{FrequencySet({1.0, 3.0}, 0.1), FrequencySet({2.0, 4.0}, 0.1)};
    CHECK(semiring_check(good).disjoint);

    const std::vector<FrequencySet> bad{FrequencySet({1.0, 3.0}, 0.1),
                                        FrequencySet({3.05, 7.0}, 0.1)};
    const SemiringReport report = semiring_check(bad);
    CHECK_FALSE(report.disjoint);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].omega_a == 3.0);
    CHECK(report.violations[0].omega_b == 3.05);

    CHECK_THROWS_AS(semiring_check({good[0]}), Error);
}

TEST_CASE("decorrelate: hand oracle") {
    const FrequencySet a({1.0, 2.0, 5.0}, 0.05, "x1");
    const FrequencySet b({2.01, 7.0}, 0.05, "x2");
    const DecorrelateResult r = decorrelate({a, b});
    REQUIRE(r.coupling.size() == 1);
    CHECK(r.coupling[0] == doctest::Approx(2.005).epsilon(1e-15));
    CHECK(r.outputs[0].freqs() == std::vector<double>{1.0, 5.0});
    CHECK(r.outputs[1].freqs() == std::vector<double>{7.0});
    CHECK(r.audit.disjoint);
    CHECK(r.outputs[0].label() == "x1");

    SUBCASE("already-disjoint inputs pass through") {
        const FrequencySet c({10.0, 11.0}, 0.05, "x3");
        const DecorrelateResult id = decorrelate({a, c});
        CHECK(id.coupling.empty());
        CHECK(id.outputs[0].freqs() == a.freqs());
        CHECK(id.outputs[1].freqs() == c.freqs());
    }
    SUBCASE("identical inputs cancel entirely") {
        const DecorrelateResult same = decorrelate({a, a});
        CHECK(same.outputs[0].empty());
        CHECK(same.outputs[1].empty());
        CHECK(same.coupling.size() == a.size());
    }
}

TEST_CASE("decorrelate: pairwise removal mode is audited") {
    const FrequencySet a({1.0, 2.0}, 0.05, "x1");
    const FrequencySet b({2.01, 7.0}, 0.05, "x2");
    const FrequencySet c({7.02}, 0.05, "x3");
    const DecorrelateResult r = decorrelate({a, b, c}, DecorrelateMode::pairwise_removal);
    CHECK(r.outputs[0].freqs() == std::vector<double>{1.0});
    CHECK(r.outputs[1].empty());
    CHECK(r.outputs[2].empty());
    CHECK(r.audit.disjoint);
}

TEST_CASE("property: decorrelate outputs always satisfy the semiring") {
    Rng rng(314159);
    for (int trial = 0; trial < 300; ++trial) {
        const double delta = rng.uniform(0.01, 0.2);
        std::vector<FrequencySet> family;
        const std::size_t n_sets = 2 + rng.index(3);
        for (std::size_t s = 0; s < n_sets; ++s) {
            family.push_back(random_set(rng, delta, "s" + std::to_string(s)));
        }
        const DecorrelateResult r = decorrelate(family);
        CHECK(r.audit.disjoint);
        CHECK(semiring_check(r.outputs).disjoint);
        // outputs only ever shrink
        for (std::size_t s = 0; s < n_sets; ++s) {
            CHECK(r.outputs[s].size() <= family[s].size());
            for (double w : r.outputs[s].freqs()) {
                bool from_input = false;
                for (double f : family[s].freqs()) {
                    from_input = from_input || w == f;
                }
                CHECK(from_input);
            }
        }
    }
}

TEST_CASE("property: difference is disjoint from the subtrahend") {
    Rng rng(271828);
    for (int trial = 0; trial < 300; ++trial) {
        const double delta = rng.uniform(0.01, 0.2);
        const FrequencySet a = random_set(rng, delta, "a");
        const FrequencySet b = random_set(rng, delta, "b");
        const FrequencySet d = set_difference(a, b);
        for (double w : d.freqs()) {
            CHECK_FALSE(coincides_with_any(w, b));
        }
    }
}

TEST_CASE("property: matching cardinality is symmetric") {
    Rng rng(161803);
    for (int trial = 0; trial < 300; ++trial) {
        const double delta = rng.uniform(0.01, 0.2);
        const FrequencySet a = random_set(rng, delta, "a");
        const FrequencySet b = random_set(rng, delta, "b");
        CHECK(set_intersect(a, b).pairs.size() == set_intersect(b, a).pairs.size());
    }
}

TEST_CASE("property: delta = 0 reduces to exact set algebra") {
    Rng rng(42424242);
    for (int trial = 0; trial < 200; ++trial) {
        // draw from a small integer lattice so exact collisions happen
        auto lattice_set = [&](const std::string& label) {
            std::vector<double> freqs;
            double w = 0.0;
            const std::size_t n = 1 + rng.index(6);
            for (std::size_t i = 0; i < n; ++i) {
                w += 1.0 + static_cast<double>(rng.index(3));
                freqs.push_back(w);
            }
            return FrequencySet(freqs, 0.0, label);
        };
        const FrequencySet a = lattice_set("a");
        const FrequencySet b = lattice_set("b");
        const FrequencySet empty({}, 0.0);

        CHECK(set_difference(a, empty).freqs() == a.freqs());
        CHECK(set_difference(a, a).empty());
        const FrequencySet diff = set_difference(a, b);
        for (double w : diff.freqs()) {
            CHECK_FALSE(coincides_with_any(w, b));
        }
        // (A \ B) u (A n B) == A, elementwise at delta = 0
        const MatchTable inter = set_intersect(a, b);
        CHECK(diff.size() + inter.pairs.size() == a.size());
        for (const auto& p : inter.pairs) {
            CHECK(p.omega_a == p.omega_b);
            CHECK(p.midpoint == p.omega_a);
        }
    }
}
