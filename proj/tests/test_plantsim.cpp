#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsep/plantsim.hpp"
#include "fsep/spectrum.hpp"
#include "oracles.hpp"

using namespace fsep;

namespace {

LineSpectrum spectrum_of(std::initializer_list<std::pair<double, double>> lines) {
    LineSpectrum s;
    for (const auto& [w, peak] : lines) {
        s.components.push_back({w, Complex(0.5 * peak, 0.0)});
    }
    return s;
}

PlantConfig small_plant(std::uint64_t seed) {
    PlantConfig plant;
    plant.input_labels = {"x1"};
    plant.output_labels = {"y"};
    plant.input_spectra = {spectrum_of({{1.2, 1.0}, {2.7, 1.4}, {4.1, 0.8}})};
    plant.channels = {{RationalModel::from_factored({2.0}, {1.0, 0.4}, 0)}};
    plant.duration = 150.0;
    plant.sample_period = 0.05;
    plant.seed = seed;
    return plant;
}

}  // namespace

TEST_CASE("gen_disjoint_frequencies: packing, bounds, determinism") {
    const FrequencySet one = gen_disjoint_frequencies(1, 2.0, 3.0, 0.5, 7);
    REQUIRE(one.size() == 1);
    CHECK(one[0] >= 2.0);
    CHECK(one[0] <= 3.0);

    const FrequencySet f = gen_disjoint_frequencies(8, 0.5, 10.0, 0.2, 42);
    REQUIRE(f.size() == 8);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f[i] >= 0.5);
        CHECK(f[i] <= 10.0);
        for (std::size_t j = i + 1; j < f.size(); ++j) {
            CHECK(std::abs(f[i] - f[j]) >= 0.2);
        }
    }
    CHECK(gen_disjoint_frequencies(8, 0.5, 10.0, 0.2, 42).freqs() == f.freqs());

    SUBCASE("disjoint bands give a semiring") {
        const FrequencySet lo = gen_disjoint_frequencies(5, 0.5, 5.0, 0.3, 1, 0.05);
        const FrequencySet hi = gen_disjoint_frequencies(5, 6.0, 10.0, 0.3, 2, 0.05);
        CHECK(semiring_check({lo, hi}).disjoint);
    }
    SUBCASE("infeasible packing errors out") {
        CHECK_THROWS_WITH_AS(gen_disjoint_frequencies(10, 0.0, 1.0, 0.2, 3),
                             doctest::Contains("infeasible"), Error);
    }
}

TEST_CASE("gen_disjoint_frequencies_avoiding keeps clear of the avoid list") {
    const std::vector<double> avoid{1.0, 2.0, 3.0, 4.0};
    const FrequencySet f = gen_disjoint_frequencies_avoiding(6, 0.5, 5.0, 0.15, avoid, 0.25, 99);
    REQUIRE(f.size() == 6);
    for (double w : f.freqs()) {
        for (double a : avoid) {
            CHECK(std::abs(w - a) >= 0.25);
        }
    }
}

TEST_CASE("synthesize: empty spectrum, round trip, seed independence of magnitudes") {
    const SampledRecord zero = synthesize(LineSpectrum{}, 5, 10.0, 0.01);
    for (double v : zero.samples) {
        CHECK(v == 0.0);
    }

    LineSpectrum tone = spectrum_of({{2.4, 1.6}});
    const SampledRecord rec = synthesize(tone, 11, 200.0, 0.02);
    const LineSpectrum projected = project_onto(rec, FrequencySet({2.4}, 0.03));
    CHECK(std::abs(std::abs(projected.components[0].amplitude) - 0.8) <= 0.01);

    SUBCASE("different seeds change phases, not the amplitude spectrum") {
        const SampledRecord a = synthesize(tone, 1, 200.0, 0.02);
        const SampledRecord b = synthesize(tone, 2, 200.0, 0.02);
        CHECK(a.samples != b.samples);
        const Complex ca = bohr_coefficient(a, 2.4);
        const Complex cb = bohr_coefficient(b, 2.4);
        CHECK(std::abs(std::abs(ca) - std::abs(cb)) <= 0.02);
    }
    SUBCASE("aliasing is rejected") {
        LineSpectrum fast = spectrum_of({{400.0, 1.0}});
        CHECK_THROWS_WITH_AS(synthesize(fast, 1, 10.0, 0.01), doctest::Contains("Nyquist"), Error);
    }
}

TEST_CASE("simulate: unity channel copies the input") {
    PlantConfig plant = small_plant(3);
    plant.channels = {{RationalModel::from_factored({1.0}, {1.0}, 0)}};
    const Realization real = simulate(plant);
    REQUIRE(real.inputs.size() == 1);
    REQUIRE(real.outputs.size() == 1);
    for (std::size_t i = 0; i < real.inputs[0].samples.size(); ++i) {
        CHECK(real.outputs[0].samples[i] ==
              doctest::Approx(real.inputs[0].samples[i]).epsilon(1e-12));
    }
}

TEST_CASE("simulate: output line amplitudes are |W| times the input lines") {
    const PlantConfig plant = small_plant(8);
    const Realization real = simulate(plant);
    const RationalModel& model = *plant.channels[0][0];
    // the projection of the rendered output carries leakage from the other
    // output lines; bound it from the truth spectrum
    std::vector<oracles::Tone> out_tones;
    for (const auto& line : real.truth.output_exact[0].components) {
        out_tones.push_back({line.omega, 2.0 * std::abs(line.amplitude), std::arg(line.amplitude)});
    }
    for (const auto& line : real.truth.input_exact[0].components) {
        const Complex measured = bohr_coefficient(real.outputs[0], line.omega);
        const Complex expected = line.amplitude * model.evaluate(line.omega);
        const double bound =
            oracles::leakage_bound(out_tones, 0.0, line.omega, plant.duration) +
            oracles::quadrature_allowance(out_tones, 0.0, line.omega, plant.duration,
                                          plant.sample_period);
        CHECK(std::abs(measured - expected) <= bound);
    }
}

TEST_CASE("simulate: identical seeds reproduce bit-identical realizations") {
    const Realization a = simulate(small_plant(123));
    const Realization b = simulate(small_plant(123));
    CHECK(a.inputs[0].samples == b.inputs[0].samples);
    CHECK(a.outputs[0].samples == b.outputs[0].samples);
    const Realization c = simulate(small_plant(124));
    CHECK(a.inputs[0].samples != c.inputs[0].samples);
}

TEST_CASE("simulate: config validation catches overlap and aliasing") {
    PlantConfig plant = small_plant(1);
    SUBCASE("noise on top of an exact line") {
        plant.input_noise = {spectrum_of({{1.2, 0.2}})};
        CHECK_THROWS_WITH_AS(simulate(plant), doctest::Contains("share a line"), Error);
    }
    SUBCASE("two inputs sharing a line") {
        plant.input_labels = {"x1", "x2"};
        plant.input_spectra.push_back(spectrum_of({{2.7, 1.0}}));
        plant.channels = {{RationalModel::from_factored({1.0}, {1.0}, 0)},
                          {RationalModel::from_factored({1.0}, {1.0}, 0)}};
        CHECK_THROWS_WITH_AS(simulate(plant), doctest::Contains("share a line"), Error);
    }
    SUBCASE("line above Nyquist") {
        plant.input_spectra[0].components.push_back({100.0, Complex(0.5, 0.0)});
        CHECK_THROWS_WITH_AS(simulate(plant), doctest::Contains("Nyquist"), Error);
    }
    SUBCASE("astatic channel cannot take a mean line") {
        plant.input_spectra[0].components.insert(plant.input_spectra[0].components.begin(),
                                                 {0.0, Complex(1.0, 0.0)});
        plant.channels = {{RationalModel::from_factored({1.0}, {1.0, 0.5}, 1)}};
        CHECK_THROWS_WITH_AS(simulate(plant), doctest::Contains("singular"), Error);
    }
}

TEST_CASE("lemma 2 by measurement: outputs contain exactly the input support") {
    // noiseless random plants: no new lines, none missing where the channel
    // gain keeps the line above twice the detection threshold
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(mix_seed(seed, 0x1e44a));
        PlantConfig plant;
        plant.input_labels = {"x1"};
        plant.output_labels = {"y"};
        plant.duration = 100.0;
        plant.sample_period = 0.1;
        plant.seed = seed;
        const std::size_t n_tones = 3 + rng.index(4);
        const FrequencySet tones =
            gen_disjoint_frequencies(n_tones, 0.8, 14.0, 0.8, mix_seed(seed, 2));
        LineSpectrum spec;
        for (std::size_t i = 0; i < tones.size(); ++i) {
            spec.components.push_back({tones[i], Complex(0.5 * rng.uniform(0.8, 1.6), 0.0)});
        }
        plant.input_spectra = {spec};
        plant.channels = {{RationalModel::from_factored({rng.uniform(0.8, 2.0), rng.uniform(0.1, 0.5)},
                                                        {1.0, rng.uniform(0.2, 0.6)}, 0)}};
        const Realization real = simulate(plant);

        const SpectrumScan scan =
            scan_spectrum(real.outputs[0], 0.4, 15.0, default_grid_step(real.outputs[0]));
        PeakParams params;
        params.min_separation = 4.0 * scan.coincidence_delta;
        const FrequencySet detected = detect_frequencies(scan, params);
        const double delta = scan.coincidence_delta;

        // no invented lines
        for (double w : detected.freqs()) {
            bool known = false;
            for (const auto& line : real.truth.output_exact[0].components) {
                known = known || std::abs(w - line.omega) <= delta;
            }
            CHECK(known);
        }
        // no missing lines above twice the threshold
        double top = 0.0;
        for (const auto& line : real.truth.output_exact[0].components) {
            top = std::max(top, std::abs(line.amplitude));
        }
        for (const auto& line : real.truth.output_exact[0].components) {
            if (std::abs(line.amplitude) > 2.0 * params.threshold_value * top) {
                bool found = false;
                for (double w : detected.freqs()) {
                    found = found || std::abs(w - line.omega) <= delta;
                }
                CHECK(found);
            }
        }
    }
}

TEST_CASE("eq: the three output components are mutually orthogonal") {
    PlantConfig plant;
    plant.input_labels = {"x1", "x2"};
    plant.output_labels = {"y"};
    plant.duration = 200.0;
    plant.sample_period = 0.05;
    plant.seed = 77;
    plant.input_spectra = {spectrum_of({{1.1, 1.2}, {2.9, 1.0}}),
                           spectrum_of({{1.9, 1.1}, {3.8, 0.9}})};
    plant.channels = {{RationalModel::from_factored({1.5}, {1.0, 0.3}, 0)},
                      {RationalModel::from_factored({1.0, 0.2}, {1.0, 0.5}, 0)}};
    plant.coupling.push_back({0, 1, spectrum_of({{5.2, 1.0}})});
    plant.input_noise = {spectrum_of({{7.3, 0.4}}), spectrum_of({{8.1, 0.4}})};
    plant.output_noise = {spectrum_of({{9.4, 0.5}})};
    const Realization real = simulate(plant);

    const auto exact = render_samples(real.truth.output_exact[0], plant.duration, plant.sample_period);
    const auto coupled =
        render_samples(real.truth.output_coupling[0], plant.duration, plant.sample_period);
    const auto noise = render_samples(real.truth.output_noise[0], plant.duration, plant.sample_period);

    auto cross_mean = [&](const SampledRecord& a, const SampledRecord& b) {
        SampledRecord prod = a;
        for (std::size_t i = 0; i < prod.samples.size(); ++i) {
            prod.samples[i] *= b.samples[i];
        }
        return std::abs(besicovitch_mean(prod));
    };
    // pairwise bounds: every pair of lines is at least 0.4 rad/s apart, so
    // each cross term is below 2 |Ca||Cb| * (2/(T * 0.4))
    auto bound = [&](const LineSpectrum& a, const LineSpectrum& b) {
        double sum_a = 0.0, sum_b = 0.0;
        for (const auto& c : a.components) {
            sum_a += std::abs(c.amplitude);
        }
        for (const auto& c : b.components) {
            sum_b += std::abs(c.amplitude);
        }
        return 4.0 * sum_a * sum_b * 2.0 / (plant.duration * 0.4);
    };
    CHECK(cross_mean(exact, coupled) <= bound(real.truth.output_exact[0], real.truth.output_coupling[0]));
    CHECK(cross_mean(exact, noise) <= bound(real.truth.output_exact[0], real.truth.output_noise[0]));
    CHECK(cross_mean(coupled, noise) <=
          bound(real.truth.output_coupling[0], real.truth.output_noise[0]));
}
