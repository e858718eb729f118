#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fsep/spectrum.hpp"
#include "oracles.hpp"

using namespace fsep;
using oracles::Tone;

namespace {

// brute-force local maxima of a scan, used as the detection oracle
std::vector<std::size_t> brute_force_maxima(const SpectrumScan& scan) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < scan.grid.size(); ++i) {
        if (scan.amplitudes[i] > scan.amplitudes[i - 1] && scan.amplitudes[i] > scan.amplitudes[i + 1]) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("scan_spectrum: pure tone peaks at its frequency with unit apex") {
    const std::vector<Tone> tones{{3.0, 2.0, 0.0}};
    const double T = 200.0, dt = 0.01;
    const auto record = oracles::synth(tones, 0.0, T, dt);
    const double step = default_grid_step(record);
    const SpectrumScan scan = scan_spectrum(record, 2.0, 4.0, step);

    const auto it = std::max_element(scan.amplitudes.begin(), scan.amplitudes.end());
    const std::size_t apex = static_cast<std::size_t>(std::distance(scan.amplitudes.begin(), it));
    CHECK(std::abs(scan.grid[apex] - 3.0) <= step);
    // apex amplitude: |C| = 1 attenuated by at most the half-step Dirichlet dip
    const double dip = std::abs(oracles::dirichlet(0.5 * step, T));
    CHECK(*it <= 1.0 + 0.01);
    CHECK(*it >= dip - 0.01);
}

TEST_CASE("scan_spectrum: zero record scans to numeric zero") {
    SampledRecord r;
    r.samples.assign(2001, 0.0);
    r.sample_period = 0.01;
    r.channel_id = "zero";
    const SpectrumScan scan = scan_spectrum(r, 0.5, 5.0, default_grid_step(r));
    for (double a : scan.amplitudes) {
        CHECK(a <= 1e-12);
    }
}

TEST_CASE("scan_spectrum: two tones 4 delta apart form two separated maxima") {
    const double T = 200.0, dt = 0.01;
    const double delta = 2.0 * kPi / T;
    const std::vector<Tone> tones{{3.0, 1.0, 0.3}, {3.0 + 4.0 * delta, 1.0, 1.2}};
    const auto record = oracles::synth(tones, 0.0, T, dt);
    const SpectrumScan scan = scan_spectrum(record, 2.5, 3.7, default_grid_step(record));

    const auto maxima = brute_force_maxima(scan);
    std::vector<double> strong;
    double top = *std::max_element(scan.amplitudes.begin(), scan.amplitudes.end());
    for (std::size_t i : maxima) {
        if (scan.amplitudes[i] > 0.5 * top) {
            strong.push_back(scan.grid[i]);
        }
    }
    REQUIRE(strong.size() == 2);
    CHECK(strong[1] - strong[0] >= 3.0 * delta);
}

TEST_CASE("scan_spectrum: precondition violations") {
    const auto record = oracles::synth({{3.0, 2.0, 0.0}}, 0.0, 100.0, 0.01);
    CHECK_THROWS_WITH_AS(scan_spectrum(record, 1.0, 400.0, 0.01), doctest::Contains("Nyquist"), Error);
    CHECK_THROWS_AS(scan_spectrum(record, 2.0, 1.0, 0.01), Error);
    // grid coarser than delta/4 cannot resolve coincidences
    CHECK_THROWS_WITH_AS(scan_spectrum(record, 1.0, 5.0, 1.0), doctest::Contains("delta/4"), Error);
}

TEST_CASE("detect_frequencies: single clean tone, with and without refinement") {
    const std::vector<Tone> tones{{3.043, 2.0, 0.9}};
    const double T = 200.0, dt = 0.01;
    const auto record = oracles::synth(tones, 0.0, T, dt);
    const double step = default_grid_step(record);
    const SpectrumScan scan = scan_spectrum(record, 2.0, 4.0, step);

    PeakParams params;
    params.refine = false;
    FrequencySet coarse = detect_frequencies(scan, params);
    REQUIRE(coarse.size() == 1);
    CHECK(std::abs(coarse[0] - 3.043) <= step);

    params.refine = true;
    FrequencySet fine = detect_frequencies(scan, params);
    REQUIRE(fine.size() == 1);
    CHECK(std::abs(fine[0] - 3.043) <= 0.25 * step);
}

TEST_CASE("detect_frequencies: empty result on an all-noise-below-threshold scan") {
    SpectrumScan scan;
    scan.coincidence_delta = 0.05;
    const std::size_t n = 200;
    for (std::size_t i = 0; i < n; ++i) {
        scan.grid.push_back(1.0 + 0.01 * static_cast<double>(i));
        scan.amplitudes.push_back(0.02 + 0.001 * static_cast<double>(i % 3));
    }
    PeakParams params;
    params.threshold_mode = PeakParams::Threshold::absolute;
    params.threshold_value = 0.5;
    CHECK(detect_frequencies(scan, params).empty());
}

TEST_CASE("detect_frequencies: 8 signal tones at 20 dB SNR are all present") {
    const double T = 200.0, dt = 0.02;
    Rng rng(11);
    std::vector<Tone> tones;
    std::vector<double> truth;
    for (int k = 0; k < 8; ++k) {
        const double w = 1.0 + 1.1 * k + rng.uniform(0.0, 0.4);
        truth.push_back(w);
        tones.push_back({w, 2.0, rng.angle()});
    }
    for (int k = 0; k < 8; ++k) {
        tones.push_back({1.55 + 1.1 * k + rng.uniform(0.0, 0.3), 0.2, rng.angle()});  // -20 dB
    }
    const auto record = oracles::synth(tones, 0.0, T, dt);
    const SpectrumScan scan = scan_spectrum(record, 0.5, 11.0, default_grid_step(record));
    const FrequencySet detected = detect_frequencies(scan, PeakParams{});

    for (double w : truth) {
        bool found = false;
        for (double det : detected.freqs()) {
            found = found || std::abs(det - w) <= scan.coincidence_delta;
        }
        CHECK(found);
    }
}

TEST_CASE("detect_frequencies: determinism, threshold monotonicity, maxima provenance") {
    const double T = 150.0, dt = 0.02;
    Rng rng(77);
    std::vector<Tone> tones;
    for (int k = 0; k < 6; ++k) {
        tones.push_back({rng.uniform(1.0, 9.0), rng.uniform(0.2, 2.0), rng.angle()});
    }
    const auto record = oracles::synth(tones, 0.0, T, dt);
    const SpectrumScan scan = scan_spectrum(record, 0.5, 10.0, default_grid_step(record));
    const SpectrumScan scan2 = scan_spectrum(record, 0.5, 10.0, default_grid_step(record));
    CHECK(scan.amplitudes == scan2.amplitudes);  // bit-for-bit determinism

    PeakParams params;
    FrequencySet base = detect_frequencies(scan, params);
    CHECK(detect_frequencies(scan2, params).freqs() == base.freqs());

    // raising the threshold never adds a frequency
    std::size_t prev = base.size();
    for (double th : {0.2, 0.35, 0.5, 0.8}) {
        params.threshold_value = th;
        const FrequencySet tighter = detect_frequencies(scan, params);
        CHECK(tighter.size() <= prev);
        for (double w : tighter.freqs()) {
            bool in_base = false;
            for (double b : base.freqs()) {
                in_base = in_base || w == b;
            }
            CHECK(in_base);
        }
        prev = tighter.size();
    }

    // every detected frequency sits within one grid step of a strict maximum
    params.threshold_value = 0.1;
    const FrequencySet detected = detect_frequencies(scan, params);
    const auto maxima = brute_force_maxima(scan);
    for (double w : detected.freqs()) {
        bool near = false;
        for (std::size_t i : maxima) {
            near = near || std::abs(scan.grid[i] - w) <= scan.step();
        }
        CHECK(near);
    }
}

TEST_CASE("detect_frequencies: two equal tones 4 bins apart resolve at threshold 0.5") {
    const double T = 200.0, dt = 0.02;
    const double delta = 2.0 * kPi / T;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Rng rng(seed);
        const double w1 = rng.uniform(2.0, 6.0);
        const double w2 = w1 + 4.0 * delta;
        const auto record = oracles::synth({{w1, 1.0, rng.angle()}, {w2, 1.0, rng.angle()}}, 0.0, T, dt);
        const SpectrumScan scan = scan_spectrum(record, 1.0, 8.0, default_grid_step(record));
        PeakParams params;
        params.threshold_value = 0.5;
        const FrequencySet detected = detect_frequencies(scan, params);
        bool found1 = false, found2 = false;
        for (double w : detected.freqs()) {
            found1 = found1 || std::abs(w - w1) <= delta;
            found2 = found2 || std::abs(w - w2) <= delta;
        }
        CHECK(found1);
        CHECK(found2);
    }
}
