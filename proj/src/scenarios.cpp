#include <algorithm>
#include <cmath>

#include "fsep/pipeline.hpp"

namespace fsep {

namespace {

LineSpectrum tones_to_spectrum(std::span<const double> freqs, std::span<const double> peak_amplitudes,
                               double mean = 0.0) {
    require(freqs.size() == peak_amplitudes.size(), "scenario: tone/amplitude count mismatch");
    LineSpectrum s;
    if (mean != 0.0) {
        s.components.push_back({0.0, Complex(mean, 0.0)});
    }
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        // peak amplitude A of A cos(wt + phi) maps to |C| = A/2
        s.components.push_back({freqs[i], Complex(0.5 * peak_amplitudes[i], 0.0)});
    }
    s.validate();
    return s;
}

std::vector<double> constant_amps(std::size_t n, double value) {
    return std::vector<double>(n, value);
}

/// Amplitudes proportional to 1/sqrt(|W|) split the channel's dynamic range
/// evenly between the input and the output lines, keeping both sides of
/// every record inside the detector's relative threshold.
std::vector<double> half_equalized_amps(std::span<const double> freqs, const RationalModel& model,
                                        double target) {
    std::vector<double> amps(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double gain = std::abs(model.evaluate(freqs[i]));
        amps[i] = target / std::sqrt(std::max(gain, 1e-6));
    }
    return amps;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return 1.0;
    }
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
}

double median_amp(const LineSpectrum& s) {
    std::vector<double> mags;
    for (const auto& c : s.components) {
        if (c.omega > 0.0) {
            mags.push_back(2.0 * std::abs(c.amplitude));
        }
    }
    return median(std::move(mags));
}

/// Peak amplitudes of the output lines induced by every channel feeding
/// output p; the scale reference for that output's noise.
double median_output_amp(const PlantConfig& plant, std::size_t p) {
    std::vector<double> mags;
    for (std::size_t q = 0; q < plant.n_inputs(); ++q) {
        if (!plant.channels[q][p]) {
            continue;
        }
        for (const auto& c : plant.input_spectra[q].components) {
            if (c.omega > 0.0) {
                mags.push_back(2.0 * std::abs(c.amplitude * plant.channels[q][p]->evaluate(c.omega)));
            }
        }
    }
    return median(std::move(mags));
}

/// Deals the pool round-robin into bins with the given quotas; every bin
/// receives an interleaved, ascending slice of the pool, so all bins stay
/// pairwise separated by the pool's minimum gap.
std::vector<std::vector<double>> deal_pool(const FrequencySet& pool,
                                           const std::vector<std::size_t>& quotas) {
    std::size_t total = 0;
    for (std::size_t q : quotas) {
        total += q;
    }
    require(total == pool.size(), "scenario: pool size does not match the dealing quotas");
    std::vector<std::vector<double>> bins(quotas.size());
    std::size_t i = 0;
    while (i < pool.size()) {
        for (std::size_t b = 0; b < bins.size() && i < pool.size(); ++b) {
            if (bins[b].size() < quotas[b]) {
                bins[b].push_back(pool[i++]);
            }
        }
    }
    return bins;
}

/// 10 dB below the signal lines: amplitude factor 10^(-10/20).
constexpr double kNoiseRatio10dB = 0.31622776601683794;

PlantConfig identity_scenario(std::uint64_t seed) {
    PlantConfig plant;
    plant.input_labels = {"x1"};
    plant.output_labels = {"y"};
    plant.duration = 200.0;
    plant.sample_period = 0.05;
    plant.seed = seed;

    const FrequencySet tones = gen_disjoint_frequencies(6, 0.8, 6.0, 0.6, mix_seed(seed, 1));
    plant.input_spectra = {tones_to_spectrum(tones.freqs(), constant_amps(6, 1.5))};
    plant.channels = {{RationalModel::from_factored({1.0}, {1.0}, 0)}};
    return plant;
}

PlantConfig independent_2x1_scenario(std::uint64_t seed) {
    PlantConfig plant;
    plant.input_labels = {"x1", "x2"};
    plant.output_labels = {"y"};
    plant.duration = 600.0;
    plant.sample_period = 0.06;
    plant.seed = seed;

    // one pool of well-separated lines dealt to signals and noise keeps
    // every pairwise gap at or above 0.55 rad/s
    const FrequencySet pool = gen_disjoint_frequencies(34, 1.0, 25.0, 0.55, mix_seed(seed, 2));
    const auto bins = deal_pool(pool, {8, 8, 6, 6, 6});  // x1, x2, n1, n2, no

    // second-order lag with a zero: |W| spans roughly one decade over the band
    const RationalModel w1 = RationalModel::from_factored({3.0, 0.6}, {1.0, 0.8, 0.16}, 0);
    const RationalModel w2 = RationalModel::from_factored({1.5, 0.9}, {1.0, 0.5}, 0);

    plant.input_spectra = {tones_to_spectrum(bins[0], half_equalized_amps(bins[0], w1, 1.4)),
                           tones_to_spectrum(bins[1], half_equalized_amps(bins[1], w2, 1.4))};
    plant.channels = {{w1}, {w2}};

    plant.input_noise.resize(2);
    plant.output_noise.resize(1);
    for (std::size_t q = 0; q < 2; ++q) {
        const double amp = kNoiseRatio10dB * median_amp(plant.input_spectra[q]);
        plant.input_noise[q] = tones_to_spectrum(bins[2 + q], constant_amps(6, amp));
    }
    plant.output_noise[0] = tones_to_spectrum(
        bins[4], constant_amps(6, kNoiseRatio10dB * median_output_amp(plant, 0)));
    return plant;
}

PlantConfig correlated_3x2_scenario(std::uint64_t seed) {
    PlantConfig plant;
    plant.input_labels = {"x1", "x2", "x3"};
    plant.output_labels = {"y1", "y2"};
    plant.duration = 600.0;
    plant.sample_period = 0.06;
    plant.seed = seed;

    // 18 exact tones, 3 coupling tones shared by x1 and x2, 25 noise lines
    const FrequencySet pool = gen_disjoint_frequencies(46, 1.0, 27.0, 0.5, mix_seed(seed, 3));
    const auto bins = deal_pool(pool, {6, 6, 6, 3, 5, 5, 5, 5, 5});
    // bins: x1, x2, x3, coupling, n1, n2, n3, no1, no2

    // bounded lead-lags: every channel keeps |W| within [0.9, 2.2] across
    // the band, so each input's lines stay detectable at both outputs
    const RationalModel w11 = RationalModel::from_factored({2.0, 0.6}, {1.0, 0.5}, 0);
    const RationalModel w21 = RationalModel::from_factored({1.2, 0.5}, {1.0, 0.3}, 0);
    const RationalModel w31 = RationalModel::from_factored({0.9, 0.45}, {1.0, 0.35}, 0);
    const RationalModel w12 = RationalModel::from_factored({1.0, 0.8}, {1.0, 0.5}, 0);
    const RationalModel w22 = RationalModel::from_factored({2.2, 0.7}, {1.0, 0.45}, 0);
    const RationalModel w32 = RationalModel::from_factored({1.4, 0.3}, {1.0, 0.25}, 0);

    plant.input_spectra = {tones_to_spectrum(bins[0], half_equalized_amps(bins[0], w11, 1.4)),
                           tones_to_spectrum(bins[1], half_equalized_amps(bins[1], w21, 1.4)),
                           tones_to_spectrum(bins[2], half_equalized_amps(bins[2], w31, 1.4))};
    plant.channels = {{w11, w12}, {w21, w22}, {w31, w32}};
    plant.coupling.push_back({0, 1, tones_to_spectrum(bins[3], constant_amps(3, 1.2))});

    plant.input_noise.resize(3);
    plant.output_noise.resize(2);
    for (std::size_t q = 0; q < 3; ++q) {
        const double amp = kNoiseRatio10dB * median_amp(plant.input_spectra[q]);
        plant.input_noise[q] = tones_to_spectrum(bins[4 + q], constant_amps(5, amp));
    }
    for (std::size_t p = 0; p < 2; ++p) {
        const double amp = kNoiseRatio10dB * median_output_amp(plant, p);
        plant.output_noise[p] = tones_to_spectrum(bins[7 + p], constant_amps(5, amp));
    }
    return plant;
}

PlantConfig pitch_4x1_scenario(std::uint64_t seed) {
    PlantConfig plant;
    plant.input_labels = {"x1", "x2", "x3", "x4"};
    plant.output_labels = {"y"};
    plant.duration = 1200.0;
    plant.sample_period = 0.1;
    plant.seed = seed;

    // pitch channel: 9th order with one integrator. Poles sit above the
    // excited band so |W| varies by less than a decade across it.
    std::vector<double> a_reduced{1.0};
    for (double pole : {4.0, 4.5, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}) {
        std::vector<double> next(a_reduced.size() + 1, 0.0);
        for (std::size_t i = 0; i < a_reduced.size(); ++i) {
            next[i] += pole * a_reduced[i];
            next[i + 1] += a_reduced[i];
        }
        a_reduced = next;
    }
    RationalModel pitch = RationalModel::from_factored({3.25, 2.0, 1.0}, a_reduced, 1);
    const double mid_gain = std::abs(pitch.evaluate(2.0));
    for (double& c : pitch.numerator) {
        c /= mid_gain;
    }

    const RationalModel thrust = RationalModel::from_factored({1.6, 0.4}, {1.0, 0.9, 0.2}, 0);
    const RationalModel flaps = RationalModel::from_factored({0.8}, {1.0, 0.5}, 0);
    const RationalModel stab = RationalModel::from_factored({0.6, 0.1}, {1.0, 0.4}, 0);

    // the pitch input owns the low band; the remaining inputs, their noise
    // and the output noise share an upper band
    const FrequencySet low = gen_disjoint_frequencies(17, 0.5, 4.3, 0.22, mix_seed(seed, 4));
    const auto low_bins = deal_pool(low, {12, 5});  // x1, n1
    const FrequencySet high = gen_disjoint_frequencies(40, 4.8, 19.0, 0.35, mix_seed(seed, 5));
    const auto high_bins = deal_pool(high, {8, 6, 6, 5, 5, 5, 5});
    // high bins: x2, x3, x4, n2, n3, n4, no

    plant.input_spectra = {tones_to_spectrum(low_bins[0], half_equalized_amps(low_bins[0], pitch, 1.4)),
                           tones_to_spectrum(high_bins[0], half_equalized_amps(high_bins[0], thrust, 1.4)),
                           tones_to_spectrum(high_bins[1], half_equalized_amps(high_bins[1], flaps, 1.4)),
                           tones_to_spectrum(high_bins[2], half_equalized_amps(high_bins[2], stab, 1.4))};
    plant.channels = {{pitch}, {thrust}, {flaps}, {stab}};

    plant.input_noise.resize(4);
    plant.output_noise.resize(1);
    plant.input_noise[0] = tones_to_spectrum(
        low_bins[1], constant_amps(5, kNoiseRatio10dB * median_amp(plant.input_spectra[0])));
    for (std::size_t q = 1; q < 4; ++q) {
        const double amp = kNoiseRatio10dB * median_amp(plant.input_spectra[q]);
        plant.input_noise[q] = tones_to_spectrum(high_bins[2 + q], constant_amps(5, amp));
    }
    plant.output_noise[0] = tones_to_spectrum(
        high_bins[6], constant_amps(5, kNoiseRatio10dB * median_output_amp(plant, 0)));
    return plant;
}

}  // namespace

std::vector<std::string> selftest_scenarios() {
    return {"identity", "independent-2x1", "correlated-3x2", "pitch-4x1"};
}

PlantConfig make_scenario(const std::string& name, std::uint64_t seed) {
    if (name == "identity") {
        return identity_scenario(seed);
    }
    if (name == "independent-2x1") {
        return independent_2x1_scenario(seed);
    }
    if (name == "correlated-3x2") {
        return correlated_3x2_scenario(seed);
    }
    if (name == "pitch-4x1") {
        return pitch_4x1_scenario(seed);
    }
    fail("unknown selftest scenario '" + name + "'");
}

MimoConfig scenario_mimo_config(const std::string& name, const PlantConfig& plant) {
    MimoConfig mimo;
    const double delta = plant.coincidence_delta();
    // 4 delta thins every sinc sidelobe ring the 0.1 threshold would admit
    mimo.peaks.threshold_value = 0.1;
    mimo.peaks.min_separation = 4.0 * delta;
    double top = 0.0;
    for (const auto& s : plant.input_spectra) {
        top = std::max(top, s.max_omega());
    }
    for (const auto& c : plant.coupling) {
        top = std::max(top, c.spectrum.max_omega());
    }
    for (const auto& s : plant.input_noise) {
        top = std::max(top, s.max_omega());
    }
    for (const auto& s : plant.output_noise) {
        top = std::max(top, s.max_omega());
    }
    mimo.omega_min = 0.3;
    mimo.omega_max = std::min(top + 1.0, 0.95 * kPi / plant.sample_period);
    if (name == "pitch-4x1") {
        mimo.fit_overrides[{0, 0}] = FitOrders{9, 2, 1};
    }
    return mimo;
}

// ---------------------------------------------------------------------------
// JSON plant / run configuration
// ---------------------------------------------------------------------------

namespace {

LineSpectrum spectrum_from_json(const Json& j) {
    LineSpectrum s;
    if (j.contains("mean") && j["mean"].get<double>() != 0.0) {
        s.components.push_back({0.0, Complex(j["mean"].get<double>(), 0.0)});
    }
    for (const auto& tone : j.value("tones", Json::array())) {
        HarmonicComponent c;
        c.omega = tone.at("omega").get<double>();
        c.amplitude = Complex(0.5 * tone.at("amplitude").get<double>(), 0.0);
        s.components.push_back(c);
    }
    std::sort(s.components.begin(), s.components.end(),
              [](const HarmonicComponent& a, const HarmonicComponent& b) { return a.omega < b.omega; });
    s.validate();
    return s;
}

Json spectrum_to_json(const LineSpectrum& s) {
    Json j;
    Json tones = Json::array();
    for (const auto& c : s.components) {
        if (c.omega == 0.0) {
            j["mean"] = c.amplitude.real();
        } else {
            tones.push_back(Json{{"omega", c.omega}, {"amplitude", 2.0 * std::abs(c.amplitude)}});
        }
    }
    j["tones"] = tones;
    return j;
}

RationalModel model_from_json(const Json& j) {
    return RationalModel::from_factored(j.at("num").get<std::vector<double>>(),
                                        j.at("den").get<std::vector<double>>(),
                                        j.value("astatism", 0));
}

}  // namespace

PlantConfig plant_config_from_json(const Json& j) {
    PlantConfig plant;
    plant.duration = j.at("duration").get<double>();
    plant.sample_period = j.at("sample_period").get<double>();
    plant.seed = j.value("seed", 1ULL);
    plant.random_amplitudes = j.value("random_amplitudes", false);

    for (const auto& input : j.at("inputs")) {
        plant.input_labels.push_back(input.at("label").get<std::string>());
        plant.input_spectra.push_back(spectrum_from_json(input));
    }
    plant.output_labels = j.at("outputs").get<std::vector<std::string>>();

    plant.channels.assign(plant.n_inputs(),
                          std::vector<std::optional<RationalModel>>(plant.n_outputs()));
    for (const auto& ch : j.at("channels")) {
        const auto q = ch.at("input").get<std::size_t>();
        const auto p = ch.at("output").get<std::size_t>();
        require(q < plant.n_inputs() && p < plant.n_outputs(),
                "plant json: channel entry out of range");
        plant.channels[q][p] = model_from_json(ch.at("model"));
    }
    for (const auto& c : j.value("coupling", Json::array())) {
        PlantConfig::Coupling entry;
        entry.input_a = c.at("inputs").at(0).get<std::size_t>();
        entry.input_b = c.at("inputs").at(1).get<std::size_t>();
        entry.spectrum = spectrum_from_json(c);
        plant.coupling.push_back(std::move(entry));
    }
    if (j.contains("input_noise")) {
        plant.input_noise.assign(plant.n_inputs(), {});
        for (const auto& n : j["input_noise"]) {
            plant.input_noise.at(n.at("input").get<std::size_t>()) = spectrum_from_json(n);
        }
    }
    if (j.contains("output_noise")) {
        plant.output_noise.assign(plant.n_outputs(), {});
        for (const auto& n : j["output_noise"]) {
            plant.output_noise.at(n.at("output").get<std::size_t>()) = spectrum_from_json(n);
        }
    }
    plant.validate();
    return plant;
}

Json plant_config_to_json(const PlantConfig& plant) {
    Json j;
    j["format_version"] = kReportFormatVersion;
    j["duration"] = plant.duration;
    j["sample_period"] = plant.sample_period;
    j["seed"] = plant.seed;
    j["random_amplitudes"] = plant.random_amplitudes;
    Json inputs = Json::array();
    for (std::size_t q = 0; q < plant.n_inputs(); ++q) {
        Json in = spectrum_to_json(plant.input_spectra[q]);
        in["label"] = plant.input_labels[q];
        inputs.push_back(in);
    }
    j["inputs"] = inputs;
    j["outputs"] = plant.output_labels;
    Json channels = Json::array();
    for (std::size_t q = 0; q < plant.n_inputs(); ++q) {
        for (std::size_t p = 0; p < plant.n_outputs(); ++p) {
            if (!plant.channels[q][p]) {
                continue;
            }
            const RationalModel& m = *plant.channels[q][p];
            std::vector<double> reduced(m.denominator.begin() + m.astatism, m.denominator.end());
            channels.push_back(Json{{"input", q},
                                    {"output", p},
                                    {"model", Json{{"num", m.numerator},
                                                   {"den", reduced},
                                                   {"astatism", m.astatism}}}});
        }
    }
    j["channels"] = channels;
    Json coupling = Json::array();
    for (const auto& c : plant.coupling) {
        Json entry = spectrum_to_json(c.spectrum);
        entry["inputs"] = Json::array({c.input_a, c.input_b});
        coupling.push_back(entry);
    }
    j["coupling"] = coupling;
    Json input_noise = Json::array();
    for (std::size_t q = 0; q < plant.input_noise.size(); ++q) {
        if (plant.input_noise[q].empty()) {
            continue;
        }
        Json entry = spectrum_to_json(plant.input_noise[q]);
        entry["input"] = q;
        input_noise.push_back(entry);
    }
    j["input_noise"] = input_noise;
    Json output_noise = Json::array();
    for (std::size_t p = 0; p < plant.output_noise.size(); ++p) {
        if (plant.output_noise[p].empty()) {
            continue;
        }
        Json entry = spectrum_to_json(plant.output_noise[p]);
        entry["output"] = p;
        output_noise.push_back(entry);
    }
    j["output_noise"] = output_noise;
    return j;
}

void apply_run_config_json(const Json& j, RunConfig& config) {
    if (j.contains("data")) {
        config.data_path = j["data"].get<std::string>();
    }
    if (j.contains("inputs")) {
        config.input_channels = j["inputs"].get<std::vector<std::string>>();
    }
    if (j.contains("outputs")) {
        config.output_channels = j["outputs"].get<std::vector<std::string>>();
    }
    if (j.contains("sample_period")) {
        config.sample_period = j["sample_period"].get<double>();
    }
    if (j.contains("out_dir")) {
        config.out_dir = j["out_dir"].get<std::string>();
    }
    if (j.contains("emit_filtered")) {
        config.emit_filtered = j["emit_filtered"].get<bool>();
    }
    if (j.contains("band")) {
        config.mimo.omega_min = j["band"].at(0).get<double>();
        config.mimo.omega_max = j["band"].at(1).get<double>();
    }
    if (j.contains("grid_step")) {
        config.mimo.grid_step = j["grid_step"].get<double>();
    }
    if (j.contains("delta")) {
        config.mimo.delta = j["delta"].get<double>();
    }
    if (j.contains("guard_ratio")) {
        config.mimo.guard_ratio = j["guard_ratio"].get<double>();
    }
    if (j.contains("peaks")) {
        const Json& p = j["peaks"];
        if (p.contains("threshold_mode")) {
            config.mimo.peaks.threshold_mode = p["threshold_mode"].get<std::string>() == "absolute"
                                                   ? PeakParams::Threshold::absolute
                                                   : PeakParams::Threshold::relative_to_max;
        }
        if (p.contains("threshold_value")) {
            config.mimo.peaks.threshold_value = p["threshold_value"].get<double>();
        }
        if (p.contains("min_separation")) {
            config.mimo.peaks.min_separation = p["min_separation"].get<double>();
        }
        if (p.contains("refine")) {
            config.mimo.peaks.refine = p["refine"].get<bool>();
        }
    }
    if (j.contains("fit")) {
        for (const auto& f : j["fit"]) {
            FitOrders orders{f.at("n").get<int>(), f.at("m").get<int>(), f.value("astatism", 0)};
            if (f.contains("input") && f.contains("output")) {
                // indices refer to the configured role lists
                std::size_t q = 0, p = 0;
                const std::string in = f["input"].get<std::string>();
                const std::string out = f["output"].get<std::string>();
                for (std::size_t i = 0; i < config.input_channels.size(); ++i) {
                    if (config.input_channels[i] == in) {
                        q = i;
                    }
                }
                for (std::size_t i = 0; i < config.output_channels.size(); ++i) {
                    if (config.output_channels[i] == out) {
                        p = i;
                    }
                }
                config.mimo.fit_overrides[{q, p}] = orders;
            } else {
                config.mimo.fit_all = orders;
            }
        }
    }
}

}  // namespace fsep
