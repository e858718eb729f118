#include "fsep/plantsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace fsep {

namespace {

constexpr std::uint64_t kStreamInput = 0;
constexpr std::uint64_t kStreamCoupling = 1000;
constexpr std::uint64_t kStreamInputNoise = 2000;
constexpr std::uint64_t kStreamOutputNoise = 3000;

std::vector<double> positive_freqs(const LineSpectrum& s) {
    std::vector<double> out;
    for (const auto& c : s.components) {
        if (c.omega > 0.0) {
            out.push_back(c.omega);
        }
    }
    return out;
}

void check_disjoint(const LineSpectrum& a, const LineSpectrum& b, double tol, const std::string& what) {
    for (const auto& ca : a.components) {
        if (ca.omega == 0.0) {
            continue;
        }
        for (const auto& cb : b.components) {
            if (cb.omega == 0.0) {
                continue;
            }
            if (std::abs(ca.omega - cb.omega) <= tol) {
                std::ostringstream os;
                os << "plant config: " << what << " share a line within 2*pi/T: " << ca.omega << " vs "
                   << cb.omega;
                fail(os.str());
            }
        }
    }
}

LineSpectrum merge_spectra(const std::vector<const LineSpectrum*>& parts) {
    std::vector<HarmonicComponent> all;
    for (const auto* s : parts) {
        all.insert(all.end(), s->components.begin(), s->components.end());
    }
    std::sort(all.begin(), all.end(),
              [](const HarmonicComponent& a, const HarmonicComponent& b) { return a.omega < b.omega; });
    LineSpectrum merged;
    for (const auto& c : all) {
        if (!merged.components.empty() && merged.components.back().omega == c.omega) {
            merged.components.back().amplitude += c.amplitude;
            if (c.omega == 0.0) {
                merged.components.back().amplitude =
                    Complex(merged.components.back().amplitude.real(), 0.0);
            }
        } else {
            merged.components.push_back(c);
        }
    }
    merged.validate();
    return merged;
}

LineSpectrum through_channel(const LineSpectrum& input, const RationalModel& model,
                             const std::string& what) {
    LineSpectrum out;
    out.components.reserve(input.size());
    for (const auto& c : input.components) {
        const Complex w = model.evaluate(c.omega);
        require(std::isfinite(w.real()) && std::isfinite(w.imag()),
                "plant config: channel " + what + " is singular at omega " + std::to_string(c.omega));
        HarmonicComponent t;
        t.omega = c.omega;
        t.amplitude = c.amplitude * w;
        if (t.omega == 0.0) {
            t.amplitude = Complex(t.amplitude.real(), 0.0);
        }
        out.components.push_back(t);
    }
    return out;
}

}  // namespace

void PlantConfig::validate() const {
    require(n_inputs() >= 1, "plant config: needs at least one input");
    require(n_outputs() >= 1, "plant config: needs at least one output");
    require(input_labels.size() == n_inputs(), "plant config: input label count mismatch");
    require(duration > 0.0 && sample_period > 0.0 && duration > sample_period,
            "plant config: bad duration / sample_period");
    require(channels.size() == n_inputs(), "plant config: channel table row count mismatch");
    for (const auto& row : channels) {
        require(row.size() == n_outputs(), "plant config: channel table column count mismatch");
    }
    require(input_noise.empty() || input_noise.size() == n_inputs(),
            "plant config: input noise count mismatch");
    require(output_noise.empty() || output_noise.size() == n_outputs(),
            "plant config: output noise count mismatch");

    const double nyquist = kPi / sample_period;
    const double tol = coincidence_delta();

    auto check_spectrum = [&](const LineSpectrum& s, const std::string& what) {
        s.validate();
        require(s.max_omega() < nyquist, "plant config: " + what + " contains a line at or above Nyquist");
    };

    for (std::size_t q = 0; q < n_inputs(); ++q) {
        check_spectrum(input_spectra[q], "input " + input_labels[q]);
    }
    for (const auto& c : coupling) {
        require(c.input_a < n_inputs() && c.input_b < n_inputs() && c.input_a != c.input_b,
                "plant config: coupling entry names a bad input pair");
        check_spectrum(c.spectrum, "coupling spectrum");
    }
    for (std::size_t q = 0; q < input_noise.size(); ++q) {
        check_spectrum(input_noise[q], "input noise " + std::to_string(q));
    }
    for (std::size_t p = 0; p < output_noise.size(); ++p) {
        check_spectrum(output_noise[p], "output noise " + std::to_string(p));
    }

    // Lemma 1 precondition: exact input spectra pairwise disjoint at 2*pi/T;
    // coupling disjoint from exact; noise disjoint from exact and coupling.
    // The w = 0 (mean) lines are exempt: scanning is mean-removed.
    for (std::size_t q = 0; q < n_inputs(); ++q) {
        for (std::size_t r = q + 1; r < n_inputs(); ++r) {
            check_disjoint(input_spectra[q], input_spectra[r],
                           tol, "exact inputs " + input_labels[q] + " and " + input_labels[r]);
        }
    }
    for (const auto& c : coupling) {
        for (std::size_t q = 0; q < n_inputs(); ++q) {
            check_disjoint(c.spectrum, input_spectra[q], tol,
                           "coupling and exact input " + input_labels[q]);
        }
    }
    auto check_noise = [&](const LineSpectrum& noise, const std::string& what) {
        for (std::size_t q = 0; q < n_inputs(); ++q) {
            check_disjoint(noise, input_spectra[q], tol, what + " and exact input " + input_labels[q]);
        }
        for (const auto& c : coupling) {
            check_disjoint(noise, c.spectrum, tol, what + " and coupling");
        }
    };
    for (std::size_t q = 0; q < input_noise.size(); ++q) {
        check_noise(input_noise[q], "input noise " + std::to_string(q));
    }
    for (std::size_t p = 0; p < output_noise.size(); ++p) {
        check_noise(output_noise[p], "output noise " + std::to_string(p));
    }
}

FrequencySet gen_disjoint_frequencies(std::size_t count, double omega_min, double omega_max,
                                      double min_gap, std::uint64_t seed, double delta) {
    require(count >= 1, "gen_disjoint_frequencies: count must be >= 1");
    require(omega_min >= 0.0 && omega_max > omega_min, "gen_disjoint_frequencies: bad band");
    require(min_gap > 0.0, "gen_disjoint_frequencies: min_gap must be positive");
    require(omega_max - omega_min >= static_cast<double>(count) * min_gap,
            "gen_disjoint_frequencies: infeasible packing, band narrower than count * min_gap");

    Rng rng(mix_seed(seed, 0xfeedULL));
    const double slack = (omega_max - omega_min) - static_cast<double>(count - 1) * min_gap;
    std::vector<double> u(count);
    for (double& v : u) {
        v = rng.uniform(0.0, slack);
    }
    std::sort(u.begin(), u.end());
    std::vector<double> freqs(count);
    for (std::size_t i = 0; i < count; ++i) {
        freqs[i] = omega_min + u[i] + static_cast<double>(i) * min_gap;
    }
    return FrequencySet(std::move(freqs), delta);
}

FrequencySet gen_disjoint_frequencies_avoiding(std::size_t count, double omega_min, double omega_max,
                                               double min_gap, std::span<const double> avoid,
                                               double avoid_gap, std::uint64_t seed, double delta) {
    require(count >= 1, "gen_disjoint_frequencies_avoiding: count must be >= 1");
    require(min_gap > 0.0 && avoid_gap >= 0.0, "gen_disjoint_frequencies_avoiding: bad gaps");
    Rng rng(mix_seed(seed, 0xacceULL));
    std::vector<double> freqs;
    int attempts = 0;
    while (freqs.size() < count) {
        require(++attempts <= 100000,
                "gen_disjoint_frequencies_avoiding: could not place the requested lines");
        const double w = rng.uniform(omega_min, omega_max);
        bool ok = true;
        for (double f : freqs) {
            if (std::abs(w - f) < min_gap) {
                ok = false;
                break;
            }
        }
        if (ok) {
            for (double f : avoid) {
                if (std::abs(w - f) < avoid_gap) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            freqs.push_back(w);
        }
    }
    std::sort(freqs.begin(), freqs.end());
    return FrequencySet(std::move(freqs), delta);
}

LineSpectrum realize_phases(const LineSpectrum& spectrum, std::uint64_t seed,
                            bool randomize_amplitudes) {
    spectrum.validate();
    Rng rng(seed);
    LineSpectrum out = spectrum;
    for (auto& c : out.components) {
        if (c.omega == 0.0) {
            continue;
        }
        double mag = std::abs(c.amplitude);
        const double phi = rng.angle();
        if (randomize_amplitudes) {
            mag *= rng.uniform(0.5, 1.5);
        }
        c.amplitude = std::polar(mag, phi);
    }
    return out;
}

SampledRecord render_samples(const LineSpectrum& spectrum, double duration, double sample_period,
                             std::string channel_id, double start_time) {
    require(duration > 0.0 && sample_period > 0.0, "render_samples: bad time grid");
    spectrum.validate();
    require(spectrum.max_omega() < kPi / sample_period,
            "render_samples: spectrum contains a line at or above Nyquist");
    const auto count = static_cast<std::size_t>(std::llround(duration / sample_period)) + 1;

    SampledRecord record;
    record.sample_period = sample_period;
    record.start_time = start_time;
    record.channel_id = std::move(channel_id);
    record.samples.assign(count, 0.0);
    for (const auto& c : spectrum.components) {
        if (c.omega == 0.0) {
            for (double& v : record.samples) {
                v += c.amplitude.real();
            }
            continue;
        }
        // advance by phasor recurrence: 2 Re[C e^{jwt}]
        const Complex rot = std::polar(1.0, c.omega * sample_period);
        Complex phasor = c.amplitude * std::polar(1.0, c.omega * start_time);
        for (std::size_t i = 0; i < count; ++i) {
            if ((i & 1023u) == 0u) {
                phasor = c.amplitude * std::polar(1.0, c.omega * (start_time + static_cast<double>(i) *
                                                                                   sample_period));
            }
            record.samples[i] += 2.0 * phasor.real();
            phasor *= rot;
        }
    }
    return record;
}

SampledRecord synthesize(const LineSpectrum& spectrum, std::uint64_t seed, double duration,
                         double sample_period, std::string channel_id) {
    return render_samples(realize_phases(spectrum, seed), duration, sample_period,
                          std::move(channel_id));
}

Realization simulate(const PlantConfig& config) {
    config.validate();
    const std::size_t l = config.n_inputs();
    const std::size_t d = config.n_outputs();

    Realization real;
    auto& truth = real.truth;
    truth.input_exact.resize(l);
    truth.input_coupling.resize(l);
    truth.input_noise.resize(l);
    truth.output_by_channel.assign(d, std::vector<LineSpectrum>(l));
    truth.output_exact.resize(d);
    truth.output_coupling.resize(d);
    truth.output_noise.resize(d);

    for (std::size_t q = 0; q < l; ++q) {
        truth.input_exact[q] = realize_phases(config.input_spectra[q],
                                              mix_seed(config.seed, kStreamInput + q),
                                              config.random_amplitudes);
    }
    std::vector<LineSpectrum> coupling_realized(config.coupling.size());
    for (std::size_t c = 0; c < config.coupling.size(); ++c) {
        coupling_realized[c] = realize_phases(config.coupling[c].spectrum,
                                              mix_seed(config.seed, kStreamCoupling + c),
                                              config.random_amplitudes);
    }
    for (std::size_t q = 0; q < l; ++q) {
        std::vector<const LineSpectrum*> parts;
        for (std::size_t c = 0; c < config.coupling.size(); ++c) {
            if (config.coupling[c].input_a == q || config.coupling[c].input_b == q) {
                parts.push_back(&coupling_realized[c]);
            }
        }
        truth.input_coupling[q] = parts.empty() ? LineSpectrum{} : merge_spectra(parts);
        if (q < config.input_noise.size()) {
            truth.input_noise[q] = realize_phases(config.input_noise[q],
                                                  mix_seed(config.seed, kStreamInputNoise + q),
                                                  config.random_amplitudes);
        }
    }
    for (std::size_t p = 0; p < d; ++p) {
        if (p < config.output_noise.size()) {
            truth.output_noise[p] = realize_phases(config.output_noise[p],
                                                   mix_seed(config.seed, kStreamOutputNoise + p),
                                                   config.random_amplitudes);
        }
    }

    // exact components through the channels (steady state, no transients)
    for (std::size_t p = 0; p < d; ++p) {
        std::vector<const LineSpectrum*> exact_parts;
        for (std::size_t q = 0; q < l; ++q) {
            if (config.channels[q][p]) {
                truth.output_by_channel[p][q] = through_channel(
                    truth.input_exact[q], *config.channels[q][p],
                    config.input_labels[q] + "->" + config.output_labels[p]);
                exact_parts.push_back(&truth.output_by_channel[p][q]);
            }
        }
        truth.output_exact[p] = exact_parts.empty() ? LineSpectrum{} : merge_spectra(exact_parts);

        // coupling f enters through both channels it feeds: f * (W_ap + W_bp)
        std::vector<LineSpectrum> coupled;
        for (std::size_t c = 0; c < config.coupling.size(); ++c) {
            const auto& entry = config.coupling[c];
            LineSpectrum part;
            for (const auto& line : coupling_realized[c].components) {
                Complex gain{0.0, 0.0};
                if (config.channels[entry.input_a][p]) {
                    gain += config.channels[entry.input_a][p]->evaluate(line.omega);
                }
                if (config.channels[entry.input_b][p]) {
                    gain += config.channels[entry.input_b][p]->evaluate(line.omega);
                }
                HarmonicComponent t;
                t.omega = line.omega;
                t.amplitude = line.amplitude * gain;
                part.components.push_back(t);
            }
            if (!part.components.empty()) {
                coupled.push_back(std::move(part));
            }
        }
        std::vector<const LineSpectrum*> coupled_ptrs;
        for (const auto& s : coupled) {
            coupled_ptrs.push_back(&s);
        }
        truth.output_coupling[p] = coupled_ptrs.empty() ? LineSpectrum{} : merge_spectra(coupled_ptrs);
    }

    // render the observed records
    for (std::size_t q = 0; q < l; ++q) {
        std::vector<const LineSpectrum*> parts{&truth.input_exact[q]};
        if (!truth.input_coupling[q].empty()) {
            parts.push_back(&truth.input_coupling[q]);
        }
        if (!truth.input_noise[q].empty()) {
            parts.push_back(&truth.input_noise[q]);
        }
        real.inputs.push_back(render_samples(merge_spectra(parts), config.duration,
                                             config.sample_period, config.input_labels[q]));
    }
    for (std::size_t p = 0; p < d; ++p) {
        std::vector<const LineSpectrum*> parts;
        if (!truth.output_exact[p].empty()) {
            parts.push_back(&truth.output_exact[p]);
        }
        if (!truth.output_coupling[p].empty()) {
            parts.push_back(&truth.output_coupling[p]);
        }
        if (!truth.output_noise[p].empty()) {
            parts.push_back(&truth.output_noise[p]);
        }
        LineSpectrum merged = parts.empty() ? LineSpectrum{} : merge_spectra(parts);
        real.outputs.push_back(render_samples(merged, config.duration, config.sample_period,
                                              config.output_labels[p]));
    }
    return real;
}

}  // namespace fsep
