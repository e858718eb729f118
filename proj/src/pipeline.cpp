#include "fsep/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace fsep {

namespace {

std::string format_double(double v, const char* fmt = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

double relative_rms(std::span<const double> estimate, std::span<const double> truth) {
    require(estimate.size() == truth.size(), "relative_rms: length mismatch");
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        err += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
        ref += truth[i] * truth[i];
    }
    return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err / static_cast<double>(truth.size()));
}

Json json_provenance(const std::vector<ProvenanceEntry>& entries) {
    Json arr = Json::array();
    for (const auto& e : entries) {
        const char* kind = e.kind == ProvenanceEntry::Kind::matched_input ? "matched-input"
                           : e.kind == ProvenanceEntry::Kind::coupling    ? "coupling"
                                                                          : "unexplained";
        Json j{{"omega", e.omega}, {"class", kind}};
        if (!e.detail.empty()) {
            j["input"] = e.detail;
        }
        arr.push_back(j);
    }
    return arr;
}

Json json_peak_params(const PeakParams& p, double min_sep_effective) {
    return Json{{"threshold_mode",
                 p.threshold_mode == PeakParams::Threshold::relative_to_max ? "relative" : "absolute"},
                {"threshold_value", p.threshold_value},
                {"min_separation", min_sep_effective},
                {"refine", p.refine}};
}

}  // namespace

void RunConfig::validate() const {
    require(!input_channels.empty(), "run config: no input channels configured");
    require(!output_channels.empty(), "run config: no output channels configured");
    std::set<std::string> seen;
    for (const auto& name : input_channels) {
        require(seen.insert(name).second, "run config: duplicate channel role for '" + name + "'");
    }
    for (const auto& name : output_channels) {
        require(seen.insert(name).second, "run config: channel '" + name + "' is both input and output");
    }
    if (sample_period) {
        require(*sample_period > 0.0, "run config: sample_period must be positive");
    }
}

IngestResult ingest(const std::filesystem::path& path, const RunConfig& config) {
    config.validate();
    const CsvTable table = read_csv(path);
    require(!table.rows.empty(), "ingest '" + path.string() + "': no data rows");

    double sample_period = 0.0;
    double start_time = 0.0;
    const bool has_time = !table.header.empty() && table.header.front() == "t";
    if (has_time) {
        require(table.rows.size() >= 2, "ingest: need at least 2 rows to derive the sample period");
        const auto t = table.column_values(0);
        start_time = t.front();
        sample_period = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
        require(sample_period > 0.0, "ingest: time column is not increasing");
        if (config.sample_period) {
            require(std::abs(*config.sample_period - sample_period) <= 1e-6 * sample_period,
                    "ingest: configured sample_period disagrees with the time column");
        }
        for (std::size_t i = 1; i < t.size(); ++i) {
            const double jitter = std::abs((t[i] - t[i - 1]) - sample_period);
            if (jitter >= 1e-6 * sample_period) {
                std::ostringstream os;
                os << "ingest: non-uniform sampling at row " << i + 2 << ": step " << t[i] - t[i - 1]
                   << " vs " << sample_period;
                fail(os.str());
            }
        }
    } else {
        require(config.sample_period.has_value(),
                "ingest: file has no 't' column and no sample_period is configured");
        sample_period = *config.sample_period;
    }

    auto take = [&](const std::string& name) {
        SampledRecord record;
        record.samples = table.column_values(table.column(name));
        record.sample_period = sample_period;
        record.start_time = start_time;
        record.channel_id = name;
        record.validate();
        return record;
    };

    IngestResult out;
    for (const auto& name : config.input_channels) {
        out.inputs.push_back(take(name));
    }
    for (const auto& name : config.output_channels) {
        out.outputs.push_back(take(name));
    }
    return out;
}

RunSummary run_pipeline(const RunConfig& config) {
    config.validate();
    const std::filesystem::path& dir = config.out_dir;
    std::filesystem::create_directories(dir);

    RunSummary run;
    Json& summary = run.summary;
    summary["format_version"] = kReportFormatVersion;
    Json failures = Json::array();

    IngestResult data = ingest(config.data_path, config);
    const SampledRecord& ref = data.inputs.front();
    const double duration = ref.duration();
    const double delta = config.mimo.delta > 0.0 ? config.mimo.delta : kTwoPi / duration;
    const double step = config.mimo.grid_step > 0.0 ? config.mimo.grid_step : 0.25 * delta;
    const double min_sep =
        config.mimo.peaks.min_separation < 0.0 ? 3.5 * delta : config.mimo.peaks.min_separation;

    run.result = identify_mimo(data.inputs, data.outputs, config.mimo);
    const MimoResult& result = run.result;

    summary["parameters"] = Json{
        {"data", config.data_path.filename().string()},
        {"sample_period", ref.sample_period},
        {"duration", duration},
        {"delta", delta},
        {"grid_step", step},
        {"band",
         Json::array({config.mimo.omega_min >= 0.0 ? config.mimo.omega_min : delta,
                      config.mimo.omega_max > 0.0 ? config.mimo.omega_max : 0.95 * ref.nyquist()})},
        {"peaks", json_peak_params(config.mimo.peaks, min_sep)},
        {"guard_ratio", config.mimo.guard_ratio},
    };

    auto emit_set = [&](const std::string& stem, const FrequencySet& set) {
        write_json(dir / (stem + ".json"), json_frequency_set(set));
        write_text(dir / (stem + ".csv"), csv_frequency_set(set));
    };

    Json inputs_json = Json::array();
    for (std::size_t q = 0; q < data.inputs.size(); ++q) {
        const std::string label = sanitize_label(data.inputs[q].channel_id);
        emit_set("secondary_input_" + label, result.input_detected[q]);
        emit_set("tertiary_" + label, result.input_decorrelated[q]);
        inputs_json.push_back(Json{{"label", data.inputs[q].channel_id},
                                   {"detected", result.input_detected[q].size()},
                                   {"decorrelated", result.input_decorrelated[q].size()}});
    }
    emit_set("coupling", result.coupling);

    Json outputs_json = Json::array();
    for (std::size_t p = 0; p < data.outputs.size(); ++p) {
        const std::string label = sanitize_label(data.outputs[p].channel_id);
        emit_set("secondary_output_" + label, result.output_detected[p]);
        outputs_json.push_back(Json{{"label", data.outputs[p].channel_id},
                                    {"detected", result.output_detected[p].size()}});
    }

    const auto times = ref.time_grid();
    Json channels_json = Json::array();
    std::vector<bool> output_has_estimate(data.outputs.size(), false);
    for (const auto& channel : result.channels) {
        const std::size_t q = channel.input_index;
        const std::size_t p = channel.output_index;
        const std::string in_label = data.inputs[q].channel_id;
        const std::string out_label = data.outputs[p].channel_id;
        const std::string stem = sanitize_label(in_label) + "_" + sanitize_label(out_label);

        write_json(dir / ("quaternary_" + stem + ".json"),
                   json_match_table(channel.match, result.input_decorrelated[q],
                                    result.output_detected[p]));
        write_text(dir / ("quaternary_" + stem + ".csv"), csv_frequency_set(channel.matched));

        Json cj{{"input", in_label},
                {"output", out_label},
                {"matched", channel.matched.size()}};
        if (channel.estimate) {
            output_has_estimate[p] = true;
            write_json(dir / ("channel_" + stem + ".json"), json_channel_estimate(*channel.estimate));
            write_text(dir / ("channel_" + stem + ".csv"), csv_channel_estimate(*channel.estimate));
            cj["points"] = channel.estimate->points.size();
            cj["excluded"] = channel.estimate->excluded.size();
            cj["fit_emitted"] = channel.estimate->fit.has_value();
            if (channel.fit_max_residual) {
                cj["fit_max_residual"] = *channel.fit_max_residual;
            }
            if (channel.fit_error) {
                cj["fit_error"] = *channel.fit_error;
                failures.push_back(Json{{"stage", "fit"},
                                        {"channel", in_label + "->" + out_label},
                                        {"message", *channel.fit_error}});
            }
            if (config.emit_filtered) {
                const auto fin = filter_record(data.inputs[q], channel.matched, times);
                const auto fout = filter_record(data.outputs[p], channel.matched, times);
                write_csv(dir / ("filtered_input_" + stem + ".csv"), {"t", in_label}, {times, fin});
                write_csv(dir / ("filtered_output_" + stem + ".csv"), {"t", out_label}, {times, fout});
            }
        } else {
            cj["failure"] = channel.failure.value_or("unknown");
            failures.push_back(Json{{"stage", "estimate"},
                                    {"channel", in_label + "->" + out_label},
                                    {"message", channel.failure.value_or("unknown")}});
        }
        channels_json.push_back(cj);
    }

    Json provenance_json = Json::array();
    for (std::size_t p = 0; p < data.outputs.size(); ++p) {
        provenance_json.push_back(Json{{"output", data.outputs[p].channel_id},
                                       {"lines", json_provenance(result.output_provenance[p])}});
    }

    summary["counts"] = Json{{"inputs", inputs_json},
                             {"coupling", result.coupling.size()},
                             {"outputs", outputs_json},
                             {"channels", channels_json}};
    summary["provenance"] = provenance_json;
    summary["failures"] = failures;

    run.any_estimate = result.any_estimate();
    bool all_outputs_estimated = true;
    for (bool ok : output_has_estimate) {
        all_outputs_estimated = all_outputs_estimated && ok;
    }
    run.exit_code = all_outputs_estimated ? 0 : 1;
    summary["status"] = run.exit_code == 0 ? "ok" : "no-estimate";
    write_json(dir / "summary.json", summary);
    return run;
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

namespace {

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

void add_check(std::vector<Check>& checks, std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
}

}  // namespace

SelftestOutcome selftest(const std::string& scenario, std::uint64_t seed,
                         const std::filesystem::path& out_dir) {
    const PlantConfig plant = make_scenario(scenario, seed);
    const Realization real = simulate(plant);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path data_path = out_dir / "realization.csv";
    std::vector<SampledRecord> all = real.inputs;
    all.insert(all.end(), real.outputs.begin(), real.outputs.end());
    write_records_csv(data_path, all);

    RunConfig run_config;
    run_config.data_path = data_path;
    run_config.input_channels = plant.input_labels;
    run_config.output_channels = plant.output_labels;
    run_config.out_dir = out_dir;
    run_config.mimo = scenario_mimo_config(scenario, plant);

    RunSummary run = run_pipeline(run_config);
    const MimoResult& result = run.result;

    std::vector<Check> checks;
    std::ostringstream table;
    table << "channel        nu        |W|true   |W|est    mag_err%  ph_true   ph_est    ph_err_deg\n";

    const auto times = real.inputs.front().time_grid();
    double worst_mag = 0.0, worst_phase = 0.0, worst_rms = 0.0;

    for (const auto& channel : result.channels) {
        const std::size_t q = channel.input_index;
        const std::size_t p = channel.output_index;
        if (!plant.channels[q][p]) {
            continue;
        }
        const RationalModel& truth_model = *plant.channels[q][p];
        const std::string name = plant.input_labels[q] + "->" + plant.output_labels[p];
        if (!channel.estimate) {
            add_check(checks, "estimate " + name, false, channel.failure.value_or("missing"));
            continue;
        }
        bool mag_ok = true, phase_ok = true;
        for (const auto& point : channel.estimate->points) {
            const Complex truth = truth_model.evaluate(point.nu);
            const double mag_err = std::abs(std::abs(point.response) - std::abs(truth)) /
                                   std::max(std::abs(truth), 1e-300);
            double phase_err = std::abs(std::arg(point.response) - std::arg(truth)) * 180.0 / kPi;
            if (phase_err > 180.0) {
                phase_err = 360.0 - phase_err;
            }
            worst_mag = std::max(worst_mag, mag_err);
            worst_phase = std::max(worst_phase, phase_err);
            mag_ok = mag_ok && mag_err <= 0.02;
            phase_ok = phase_ok && phase_err <= 2.0;
            table << name;
            for (std::size_t pad = name.size(); pad < 15; ++pad) table << ' ';
            table << format_double(point.nu, "%-10.4f") << format_double(std::abs(truth), "%-10.4f")
                  << format_double(std::abs(point.response), "%-10.4f")
                  << format_double(100.0 * mag_err, "%-10.3f")
                  << format_double(std::arg(truth) * 180.0 / kPi, "%-10.3f")
                  << format_double(std::arg(point.response) * 180.0 / kPi, "%-10.3f")
                  << format_double(phase_err, "%-10.4f") << '\n';
        }
        add_check(checks, "response magnitude " + name + " within 2%", mag_ok, "");
        add_check(checks, "response phase " + name + " within 2 deg", phase_ok, "");

        // filtered signals against the noiseless truth
        const auto truth_in = render_samples(real.truth.input_exact[q], plant.duration,
                                             plant.sample_period);
        const auto truth_out = render_samples(real.truth.output_by_channel[p][q], plant.duration,
                                              plant.sample_period);
        const auto filt_in = filter_record(real.inputs[q], channel.matched, times);
        const auto filt_out = filter_record(real.outputs[p], channel.matched, times);
        const double rms_in = relative_rms(filt_in, truth_in.samples);
        const double rms_out = relative_rms(filt_out, truth_out.samples);
        worst_rms = std::max(worst_rms, std::max(rms_in, rms_out));
        add_check(checks, "filtered input " + name + " RMS within 5%", rms_in <= 0.05,
                  "rms=" + format_double(rms_in, "%.4f"));
        add_check(checks, "filtered output " + name + " RMS within 5%", rms_out <= 0.05,
                  "rms=" + format_double(rms_out, "%.4f"));
    }

    // scenario-specific bookkeeping
    if (scenario == "identity") {
        add_check(checks, "single channel estimated", result.any_estimate(), "");
    }
    if (scenario == "correlated-3x2") {
        const std::size_t truth_coupling = plant.coupling.empty()
                                               ? 0
                                               : plant.coupling.front().spectrum.size();
        bool exact = result.coupling.size() == truth_coupling;
        if (exact) {
            for (const auto& line : plant.coupling.front().spectrum.components) {
                bool found = false;
                for (double c : result.coupling.freqs()) {
                    found = found || std::abs(c - line.omega) <= result.delta;
                }
                exact = exact && found;
            }
        }
        add_check(checks, "coupling tones reported exactly", exact,
                  "reported=" + std::to_string(result.coupling.size()) +
                      " truth=" + std::to_string(truth_coupling));
        // the coupling-induced output lines must be classified as coupling
        bool classified = true;
        for (std::size_t p = 0; p < result.output_provenance.size(); ++p) {
            for (const auto& entry : result.output_provenance[p]) {
                bool is_coupling_line = false;
                for (const auto& line : plant.coupling.front().spectrum.components) {
                    is_coupling_line =
                        is_coupling_line || std::abs(entry.omega - line.omega) <= result.delta;
                }
                if (is_coupling_line) {
                    classified = classified && entry.kind == ProvenanceEntry::Kind::coupling;
                }
            }
        }
        add_check(checks, "coupling output lines classified as coupling", classified, "");
        // no exact tone may be dropped by the decorrelation
        bool kept_all = true;
        for (std::size_t q = 0; q < plant.n_inputs(); ++q) {
            for (const auto& line : plant.input_spectra[q].components) {
                if (line.omega == 0.0) {
                    continue;
                }
                bool found = false;
                for (double w : result.input_decorrelated[q].freqs()) {
                    found = found || std::abs(w - line.omega) <= result.delta;
                }
                kept_all = kept_all && found;
            }
        }
        add_check(checks, "decorrelation kept every exact input tone", kept_all, "");
    }
    if (scenario == "pitch-4x1") {
        const auto& pitch = result.channels.front();  // x1 -> y
        add_check(checks, "pitch channel matched d >= 10",
                  pitch.matched.size() >= 10, "d=" + std::to_string(pitch.matched.size()));
        const bool fit_ok = pitch.estimate && pitch.estimate->fit.has_value();
        add_check(checks, "pitch channel n=9 astatism=1 fit emitted", fit_ok,
                  pitch.fit_error.value_or(""));
        if (fit_ok && pitch.fit_max_residual) {
            add_check(checks, "pitch fit residual within 5%", *pitch.fit_max_residual <= 0.05,
                      "max_residual=" + format_double(*pitch.fit_max_residual, "%.5f"));
        }
    }

    SelftestOutcome outcome;
    outcome.pass = true;
    Json checks_json = Json::array();
    for (const auto& c : checks) {
        outcome.pass = outcome.pass && c.pass;
        checks_json.push_back(Json{{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }

    outcome.table = table.str();
    outcome.report = Json{{"format_version", kReportFormatVersion},
                          {"scenario", scenario},
                          {"seed", seed},
                          {"pass", outcome.pass},
                          {"worst_magnitude_error", worst_mag},
                          {"worst_phase_error_deg", worst_phase},
                          {"worst_filtered_rms", worst_rms},
                          {"checks", checks_json}};
    write_json(out_dir / "selftest_report.json", outcome.report);
    write_text(out_dir / "selftest_table.txt", outcome.table);
    return outcome;
}

}  // namespace fsep
