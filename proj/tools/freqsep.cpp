#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "fsep/pipeline.hpp"

namespace {

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("FREQSEP_OUT_DIR")) {
        return env;
    }
    return "out";
}

fsep::Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    fsep::require(in.good(), "cannot open '" + path.string() + "'");
    fsep::Json j;
    in >> j;
    return j;
}

struct DetectionFlags {
    double band_min = -1.0;
    double band_max = -1.0;
    double grid_step = -1.0;
    double delta = -1.0;
    double threshold = 0.1;
    bool threshold_absolute = false;
    double min_separation = -1.0;
    bool no_refine = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--band-min", band_min, "lower edge of the scan band [rad/s]");
        cmd->add_option("--band-max", band_max, "upper edge of the scan band [rad/s]");
        cmd->add_option("--grid-step", grid_step, "scan grid step [rad/s], default delta/4");
        cmd->add_option("--delta", delta, "coincidence tolerance [rad/s], default 2*pi/T");
        cmd->add_option("--threshold", threshold, "peak threshold (relative to max by default)");
        cmd->add_flag("--threshold-absolute", threshold_absolute, "threshold is an absolute amplitude");
        cmd->add_option("--min-separation", min_separation, "peak separation [rad/s], default delta");
        cmd->add_flag("--no-refine", no_refine, "disable quadratic apex interpolation");
    }

    void apply(fsep::MimoConfig& mimo) const {
        mimo.omega_min = band_min;
        mimo.omega_max = band_max;
        mimo.grid_step = grid_step;
        mimo.delta = delta;
        mimo.peaks.threshold_mode = threshold_absolute ? fsep::PeakParams::Threshold::absolute
                                                       : fsep::PeakParams::Threshold::relative_to_max;
        mimo.peaks.threshold_value = threshold;
        mimo.peaks.min_separation = min_separation;
        mimo.peaks.refine = !no_refine;
    }
};

int run_scan(const std::string& data, const std::string& channel, double sample_period,
             const DetectionFlags& flags, const std::filesystem::path& out_dir) {
    const fsep::CsvTable table = fsep::read_csv(data);
    fsep::SampledRecord record;
    const bool has_time = !table.header.empty() && table.header.front() == "t";
    if (has_time) {
        const auto t = table.column_values(0);
        record.start_time = t.front();
        record.sample_period = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    } else {
        fsep::require(sample_period > 0.0, "scan: file has no 't' column; pass --sample-period");
        record.sample_period = sample_period;
    }
    record.samples = table.column_values(table.column(channel));
    record.channel_id = channel;
    record.validate();

    const double duration = record.duration();
    const double delta = flags.delta > 0.0 ? flags.delta : fsep::kTwoPi / duration;
    const double step = flags.grid_step > 0.0 ? flags.grid_step : 0.25 * delta;
    const double lo = flags.band_min >= 0.0 ? flags.band_min : delta;
    const double hi = flags.band_max > 0.0 ? flags.band_max : 0.95 * record.nyquist();

    fsep::SpectrumScan scan = fsep::scan_spectrum(record, lo, hi, step);
    scan.coincidence_delta = delta;
    fsep::PeakParams peaks;
    peaks.threshold_mode = flags.threshold_absolute ? fsep::PeakParams::Threshold::absolute
                                                    : fsep::PeakParams::Threshold::relative_to_max;
    peaks.threshold_value = flags.threshold;
    peaks.min_separation = flags.min_separation;
    peaks.refine = !flags.no_refine;
    const fsep::FrequencySet detected = fsep::detect_frequencies(scan, peaks);

    const std::string stem = fsep::sanitize_label(channel);
    fsep::write_csv(out_dir / ("scan_" + stem + ".csv"), {"omega", "amplitude"},
                    {scan.grid, scan.amplitudes});
    fsep::write_json(out_dir / ("detected_" + stem + ".json"), fsep::json_frequency_set(detected));
    fsep::write_text(out_dir / ("detected_" + stem + ".csv"), fsep::csv_frequency_set(detected));
    std::cout << "scan: " << scan.grid.size() << " grid points, " << detected.size()
              << " detected frequencies (delta " << delta << " rad/s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-separation identification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::filesystem::path out_dir = default_out_dir();
    app.add_option("--out", out_dir, "output directory (env FREQSEP_OUT_DIR)")->capture_default_str();

    // --- scan ---------------------------------------------------------------
    auto* scan_cmd = app.add_subcommand("scan", "amplitude spectrum and peak detection of one channel");
    std::string scan_data, scan_channel;
    double scan_sample_period = -1.0;
    DetectionFlags scan_flags;
    scan_cmd->add_option("--data", scan_data, "input CSV")->required();
    scan_cmd->add_option("--channel", scan_channel, "channel column name")->required();
    scan_cmd->add_option("--sample-period", scan_sample_period, "sample period when no 't' column");
    scan_flags.attach(scan_cmd);

    // --- identify -----------------------------------------------------------
    auto* id_cmd = app.add_subcommand("identify", "full scan/decorrelate/identify/fit pipeline");
    std::string id_data;
    std::vector<std::string> id_inputs, id_outputs;
    double id_sample_period = -1.0;
    DetectionFlags id_flags;
    std::vector<int> id_fit;
    std::string id_config;
    double id_guard = 1e-3;
    bool id_no_filtered = false;
    id_cmd->add_option("--data", id_data, "input CSV");
    id_cmd->add_option("--inputs", id_inputs, "input channel names")->delimiter(',');
    id_cmd->add_option("--outputs", id_outputs, "output channel names")->delimiter(',');
    id_cmd->add_option("--sample-period", id_sample_period, "sample period when no 't' column");
    id_cmd->add_option("--fit", id_fit, "fit orders n,m,astatism applied to every channel")
        ->delimiter(',')
        ->expected(3);
    id_cmd->add_option("--guard-ratio", id_guard, "input-projection exclusion guard");
    id_cmd->add_flag("--no-filtered", id_no_filtered, "skip filtered-signal CSV emission");
    id_cmd->add_option("--config", id_config, "JSON run configuration (overrides flags)");
    id_flags.attach(id_cmd);

    // --- simulate -----------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "generate a realization from a plant JSON");
    std::string sim_plant;
    sim_cmd->add_option("--plant", sim_plant, "plant configuration JSON")->required();

    // --- selftest -----------------------------------------------------------
    auto* self_cmd = app.add_subcommand("selftest", "run a built-in scenario end to end");
    std::string self_scenario = "independent-2x1";
    std::uint64_t self_seed = 1;
    bool self_list = false;
    self_cmd->add_option("--scenario", self_scenario, "scenario name")->capture_default_str();
    self_cmd->add_option("--seed", self_seed, "realization seed")->capture_default_str();
    self_cmd->add_flag("--list", self_list, "list scenario names and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*scan_cmd) {
            return run_scan(scan_data, scan_channel, scan_sample_period, scan_flags, out_dir);
        }
        if (*id_cmd) {
            fsep::RunConfig config;
            config.data_path = id_data;
            config.input_channels = id_inputs;
            config.output_channels = id_outputs;
            if (id_sample_period > 0.0) {
                config.sample_period = id_sample_period;
            }
            id_flags.apply(config.mimo);
            config.mimo.guard_ratio = id_guard;
            config.emit_filtered = !id_no_filtered;
            if (id_fit.size() == 3) {
                config.mimo.fit_all = fsep::FitOrders{id_fit[0], id_fit[1], id_fit[2]};
            }
            config.out_dir = out_dir;
            if (!id_config.empty()) {
                fsep::apply_run_config_json(load_json(id_config), config);
            }
            const fsep::RunSummary run = fsep::run_pipeline(config);
            std::cout << run.summary.dump(2) << '\n';
            return run.exit_code;
        }
        if (*sim_cmd) {
            const fsep::PlantConfig plant = fsep::plant_config_from_json(load_json(sim_plant));
            const fsep::Realization real = fsep::simulate(plant);
            std::vector<fsep::SampledRecord> all = real.inputs;
            all.insert(all.end(), real.outputs.begin(), real.outputs.end());
            fsep::write_records_csv(out_dir / "realization.csv", all);
            fsep::write_json(out_dir / "plant.json", fsep::plant_config_to_json(plant));
            std::cout << "simulate: wrote " << all.size() << " channels x " << all.front().count()
                      << " samples to " << (out_dir / "realization.csv").string() << '\n';
            return 0;
        }
        if (*self_cmd) {
            if (self_list) {
                for (const auto& name : fsep::selftest_scenarios()) {
                    std::cout << name << '\n';
                }
                return 0;
            }
            const fsep::SelftestOutcome outcome = fsep::selftest(self_scenario, self_seed, out_dir);
            std::cout << outcome.table;
            for (const auto& check : outcome.report["checks"]) {
                std::cout << (check["pass"].get<bool>() ? "[PASS] " : "[FAIL] ")
                          << check["check"].get<std::string>();
                const std::string detail = check["detail"].get<std::string>();
                if (!detail.empty()) {
                    std::cout << " (" << detail << ")";
                }
                std::cout << '\n';
            }
            std::cout << (outcome.pass ? "selftest PASS\n" : "selftest FAIL\n");
            return outcome.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
