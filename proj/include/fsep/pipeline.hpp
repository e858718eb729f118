#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsep/csv.hpp"
#include "fsep/ident.hpp"
#include "fsep/plantsim.hpp"
#include "fsep/reports.hpp"

namespace fsep {

/// One batch run: which file, which columns play input/output, detection
/// parameters and optional per-channel fit orders.
struct RunConfig {
    std::filesystem::path data_path;
    std::vector<std::string> input_channels;
    std::vector<std::string> output_channels;
    std::optional<double> sample_period;  ///< required when the file has no "t" column
    MimoConfig mimo;
    std::filesystem::path out_dir = "out";
    bool emit_filtered = true;

    void validate() const;
};

struct IngestResult {
    std::vector<SampledRecord> inputs;
    std::vector<SampledRecord> outputs;
};

/// Reads the CSV, checks uniform sampling (when a "t" column is present the
/// timestamp jitter must stay below 1e-6 of the sample period) and splits
/// the configured channels into input and output records.
IngestResult ingest(const std::filesystem::path& path, const RunConfig& config);

struct RunSummary {
    bool any_estimate = false;
    int exit_code = 0;
    Json summary;
    MimoResult result;
};

/// Full batch run: ingest, identify, write secondary / tertiary / quaternary
/// frequency sets, channel estimates, filtered signals and the run summary
/// into config.out_dir. Per-stage failures land in the summary; the exit
/// code is nonzero when no output channel produced an estimate.
RunSummary run_pipeline(const RunConfig& config);

/// Built-in scenario names, in display order.
std::vector<std::string> selftest_scenarios();

/// Ground-truth plant for a named scenario ("identity", "independent-2x1",
/// "correlated-3x2", "pitch-4x1").
PlantConfig make_scenario(const std::string& name, std::uint64_t seed);

/// Detection and fit parameters the named scenario runs with.
MimoConfig scenario_mimo_config(const std::string& name, const PlantConfig& plant);

struct SelftestOutcome {
    bool pass = false;
    std::string table;  ///< true vs estimated response, one row per matched line
    Json report;
};

/// Simulates the named scenario, feeds the realization through the public
/// CSV + pipeline path and checks the per-scenario tolerances (2% / 2 deg
/// response accuracy, 5% filtered-signal RMS, coupling bookkeeping).
/// All artifacts land in out_dir; reports are byte-stable for a fixed seed.
SelftestOutcome selftest(const std::string& scenario, std::uint64_t seed,
                         const std::filesystem::path& out_dir);

/// JSON plant description (see README for the schema).
PlantConfig plant_config_from_json(const Json& j);
Json plant_config_to_json(const PlantConfig& config);

/// Applies a JSON run-configuration file on top of `config` (file wins).
void apply_run_config_json(const Json& j, RunConfig& config);

}  // namespace fsep
