#pragma once

#include <json.hpp>

#include <filesystem>

#include "fsep/freqset.hpp"
#include "fsep/ident.hpp"

namespace fsep {

using Json = nlohmann::ordered_json;

inline constexpr int kReportFormatVersion = 1;

Json json_frequency_set(const FrequencySet& set);
std::string csv_frequency_set(const FrequencySet& set);

/// Quaternary traceability: one entry per match with both original
/// detections alongside the midpoint.
Json json_match_table(const MatchTable& table, const FrequencySet& from_a, const FrequencySet& from_b);

Json json_rational_model(const RationalModel& model);
Json json_channel_estimate(const ChannelEstimate& estimate);
std::string csv_channel_estimate(const ChannelEstimate& estimate);

void write_json(const std::filesystem::path& path, const Json& value);

/// Turns an arbitrary label into a filename fragment.
std::string sanitize_label(const std::string& label);

}  // namespace fsep
