#include "fsep/reports.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fsep/csv.hpp"

namespace fsep {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Json json_frequency_set(const FrequencySet& set) {
    Json arr = Json::array();
    for (double w : set.freqs()) {
        arr.push_back(Json{{"omega", w}, {"label", set.label()}});
    }
    return arr;
}

std::string csv_frequency_set(const FrequencySet& set) {
    std::ostringstream os;
    for (double w : set.freqs()) {
        os << format_double(w) << '\n';
    }
    return os.str();
}

Json json_match_table(const MatchTable& table, const FrequencySet& from_a, const FrequencySet& from_b) {
    Json arr = Json::array();
    for (const auto& p : table.pairs) {
        arr.push_back(Json{{"nu", p.midpoint},
                           {"input_omega", p.omega_a},
                           {"output_omega", p.omega_b},
                           {"input_index", p.index_a},
                           {"output_index", p.index_b},
                           {"input_set", from_a.label()},
                           {"output_set", from_b.label()}});
    }
    return arr;
}

Json json_rational_model(const RationalModel& model) {
    Json j;
    j["b"] = model.numerator;
    j["a"] = model.denominator;
    j["astatism"] = model.astatism;
    if (model.degenerate) {
        j["degenerate"] = true;
    }
    return j;
}

Json json_channel_estimate(const ChannelEstimate& estimate) {
    Json j;
    j["input"] = estimate.input_label;
    j["output"] = estimate.output_label;
    Json points = Json::array();
    for (const auto& p : estimate.points) {
        points.push_back(Json{{"nu", p.nu}, {"re", p.response.real()}, {"im", p.response.imag()}});
    }
    j["points"] = points;
    if (estimate.fit) {
        j["fit"] = json_rational_model(*estimate.fit);
    } else {
        j["fit"] = nullptr;
    }
    Json excluded = Json::array();
    for (const auto& e : estimate.excluded) {
        excluded.push_back(Json{{"nu", e.nu}, {"reason", e.reason}});
    }
    j["excluded"] = excluded;
    return j;
}

std::string csv_channel_estimate(const ChannelEstimate& estimate) {
    std::ostringstream os;
    os << "nu,magnitude,phase_deg\n";
    for (const auto& p : estimate.points) {
        os << format_double(p.nu) << ',' << format_double(std::abs(p.response)) << ','
           << format_double(std::arg(p.response) * 180.0 / kPi) << '\n';
    }
    return os.str();
}

void write_json(const std::filesystem::path& path, const Json& value) {
    write_text(path, value.dump(2) + "\n");
}

std::string sanitize_label(const std::string& label) {
    std::string out;
    out.reserve(label.size());
    for (char c : label) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
    }
    return out.empty() ? std::string("unnamed") : out;
}

}  // namespace fsep
