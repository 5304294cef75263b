#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace debie {

struct MetricEntry {
    std::string metric;           // weat | ect | bat | km | svm | sl | ws
    std::optional<double> value;  // absent = undefined (reported, not faked)
    std::string scale;            // "effect_size" or "x100"
    std::optional<double> p_value;
    std::size_t n_items = 0;
    std::size_t oov = 0;
    std::string notes;
};

struct EvalReport {
    std::string space_id;
    std::string spec_name;
    std::vector<MetricEntry> entries;
    std::map<std::string, std::string> config; // echoed run configuration
};

std::string report_json(const EvalReport& report);

// Header plus one row; metric columns in the fixed order
// weat, ect, bat, km, svm, sl, ws ("NA" where not computed).
std::string report_tsv(const EvalReport& report);

// Shortest round-trip decimal form of a double (deterministic).
std::string format_double(double v);

} // namespace debie
