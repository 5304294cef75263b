#include "debie/report.hpp"

#include <charconv>
#include <stdexcept>

#include <json.hpp>

namespace debie {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("float formatting failed");
    return std::string(buf, end);
}

std::string report_json(const EvalReport& report) {
    json j;
    j["space"] = report.space_id;
    j["spec"] = report.spec_name;
    j["config"] = report.config;
    json metrics = json::array();
    for (const auto& e : report.entries) {
        json m;
        m["metric"] = e.metric;
        if (e.value)
            m["value"] = *e.value;
        else
            m["value"] = nullptr;
        m["scale"] = e.scale;
        if (e.p_value) m["p_value"] = *e.p_value;
        m["n_items"] = e.n_items;
        m["oov"] = e.oov;
        if (!e.notes.empty()) m["notes"] = e.notes;
        metrics.push_back(m);
    }
    j["metrics"] = metrics;
    return j.dump(2) + "\n";
}

std::string report_tsv(const EvalReport& report) {
    static const char* kColumns[] = {"weat", "ect", "bat", "km", "svm", "sl", "ws"};
    std::string header = "space\tspec";
    std::string row = report.space_id + "\t" + report.spec_name;
    for (const char* col : kColumns) {
        header += '\t';
        header += col;
        row += '\t';
        const MetricEntry* found = nullptr;
        for (const auto& e : report.entries)
            if (e.metric == col) found = &e;
        if (found && found->value)
            row += format_double(*found->value);
        else
            row += "NA";
    }
    return header + "\n" + row + "\n";
}

} // namespace debie
