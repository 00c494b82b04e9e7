#pragma once
// Machine-readable reporting: JSON bundles of check rows and CSV grids.
//
// Every row carries the stable fields `check`, `status`, `value`, `oracle`,
// `tolerance`, `margin`, `provenance`. Wall-clock data lives exclusively in
// the top-level `generated_at` and `timing` members so that two runs with
// the same configuration and seed produce byte-identical documents once
// those two members are dropped (see deterministic_view).

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bundlecurv/check.hpp"
#include "bundlecurv/errors.hpp"

namespace bundlecurv {

using ordered_json = nlohmann::ordered_json;

struct ReportRow {
    CheckResult result;
    bool report_only = false;  ///< informational rows never fail the run
    std::string inputs;        ///< short digest of the inputs that produced the row
    double wall_ms = 0.0;

    std::string status() const { return report_only ? "REPORT-ONLY" : (result.pass ? "PASS" : "FAIL"); }
};

inline ordered_json row_to_json(const ReportRow& row) {
    ordered_json j;
    j["check"] = row.result.check;
    j["status"] = row.status();
    j["value"] = row.result.value;
    j["oracle"] = row.result.oracle;
    j["tolerance"] = row.result.tolerance;
    j["margin"] = row.result.margin;
    j["provenance"] = row.result.provenance;
    if (!row.result.details.empty()) j["details"] = row.result.details;
    if (!row.inputs.empty()) j["inputs"] = row.inputs;
    return j;
}

/// FNV-1a 64-bit content digest, used to stamp reports with their config.
inline std::string content_digest(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[40];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ReportBundle {
    std::vector<ReportRow> rows;
    std::uint64_t seed = 42;
    int threads = 1;
    std::string config_digest;
    double total_ms = 0.0;

    int pass_count() const {
        int n = 0;
        for (const auto& r : rows) n += (!r.report_only && r.result.pass) ? 1 : 0;
        return n;
    }
    int fail_count() const {
        int n = 0;
        for (const auto& r : rows) n += (!r.report_only && !r.result.pass) ? 1 : 0;
        return n;
    }
    int report_only_count() const {
        int n = 0;
        for (const auto& r : rows) n += r.report_only ? 1 : 0;
        return n;
    }
    /// Exit-code contract: zero iff no FAIL row.
    int exit_code() const { return fail_count() == 0 ? 0 : 1; }

    ordered_json to_json() const {
        ordered_json doc;
        doc["schema"] = "bundlecurv-report-v1";
        doc["seed"] = seed;
        doc["threads"] = threads;
        doc["config_digest"] = config_digest;
        doc["generated_at"] = utc_timestamp();
        ordered_json checks = ordered_json::array();
        for (const auto& r : rows) checks.push_back(row_to_json(r));
        doc["checks"] = std::move(checks);
        doc["summary"] = {{"pass", pass_count()},
                          {"fail", fail_count()},
                          {"report_only", report_only_count()},
                          {"exit_code", exit_code()}};
        ordered_json per;
        for (const auto& r : rows) per[r.result.check] = r.wall_ms;
        doc["timing"] = {{"total_ms", total_ms}, {"per_check_ms", std::move(per)}};
        return doc;
    }
};

/// The document with all wall-clock members removed; byte-identical across
/// reruns of the same configuration and seed.
inline ordered_json deterministic_view(ordered_json doc) {
    doc.erase("generated_at");
    doc.erase("timing");
    return doc;
}

// ---------------------------------------------------------------------------
// CSV grids: one sampled quantity per row, coordinates first.

struct CsvGrid {
    std::vector<std::string> coordinate_columns;
    std::string quantity;
    std::vector<std::pair<std::vector<double>, double>> rows;  ///< coordinates -> value
};

inline std::string csv_to_string(const CsvGrid& grid) {
    std::string out;
    for (const auto& c : grid.coordinate_columns) {
        out += c;
        out += ',';
    }
    out += "quantity,value\n";
    char buf[64];
    for (const auto& [coords, value] : grid.rows) {
        if (coords.size() != grid.coordinate_columns.size())
            throw ShapeMismatch("csv grid: row width does not match the header");
        for (const double c : coords) {
            std::snprintf(buf, sizeof(buf), "%.17g", c);
            out += buf;
            out += ',';
        }
        out += grid.quantity;
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        out += buf;
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << content;
    if (!os) throw ConfigError("failed while writing '" + path + "'");
}

}  // namespace bundlecurv
