#pragma once

// Check-report data model and deterministic JSON serialization. Every
// verification in the suite reduces to entries of the same shape: a named
// residual compared against a tolerance at a probe point.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/errors.hpp"
#include "finsler/point.hpp"

namespace finsler {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

struct CheckEntry {
    std::string name;       // check id, stable across runs
    std::string statement;  // human-readable statement this residual certifies
    BasePoint point;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    Json witness;           // optional structured extras (term values, statuses)
};

inline CheckEntry make_entry(std::string name, std::string ref, const BasePoint& p,
                             double residual, double tolerance) {
    CheckEntry e;
    e.name = std::move(name);
    e.statement = std::move(ref);
    e.point = p;
    e.residual = residual;
    e.tolerance = tolerance;
    e.pass = std::isfinite(residual) && residual <= tolerance;
    return e;
}

// A check that did not run because a prerequisite failed.
inline CheckEntry blocked_entry(std::string name, std::string ref, const BasePoint& p,
                                const std::string& reason) {
    CheckEntry e;
    e.name = std::move(name);
    e.statement = std::move(ref);
    e.point = p;
    e.residual = std::numeric_limits<double>::quiet_NaN();
    e.tolerance = 0.0;
    e.pass = false;
    e.witness = Json{{"status", "blocked"}, {"reason", reason}};
    return e;
}

// A check whose hypothesis does not hold at this input; counts as pass.
inline CheckEntry not_applicable_entry(std::string name, std::string ref, const BasePoint& p,
                                       const std::string& reason) {
    CheckEntry e;
    e.name = std::move(name);
    e.statement = std::move(ref);
    e.point = p;
    e.residual = 0.0;
    e.tolerance = 0.0;
    e.pass = true;
    e.witness = Json{{"status", "not-applicable"}, {"reason", reason}};
    return e;
}

inline Json entry_to_json(const CheckEntry& e) {
    Json j;
    j["name"] = e.name;
    j["statement"] = e.statement;
    j["point"] = Json{{"x", e.point.x}, {"y", e.point.y}};
    if (std::isnan(e.residual))
        j["residual"] = "nan";
    else
        j["residual"] = e.residual;
    j["tolerance"] = e.tolerance;
    j["pass"] = e.pass;
    if (!e.witness.is_null()) j["witness"] = e.witness;
    return j;
}

struct Report {
    Json header;    // tool version, config echo, seed, convention notes
    std::vector<CheckEntry> entries;

    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }

    Json to_json() const {
        Json j;
        j["header"] = header;
        Json arr = Json::array();
        for (const auto& e : entries) arr.push_back(entry_to_json(e));
        j["entries"] = arr;
        j["summary"] = Json{{"total", entries.size()},
                            {"passed", count_passed()},
                            {"all_pass", all_pass()}};
        return j;
    }

    std::size_t count_passed() const {
        std::size_t n = 0;
        for (const auto& e : entries) n += e.pass ? 1 : 0;
        return n;
    }
};

// Atomic write: serialize to a sibling temp file, then rename into place.
inline void write_report(const Report& r, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open output path: " + tmp);
        out << r.to_json().dump(2) << "\n";
        if (!out) throw ConfigError("failed writing report to: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace finsler
