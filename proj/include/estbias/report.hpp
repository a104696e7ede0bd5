#pragma once

// JSON and CSV renderings of results. JSON objects are key-sorted
// (nlohmann::json's default map), so equal results dump to equal bytes.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "estbias/analysis.hpp"
#include "estbias/calibration.hpp"
#include "estbias/measures.hpp"
#include "estbias/simulation.hpp"

namespace estbias {

inline constexpr std::string_view kToolName = "estbias";
inline constexpr std::string_view kVersion = "0.1.0";

using Json = nlohmann::json;

/// Shortest text that round-trips the double.
inline std::string format_number(double x) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

inline Json to_json(const BiasReport& r) {
    Json values = Json::object();
    Json notes = Json::object();
    for (const auto& [m, v] : r.values) values[std::string(to_string(m))] = v;
    for (const auto& [m, f] : r.match_notes) notes[std::string(to_string(m))] = std::string(to_string(f));
    return Json{{"n", r.n}, {"values", values}, {"match_notes", notes}};
}

inline Json to_json(const HitRateReport& r) {
    return Json{{"label", "percentile calibration"},
                {"n", r.n},
                {"hits", r.hits},
                {"misses", r.misses},
                {"hit_rate", r.hit_rate},
                {"target_percentile", optional_number(r.target_percentile)},
                {"deviation", optional_number(r.deviation)},
                {"std_error", optional_number(r.std_error)},
                {"binomial_band", optional_number(r.binomial_band)}};
}

inline Json to_json(const BiasCurvePoint& p) {
    return Json{{"estimate", p.estimate}, {"expected_bias", p.expected_bias}, {"std_error", optional_number(p.std_error)}};
}

inline Json to_json(const ElicitationResult& r) {
    return Json{{"measure", std::string(to_string(r.measure))},
                {"grid_optimum", r.grid_optimum},
                {"grid_min_abs_bias", r.grid_min_abs_bias},
                {"optimal_estimate", r.optimal_estimate},
                {"min_abs_bias", r.min_abs_bias},
                {"matched_functional", std::string(to_string(r.matched_functional))},
                {"method", std::string(to_string(r.method))}};
}

inline Json skewed_rows_to_json(std::span<const SkewedEffortRow> rows) {
    Json out = Json::array();
    for (const auto& r : rows) {
        out.push_back(Json{{"label", r.label},
                           {"estimate", r.estimate},
                           {"expected_bias", r.expected_bias},
                           {"std_error", r.std_error},
                           {"analytic", r.analytic}});
    }
    return out;
}

/// Summary statistics of a distribution, for echoing in reports.
template <EffortDistribution D>
Json distribution_summary(const D& d) {
    return Json{{"mean", d.mean()},
                {"median", d.median()},
                {"mode", d.mode()},
                {"variance", d.variance()},
                {"reciprocal_mean", d.reciprocal_mean()},
                {"harmonic_point", harmonic_point(d)}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string bias_report_csv(const BiasReport& r, std::string_view group = "all") {
    std::string out;
    for (const auto& [m, v] : r.values) {
        out += std::string(group) + "," + std::string(to_string(m)) + "," + format_number(v) + "," +
               std::string(to_string(r.match_notes.at(m))) + "," + std::to_string(r.n) + "\n";
    }
    return out;
}

inline constexpr std::string_view kBiasReportCsvHeader = "group,measure,value,matches,n\n";

inline std::string curve_csv(std::span<const BiasCurvePoint> points) {
    std::string out = "estimate,expected_bias,std_error\n";
    for (const auto& p : points) {
        out += format_number(p.estimate) + "," + format_number(p.expected_bias) + "," +
               (p.std_error ? format_number(*p.std_error) : std::string()) + "\n";
    }
    return out;
}

inline std::string hit_rate_csv(const HitRateReport& r) {
    auto opt = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
    return "n,hits,misses,hit_rate,target_percentile,deviation,std_error,binomial_band\n" + std::to_string(r.n) + "," +
           std::to_string(r.hits) + "," + std::to_string(r.misses) + "," + format_number(r.hit_rate) + "," +
           opt(r.target_percentile) + "," + opt(r.deviation) + "," + opt(r.std_error) + "," + opt(r.binomial_band) + "\n";
}

}  // namespace estbias
