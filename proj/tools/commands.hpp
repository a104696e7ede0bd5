#pragma once

// Subcommand implementations for the estbias CLI. Each command returns a
// report envelope plus a CSV rendering; main() only parses flags and prints.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "estbias/estbias.hpp"
#include "estbias/report.hpp"

namespace estbias::cli {

enum class Format { Json, Csv };

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kComputeFailure = 1;
inline constexpr int kUsageError = 2;

struct CommandOutput {
    Json envelope;
    std::string csv;
    std::vector<std::string> warnings;

    std::string render(Format f) const { return f == Format::Json ? envelope.dump(2) + "\n" : csv; }
};

// ---------------------------------------------------------------------------
// Helpers

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out = "sha256:";
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Digest of the bytes a command reads: the file for empirical specs and
/// datasets, the spec text otherwise.
inline std::string spec_digest(std::string_view spec) {
    const auto t = text::trim(spec);
    constexpr std::string_view prefix = "empirical:";
    if (t.starts_with(prefix)) return sha256_hex(read_file(std::string(t.substr(prefix.size()))));
    return sha256_hex(t);
}

inline Json make_envelope(std::string_view command, std::string input_digest, Json config, Json payload) {
    return Json{{"tool", std::string(kToolName)},
                {"version", std::string(kVersion)},
                {"command", std::string(command)},
                {"input_digest", std::move(input_digest)},
                {"config", std::move(config)},
                {"payload", std::move(payload)}};
}

/// "all" or a comma-separated list of measure names.
inline std::vector<BiasMeasure> parse_measures(std::string_view list) {
    if (text::trim(list).empty() || detail::iequals(text::trim(list), "all")) {
        return {kAllMeasures.begin(), kAllMeasures.end()};
    }
    std::vector<BiasMeasure> out;
    for (auto tok : text::split(list, ',')) {
        const auto m = parse_measure(text::trim(tok));
        if (!m) throw ParseError("unknown measure '" + std::string(text::trim(tok)) + "'");
        out.push_back(*m);
    }
    return out;
}

inline BiasMeasure parse_single_measure(std::string_view name) {
    const auto ms = parse_measures(name);
    if (ms.size() != 1) throw ParseError("expected exactly one measure, got '" + std::string(name) + "'");
    return ms.front();
}

inline Json measure_names(const std::vector<BiasMeasure>& ms) {
    Json out = Json::array();
    for (auto m : ms) out.push_back(std::string(to_string(m)));
    return out;
}

/// Grid grammar: `lo..hi` (step 1), `lo..hi:step`, `lo..hi/count`, or a
/// comma-separated list of values.
inline std::vector<double> parse_grid(std::string_view spec) {
    spec = text::trim(spec);
    const auto dots = spec.find("..");
    if (dots == std::string_view::npos) {
        std::vector<double> out;
        for (auto tok : text::split(spec, ',')) {
            const auto v = text::parse_double(tok);
            if (!v) throw ParseError("bad grid value '" + std::string(tok) + "'");
            out.push_back(*v);
        }
        return out;
    }
    const auto lo = text::parse_double(spec.substr(0, dots));
    auto rest = spec.substr(dots + 2);
    const auto sep = rest.find_first_of(":/");
    const auto hi = text::parse_double(rest.substr(0, sep));
    if (!lo || !hi || !(*hi >= *lo)) throw ParseError("bad grid range '" + std::string(spec) + "'");
    if (sep != std::string_view::npos && rest[sep] == '/') {
        const auto count = text::parse_double(rest.substr(sep + 1));
        if (!count || *count < 1 || *count != static_cast<double>(static_cast<std::size_t>(*count))) {
            throw ParseError("bad grid count in '" + std::string(spec) + "'");
        }
        return linear_grid(*lo, *hi, static_cast<std::size_t>(*count));
    }
    double step = 1.0;
    if (sep != std::string_view::npos) {
        const auto s = text::parse_double(rest.substr(sep + 1));
        if (!s || !(*s > 0.0)) throw ParseError("bad grid step in '" + std::string(spec) + "'");
        step = *s;
    }
    const auto count = static_cast<std::size_t>(std::floor((*hi - *lo) / step + 1e-9)) + 1;
    if (count > 1'000'000) throw ParseError("grid too large");
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(*lo + step * static_cast<double>(i));
    return out;
}

/// Advisory note when a measure does not match the declared estimate type.
inline std::optional<std::string> mismatch_warning(EstimateType type, BiasMeasure m) {
    const auto f = matching_functional(m);
    const std::string name(to_string(m));
    switch (type) {
        case EstimateType::Mean:
            if (f == Functional::Mean) return std::nullopt;
            if (m == BiasMeasure::MeanReAct) {
                return name + " on mean estimates: measure rewards under-estimates of the mean; perfect mean estimates "
                              "score about -Var/mean^2 (apparent over-estimation)";
            }
            return name + " on mean estimates: median-based measure; for right-skewed effort perfect mean estimates "
                          "score negative (apparent over-estimation)";
        case EstimateType::Median:
            if (f == Functional::Median) return std::nullopt;
            if (m == BiasMeasure::MeanReAct) {
                return name + " on median estimates: zero bias sits at the harmonic point; for right-skewed effort "
                              "perfect median estimates score negative (apparent over-estimation)";
            }
            return name + " on median estimates: mean-based measure; for right-skewed effort perfect median estimates "
                          "score positive (apparent under-estimation)";
        case EstimateType::Mode:
            return name + " on mode estimates: no practical bias measure matches most-likely estimates; "
                          "use percentile calibration (estbias calibrate)";
        case EstimateType::Unknown:
            return std::nullopt;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    std::string path;
    std::string measures = "all";
    bool skip_invalid = false;
};

inline CommandOutput cmd_evaluate(const EvaluateOptions& opt) {
    const auto bytes = read_file(opt.path);
    std::istringstream in(bytes);
    const auto ds = parse_dataset(in, opt.path, opt.skip_invalid ? InvalidRows::Skip : InvalidRows::Reject);
    const auto measures = parse_measures(opt.measures);

    CommandOutput out;
    out.warnings = ds.warnings;
    const auto overall = bias_suite(ds.records, measures);
    Json payload{{"report", to_json(overall)}, {"skipped", ds.skipped}};
    out.csv = std::string(kBiasReportCsvHeader) + bias_report_csv(overall);

    Json by_type = Json::object();
    if (ds.has_types()) {
        for (auto type : {EstimateType::Mean, EstimateType::Median, EstimateType::Mode, EstimateType::Unknown}) {
            std::vector<EstimationRecord> group;
            for (const auto& r : ds.records) {
                if (r.estimate_type == type) group.push_back(r);
            }
            if (group.empty()) continue;
            const auto report = bias_suite(group, measures);
            by_type[std::string(to_string(type))] = to_json(report);
            out.csv += bias_report_csv(report, to_string(type));
            for (auto m : measures) {
                if (auto w = mismatch_warning(type, m)) out.warnings.push_back(*w);
            }
        }
    }
    payload["by_type"] = by_type;
    if (ds.skipped > 0) out.warnings.push_back("skipped " + std::to_string(ds.skipped) + " invalid row(s)");
    payload["warnings"] = out.warnings;

    Json config{{"measures", measure_names(measures)}, {"skip_invalid", opt.skip_invalid}};
    out.envelope = make_envelope("evaluate", sha256_hex(bytes), std::move(config), std::move(payload));
    return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    std::string dist;
    std::string estimates = "mean";
    std::string measure = "MeanReAct";
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Closed-form expected bias: expectation for mean aggregation, the score at
/// the median actual for median aggregation (scores are monotone in actual).
inline double analytic_expected_bias(const AnyDistribution& d, double estimate, BiasMeasure m) {
    switch (m) {
        case BiasMeasure::MeanDev: return d.mean() - estimate;
        case BiasMeasure::MeanReEst: return d.mean() / estimate - 1.0;
        case BiasMeasure::MeanReAct: return 1.0 - estimate * d.reciprocal_mean();
        default: return score(estimate, d.median(), score_form_of(m));
    }
}

inline double resolve_estimate(const AnyDistribution& d, std::string_view token) {
    token = text::trim(token);
    if (token == "mean") return d.mean();
    if (token == "median") return d.median();
    if (token == "mode") return d.mode();
    if (token == "harmonic") return harmonic_point(d);
    const auto v = text::parse_double(token);
    if (!v) throw ParseError("bad estimate '" + std::string(token) + "' (number, mean, median, mode or harmonic)");
    if (!(*v > 0.0)) throw DomainError("estimate must be > 0");
    return *v;
}

inline CommandOutput cmd_simulate(const SimulateOptions& opt) {
    const auto dist = parse_distribution_spec(opt.dist);
    const auto measure = parse_single_measure(opt.measure);
    const SimulationConfig cfg{opt.n, opt.seed, 4096, opt.threads};
    const bool exact = has_exact_path(dist);

    std::vector<std::pair<std::string, double>> estimates;
    for (auto tok : text::split(opt.estimates, ',')) estimates.emplace_back(std::string(text::trim(tok)), resolve_estimate(dist, tok));

    std::vector<double> draws;
    if (!exact) draws = draw_actuals(dist, cfg);

    CommandOutput out;
    out.csv = "label,estimate,expected_bias,std_error,analytic\n";
    Json rows = Json::array();
    for (const auto& [label, e] : estimates) {
        const auto p = exact ? expected_bias(dist, e, measure, cfg) : evaluate_on_draws(draws, e, measure);
        const double analytic = analytic_expected_bias(dist, e, measure);
        Json row = to_json(p);
        row["label"] = label;
        row["analytic"] = analytic;
        rows.push_back(std::move(row));
        out.csv += label + "," + format_number(e) + "," + format_number(p.expected_bias) + "," +
                   (p.std_error ? format_number(*p.std_error) : std::string()) + "," + format_number(analytic) + "\n";
    }

    Json payload{{"distribution", distribution_summary(dist)},
                 {"measure", std::string(to_string(measure))},
                 {"method", exact ? "exact" : "monte_carlo"},
                 {"rows", std::move(rows)}};
    if (!exact) payload["draws_checksum"] = draws_checksum(draws);
    Json config{{"dist", opt.dist}, {"estimate", opt.estimates}, {"measure", std::string(to_string(measure))}, {"n", opt.n}, {"seed", opt.seed}};
    out.envelope = make_envelope("simulate", spec_digest(opt.dist), std::move(config), std::move(payload));
    return out;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
    std::string dist;
    std::string measure = "MeanReAct";
    /// analytic: closed-form statistic; search: bracketing root-finding on the
    /// expected-bias curve.
    std::string method = "analytic";
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

inline CommandOutput cmd_solve(const SolveOptions& opt) {
    const auto dist = parse_distribution_spec(opt.dist);
    const auto measure = parse_single_measure(opt.measure);
    if (opt.method != "analytic" && opt.method != "search") throw ParseError("method must be 'analytic' or 'search'");
    const bool search = opt.method == "search";
    const SimulationConfig cfg{opt.n, opt.seed, 4096, opt.threads};
    const double e = search ? zero_bias_estimate_by_search(dist, measure, cfg) : zero_bias_estimate(dist, measure);

    CommandOutput out;
    Json payload{{"measure", std::string(to_string(measure))},
                 {"estimate", e},
                 {"functional", std::string(to_string(matching_functional(measure)))},
                 {"method", opt.method},
                 {"distribution", distribution_summary(dist)}};
    out.csv = "measure,estimate,functional,method\n" + std::string(to_string(measure)) + "," + format_number(e) + "," +
              std::string(to_string(matching_functional(measure))) + "," + opt.method + "\n";
    Json config{{"dist", opt.dist}, {"measure", std::string(to_string(measure))}, {"method", opt.method}};
    if (search) {
        config["n"] = opt.n;
        config["seed"] = opt.seed;
    }
    out.envelope = make_envelope("solve", spec_digest(opt.dist), std::move(config), std::move(payload));
    return out;
}

// ---------------------------------------------------------------------------
// elicit

struct ElicitOptions {
    std::string dist;
    std::string measure = "MeanReAct";
    std::string grid;  // empty: 200 points from mode/2 to 2 * mean
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

inline CommandOutput cmd_elicit(const ElicitOptions& opt) {
    const auto dist = parse_distribution_spec(opt.dist);
    const auto measure = parse_single_measure(opt.measure);
    const SimulationConfig cfg{opt.n, opt.seed, 4096, opt.threads};
    const auto grid = opt.grid.empty() ? linear_grid(dist.mode() / 2.0, 2.0 * dist.mean(), 200) : parse_grid(opt.grid);

    const auto result = elicitation_scan(dist, measure, grid, cfg);
    const auto curve = expected_bias_curve(dist, grid, measure, cfg);

    CommandOutput out;
    Json points = Json::array();
    for (const auto& p : curve) points.push_back(to_json(p));
    Json payload{{"result", to_json(result)}, {"curve", std::move(points)}, {"distribution", distribution_summary(dist)}};
    out.csv = curve_csv(curve);
    Json config{{"dist", opt.dist},
                {"measure", std::string(to_string(measure))},
                {"grid", opt.grid.empty() ? "default" : opt.grid},
                {"n", opt.n},
                {"seed", opt.seed}};
    out.envelope = make_envelope("elicit", spec_digest(opt.dist), std::move(config), std::move(payload));
    return out;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
    std::string path;
    std::optional<double> target;
    bool skip_invalid = false;
};

inline CommandOutput cmd_calibrate(const CalibrateOptions& opt) {
    const auto bytes = read_file(opt.path);
    std::istringstream in(bytes);
    const auto ds = parse_dataset(in, opt.path, opt.skip_invalid ? InvalidRows::Skip : InvalidRows::Reject);
    const auto report = percentile_hit_rate(ds.records, opt.target);

    CommandOutput out;
    out.warnings = ds.warnings;
    if (ds.skipped > 0) out.warnings.push_back("skipped " + std::to_string(ds.skipped) + " invalid row(s)");
    Json payload{{"report", to_json(report)}, {"skipped", ds.skipped}, {"warnings", out.warnings}};
    out.csv = hit_rate_csv(report);
    Json config{{"target", optional_number(opt.target)}, {"skip_invalid", opt.skip_invalid}};
    out.envelope = make_envelope("calibrate", sha256_hex(bytes), std::move(config), std::move(payload));
    return out;
}

// ---------------------------------------------------------------------------
// dice

inline std::string rational_text(const Rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// The two-dice example: exact statistics, every measure under each of the
/// three point estimates, and the RE_act-optimal estimate.
inline CommandOutput cmd_dice() {
    const DiceProduct dice;
    const SimulationConfig cfg{};

    CommandOutput out;
    out.csv = "label,estimate";
    for (auto m : kAllMeasures) out.csv += "," + std::string(to_string(m));
    out.csv += "\n";

    Json rows = Json::array();
    for (const auto& [label, e] : {std::pair{"mode", dice.mode()}, std::pair{"median", dice.median()}, std::pair{"mean", dice.mean()}}) {
        Json values = Json::object();
        out.csv += std::string(label) + "," + format_number(e);
        for (auto m : kAllMeasures) {
            const double v = exact_expected_bias(dice, e, m);
            values[std::string(to_string(m))] = v;
            out.csv += "," + format_number(v);
        }
        out.csv += "\n";
        rows.push_back(Json{{"label", label}, {"estimate", e}, {"expected_bias", std::move(values)}});
    }

    std::vector<double> grid;
    for (int v = 1; v <= 36; ++v) grid.push_back(v);
    const auto elicited = elicitation_scan(dice, BiasMeasure::MeanReAct, grid, cfg);
    const Rational optimum = 1 / dice.reciprocal_mean_exact();

    Json atoms = Json::array();
    for (const auto& a : dice.atoms()) atoms.push_back(Json{{"outcome", a.outcome}, {"probability", rational_text(a.probability)}});

    Json payload{{"distribution",
                  {{"mean", dice.mean()},
                   {"mean_exact", rational_text(dice.mean_exact())},
                   {"median", dice.median()},
                   {"mode", dice.mode()},
                   {"variance_exact", rational_text(dice.variance_exact())},
                   {"reciprocal_mean_exact", rational_text(dice.reciprocal_mean_exact())},
                   {"atoms", std::move(atoms)}}},
                 {"rows", std::move(rows)},
                 {"re_act_optimum",
                  {{"integer_grid", elicited.grid_optimum},
                   {"continuous", boost::rational_cast<double>(optimum)},
                   {"continuous_exact", rational_text(optimum)},
                   {"matched_functional", std::string(to_string(elicited.matched_functional))}}}};
    out.envelope = make_envelope("dice", sha256_hex("dice"), Json::object(), std::move(payload));
    return out;
}

}  // namespace estbias::cli
