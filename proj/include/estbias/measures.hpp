#pragma once

// Estimation records and the seven bias measures.
//
// Sign convention throughout: positive bias means the actual effort exceeded
// the estimate (under-estimation / overrun).

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "estbias/errors.hpp"

namespace estbias {

/// What an estimate is meant to represent.
enum class EstimateType { Mean, Median, Mode, Unknown };

enum class Aggregation { Mean, Median };

/// Per-record score applied before aggregation.
enum class ScoreForm {
    Deviation,      // act - est
    RelToActual,    // (act - est) / act, in (-inf, 1)
    RelToEstimate,  // (act - est) / est, in (-1, inf)
    LogRatio,       // ln(act) - ln(est)
};

enum class BiasMeasure { MeanDev, MeanReAct, MeanReEst, MedianDev, MedianReAct, MedianReEst, MdLogErr };

/// Statistical functional of the effort distribution for which a measure has
/// zero expected bias.
enum class Functional { Mean, Median, HarmonicPoint, None };

inline constexpr std::array<BiasMeasure, 7> kAllMeasures = {
    BiasMeasure::MeanDev,   BiasMeasure::MeanReAct,   BiasMeasure::MeanReEst, BiasMeasure::MedianDev,
    BiasMeasure::MedianReAct, BiasMeasure::MedianReEst, BiasMeasure::MdLogErr,
};

constexpr Aggregation aggregation_of(BiasMeasure m) noexcept {
    switch (m) {
        case BiasMeasure::MeanDev:
        case BiasMeasure::MeanReAct:
        case BiasMeasure::MeanReEst:
            return Aggregation::Mean;
        default:
            return Aggregation::Median;
    }
}

constexpr ScoreForm score_form_of(BiasMeasure m) noexcept {
    switch (m) {
        case BiasMeasure::MeanDev:
        case BiasMeasure::MedianDev:
            return ScoreForm::Deviation;
        case BiasMeasure::MeanReAct:
        case BiasMeasure::MedianReAct:
            return ScoreForm::RelToActual;
        case BiasMeasure::MeanReEst:
        case BiasMeasure::MedianReEst:
            return ScoreForm::RelToEstimate;
        case BiasMeasure::MdLogErr:
            return ScoreForm::LogRatio;
    }
    return ScoreForm::Deviation;
}

/// The static match table: which functional each measure rewards.
constexpr Functional matching_functional(BiasMeasure m) noexcept {
    switch (m) {
        case BiasMeasure::MeanDev:
        case BiasMeasure::MeanReEst:
            return Functional::Mean;
        case BiasMeasure::MeanReAct:
            return Functional::HarmonicPoint;
        default:
            return Functional::Median;
    }
}

constexpr std::string_view to_string(BiasMeasure m) noexcept {
    switch (m) {
        case BiasMeasure::MeanDev: return "MeanDev";
        case BiasMeasure::MeanReAct: return "MeanReAct";
        case BiasMeasure::MeanReEst: return "MeanReEst";
        case BiasMeasure::MedianDev: return "MedianDev";
        case BiasMeasure::MedianReAct: return "MedianReAct";
        case BiasMeasure::MedianReEst: return "MedianReEst";
        case BiasMeasure::MdLogErr: return "MdLogErr";
    }
    return "?";
}

constexpr std::string_view to_string(EstimateType t) noexcept {
    switch (t) {
        case EstimateType::Mean: return "mean";
        case EstimateType::Median: return "median";
        case EstimateType::Mode: return "mode";
        case EstimateType::Unknown: return "unknown";
    }
    return "?";
}

constexpr std::string_view to_string(Functional f) noexcept {
    switch (f) {
        case Functional::Mean: return "Mean";
        case Functional::Median: return "Median";
        case Functional::HarmonicPoint: return "HarmonicPoint";
        case Functional::None: return "None";
    }
    return "?";
}

constexpr std::string_view to_string(ScoreForm f) noexcept {
    switch (f) {
        case ScoreForm::Deviation: return "Deviation";
        case ScoreForm::RelToActual: return "RelToActual";
        case ScoreForm::RelToEstimate: return "RelToEstimate";
        case ScoreForm::LogRatio: return "LogRatio";
    }
    return "?";
}

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

}  // namespace detail

/// Case-insensitive lookup by measure name.
inline std::optional<BiasMeasure> parse_measure(std::string_view name) {
    for (auto m : kAllMeasures) {
        if (detail::iequals(name, to_string(m))) return m;
    }
    return std::nullopt;
}

inline std::optional<EstimateType> parse_estimate_type(std::string_view name) {
    for (auto t : {EstimateType::Mean, EstimateType::Median, EstimateType::Mode, EstimateType::Unknown}) {
        if (detail::iequals(name, to_string(t))) return t;
    }
    if (name.empty()) return EstimateType::Unknown;
    return std::nullopt;
}

/// One (estimated, actual) observation in work-hours.
struct EstimationRecord {
    std::string id;
    double estimated = 0.0;
    double actual = 0.0;
    EstimateType estimate_type = EstimateType::Unknown;
};

inline bool is_valid(const EstimationRecord& r) noexcept {
    return std::isfinite(r.estimated) && std::isfinite(r.actual) && r.estimated > 0.0 && r.actual > 0.0;
}

/// Throws DomainError naming the record when either effort is not a finite
/// positive number.
inline void validate(const EstimationRecord& r) {
    if (!is_valid(r)) {
        throw DomainError("record '" + r.id + "': estimated and actual effort must be finite and > 0 (estimated=" +
                          std::to_string(r.estimated) + ", actual=" + std::to_string(r.actual) + ")");
    }
}

/// Unchecked score of a single (estimate, actual) pair.
inline double score(double estimated, double actual, ScoreForm form) noexcept {
    switch (form) {
        case ScoreForm::Deviation: return actual - estimated;
        case ScoreForm::RelToActual: return (actual - estimated) / actual;
        case ScoreForm::RelToEstimate: return (actual - estimated) / estimated;
        // Difference of logs, not log of the quotient: swapping the pair then
        // negates the score exactly.
        case ScoreForm::LogRatio: return std::log(actual) - std::log(estimated);
    }
    return 0.0;
}

inline double per_record_score(const EstimationRecord& r, ScoreForm form) {
    validate(r);
    return score(r.estimated, r.actual, form);
}

/// Arithmetic mean, summed left to right.
inline double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean of an empty sequence");
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

/// Sample median; even sizes take the midpoint of the two central order
/// statistics.
inline double median_of(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("median of an empty sequence");
    const auto n = xs.size();
    const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(xs.begin(), mid, xs.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(xs.begin(), mid);
    return (lower + upper) / 2.0;
}

inline double aggregate(std::vector<double> scores, Aggregation how) {
    return how == Aggregation::Mean ? mean_of(scores) : median_of(std::move(scores));
}

/// Bias of a dataset under one measure. Any invalid record aborts the whole
/// computation.
inline double compute_bias(std::span<const EstimationRecord> records, BiasMeasure measure) {
    if (records.empty()) throw DomainError("compute_bias: no records");
    const auto form = score_form_of(measure);
    std::vector<double> scores;
    scores.reserve(records.size());
    for (const auto& r : records) scores.push_back(per_record_score(r, form));
    return aggregate(std::move(scores), aggregation_of(measure));
}

struct BiasReport {
    std::size_t n = 0;
    std::map<BiasMeasure, double> values;
    std::map<BiasMeasure, Functional> match_notes;
};

inline BiasReport bias_suite(std::span<const EstimationRecord> records, std::span<const BiasMeasure> measures) {
    if (measures.empty()) throw DomainError("bias_suite: no measures requested");
    if (records.empty()) throw DomainError("bias_suite: no records");
    BiasReport report;
    report.n = records.size();
    for (auto m : measures) {
        if (report.values.contains(m)) continue;
        report.values.emplace(m, compute_bias(records, m));
        report.match_notes.emplace(m, matching_functional(m));
    }
    return report;
}

}  // namespace estbias
