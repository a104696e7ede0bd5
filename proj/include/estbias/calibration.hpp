#pragma once

// Percentile calibration: how often the actual effort stays at or below the
// estimate. The only practical check available for most-likely (mode)
// estimates is the hit rate against the percentile the estimate is believed
// to sit at.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

#include "estbias/distributions.hpp"
#include "estbias/errors.hpp"
#include "estbias/measures.hpp"

namespace estbias {

struct HitRateReport {
    std::size_t n = 0;
    std::size_t hits = 0;    // actual <= estimated
    std::size_t misses = 0;  // actual > estimated
    double hit_rate = 0.0;
    std::optional<double> target_percentile;
    std::optional<double> deviation;       // hit_rate - target
    std::optional<double> std_error;       // sqrt(p(1-p)/n), p = target
    std::optional<double> binomial_band;   // 95% half-width, 1.96 * std_error
};

inline double strict_miss_rate(const HitRateReport& r) noexcept {
    return static_cast<double>(r.misses) / static_cast<double>(r.n);
}

/// Ties (actual == estimated) count as hits.
inline HitRateReport percentile_hit_rate(std::span<const EstimationRecord> records,
                                         std::optional<double> target_percentile = std::nullopt) {
    if (records.empty()) throw DomainError("percentile_hit_rate: no records");
    if (target_percentile && !(*target_percentile > 0.0 && *target_percentile < 1.0)) {
        throw DomainError("target percentile must lie strictly between 0 and 1");
    }
    HitRateReport r;
    r.n = records.size();
    for (const auto& rec : records) {
        validate(rec);
        if (rec.actual <= rec.estimated) ++r.hits;
        else ++r.misses;
    }
    r.hit_rate = static_cast<double>(r.hits) / static_cast<double>(r.n);
    if (target_percentile) {
        const double p = *target_percentile;
        r.target_percentile = p;
        r.deviation = r.hit_rate - p;
        r.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(r.n));
        r.binomial_band = 1.96 * *r.std_error;
    }
    return r;
}

/// Smallest x (to rel_tol) with cdf(x) >= p, by geometric bracketing from the
/// median followed by bisection.
template <EffortDistribution D>
double invert_cdf(const D& dist, double p, double rel_tol = 1e-9) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("invert_cdf: p must lie strictly between 0 and 1");
    double lo = dist.median();
    double hi = lo;
    for (int k = 0; k < 200 && dist.cdf(lo) >= p; ++k) lo /= 2.0;
    for (int k = 0; k < 200 && dist.cdf(hi) < p; ++k) hi *= 2.0;
    if (dist.cdf(lo) >= p || dist.cdf(hi) < p) throw SolverError("invert_cdf: could not bracket the quantile");
    while (hi - lo > rel_tol * hi) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        if (dist.cdf(mid) < p) lo = mid;
        else hi = mid;
    }
    return hi;
}

}  // namespace estbias
