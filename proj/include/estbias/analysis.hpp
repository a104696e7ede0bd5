#pragma once

// Closed-form results and solvers: the ratio-expectation approximation, the
// RE_act bias of a perfect mean estimate, zero-bias estimates, functional
// elicitation scans and the PERT three-point mean.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "estbias/distributions.hpp"
#include "estbias/errors.hpp"
#include "estbias/measures.hpp"
#include "estbias/simulation.hpp"

namespace estbias {

struct RatioMoments {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;
};

/// Second-order approximation
///   E[X/Y] ~ mu_x/mu_y - Cov(X,Y)/mu_y^2 + Var(Y) mu_x / mu_y^3.
inline double ratio_expectation_approx(const RatioMoments& m) {
    if (m.mu_y == 0.0) throw DomainError("ratio_expectation_approx: mu_y must be non-zero");
    if (m.var_y < 0.0) throw DomainError("ratio_expectation_approx: var_y must be >= 0");
    const double my2 = m.mu_y * m.mu_y;
    return m.mu_x / m.mu_y - m.cov_xy / my2 + m.var_y * m.mu_x / (my2 * m.mu_y);
}

struct ReActBias {
    double approx = 0.0;  // -Var/mean^2
    double exact = 0.0;   // 1 - mean * E[1/X]
};

/// Expected mean RE_act when every estimate equals the true mean. Negative:
/// a perfect mean estimate is scored as an over-estimate.
template <EffortDistribution D>
ReActBias re_act_bias_of_mean_estimate(const D& dist) {
    const double mu = dist.mean();
    // X is the constant estimate, so Cov(X, Y) = 0.
    const double ratio = ratio_expectation_approx({mu, mu, dist.variance(), 0.0});
    return {1.0 - ratio, 1.0 - mu * dist.reciprocal_mean()};
}

// ---------------------------------------------------------------------------
// Root finding

/// Bisection on a decreasing-or-increasing bracket [lo, hi] with a sign change.
/// Stops when the bracket is narrower than rel_tol * hi or cannot shrink.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
    double f_lo = f(lo);
    if (f_lo == 0.0) return lo;
    if (f(hi) == 0.0) return hi;
    for (int iter = 0; iter < 2000 && hi - lo > rel_tol * hi; ++iter) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return lo + (hi - lo) / 2.0;
}

/// Geometric scan outward from `start` (factors of 2) for a sign change of f,
/// then bisection. Throws SolverError carrying the scanned interval.
inline double find_root_from(const std::function<double(double)>& f, double start, double rel_tol) {
    const double f0 = f(start);
    if (f0 == 0.0) return start;
    double lo = start;
    double hi = start;
    double prev_lo = start;
    double prev_hi = start;
    for (int k = 0; k < 60; ++k) {
        prev_lo = lo;
        prev_hi = hi;
        lo /= 2.0;
        hi *= 2.0;
        const double f_hi = f(hi);
        if (f_hi == 0.0) return hi;
        if ((f_hi > 0.0) != (f0 > 0.0)) return bisect(f, prev_hi, hi, rel_tol);
        const double f_lo = f(lo);
        if (f_lo == 0.0) return lo;
        if ((f_lo > 0.0) != (f0 > 0.0)) return bisect(f, lo, prev_lo, rel_tol);
    }
    std::ostringstream msg;
    msg << "no sign change of the expected bias found in [" << lo << ", " << hi << "]";
    throw SolverError(msg.str());
}

inline constexpr double kSimulatedRootTol = 1e-6;
inline constexpr double kExactRootTol = 1e-12;

/// Zero-bias estimate by root-finding on the expected-bias curve (exact for
/// dice, common-random-number simulation otherwise).
template <SampleableEffort D>
double zero_bias_estimate_by_search(const D& dist, BiasMeasure measure, const SimulationConfig& cfg) {
    if (has_exact_path(dist)) {
        return find_root_from([&](double e) { return expected_bias(dist, e, measure, cfg).expected_bias; },
                              dist.median(), kExactRootTol);
    }
    const auto draws = draw_actuals(dist, cfg);
    return find_root_from([&](double e) { return evaluate_on_draws(draws, e, measure).expected_bias; },
                          dist.median(), kSimulatedRootTol);
}

/// The estimate with zero expected bias. Analytic whenever the matching
/// statistic is available: mean for MeanDev/MeanReEst, median for the median
/// measures, 1/E[1/X] for MeanReAct. Falls back to root-finding otherwise.
template <SampleableEffort D>
double zero_bias_estimate(const D& dist, BiasMeasure measure, const SimulationConfig& cfg = {}) {
    switch (matching_functional(measure)) {
        case Functional::Mean: return dist.mean();
        case Functional::Median: return dist.median();
        case Functional::HarmonicPoint:
            if constexpr (requires { dist.reciprocal_mean(); }) return 1.0 / dist.reciprocal_mean();
            else return zero_bias_estimate_by_search(dist, measure, cfg);
        case Functional::None: break;
    }
    return zero_bias_estimate_by_search(dist, measure, cfg);
}

// ---------------------------------------------------------------------------
// Functional elicitation

enum class ElicitationMethod { Exact, RootFind, GridScan };

constexpr std::string_view to_string(ElicitationMethod m) noexcept {
    switch (m) {
        case ElicitationMethod::Exact: return "Exact";
        case ElicitationMethod::RootFind: return "RootFind";
        case ElicitationMethod::GridScan: return "GridScan";
    }
    return "?";
}

inline constexpr double kDefaultMatchTolerance = 0.01;

struct ElicitationResult {
    BiasMeasure measure = BiasMeasure::MeanDev;
    /// Grid point with the smallest |expected bias|.
    double grid_optimum = 0.0;
    double grid_min_abs_bias = 0.0;
    /// grid_optimum refined by bisection when the curve crosses zero.
    double optimal_estimate = 0.0;
    double min_abs_bias = 0.0;
    Functional matched_functional = Functional::None;
    ElicitationMethod method = ElicitationMethod::GridScan;
};

/// Closest of mean / median / harmonic point within `rel_tol` of `estimate`.
template <SampleableEffort D>
Functional match_functional(const D& dist, double estimate, double rel_tol = kDefaultMatchTolerance) {
    Functional best = Functional::None;
    double best_dist = std::numeric_limits<double>::infinity();
    auto consider = [&](Functional f, double value) {
        const double d = std::abs(estimate - value) / std::abs(value);
        if (d <= rel_tol && d < best_dist) {
            best = f;
            best_dist = d;
        }
    };
    consider(Functional::Mean, dist.mean());
    consider(Functional::Median, dist.median());
    if constexpr (requires { dist.reciprocal_mean(); }) consider(Functional::HarmonicPoint, 1.0 / dist.reciprocal_mean());
    return best;
}

/// Which estimate does `measure` reward for this distribution? Scans the
/// grid, refines across a zero crossing, and names the matching functional.
template <SampleableEffort D>
ElicitationResult elicitation_scan(const D& dist, BiasMeasure measure, std::span<const double> grid,
                                   const SimulationConfig& cfg, double match_tol = kDefaultMatchTolerance) {
    check_grid(grid);
    const bool exact = has_exact_path(dist);
    std::vector<double> draws;
    if (!exact) draws = draw_actuals(dist, cfg);
    const std::function<double(double)> bias = [&](double e) {
        return exact ? expected_bias(dist, e, measure, cfg).expected_bias
                     : evaluate_on_draws(draws, e, measure).expected_bias;
    };

    std::vector<double> values;
    values.reserve(grid.size());
    for (double e : grid) values.push_back(bias(e));

    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (std::abs(values[i]) < std::abs(values[best])) best = i;
    }

    ElicitationResult r;
    r.measure = measure;
    r.grid_optimum = grid[best];
    r.grid_min_abs_bias = std::abs(values[best]);
    r.optimal_estimate = r.grid_optimum;
    r.min_abs_bias = r.grid_min_abs_bias;
    r.method = exact ? ElicitationMethod::Exact : ElicitationMethod::GridScan;

    auto crosses = [&](std::size_t i) { return (values[i] > 0.0) != (values[i + 1] > 0.0); };
    std::optional<std::size_t> bracket;
    if (values[best] != 0.0) {
        if (best > 0 && crosses(best - 1)) bracket = best - 1;
        else if (best + 1 < values.size() && crosses(best)) bracket = best;
    }
    if (bracket) {
        const double root = bisect(bias, grid[*bracket], grid[*bracket + 1], exact ? kExactRootTol : kSimulatedRootTol);
        const double at_root = std::abs(bias(root));
        if (at_root <= r.min_abs_bias) {
            r.optimal_estimate = root;
            r.min_abs_bias = at_root;
        }
        if (!exact) r.method = ElicitationMethod::RootFind;
    }
    r.matched_functional = match_functional(dist, r.optimal_estimate, match_tol);
    return r;
}

/// `count` evenly spaced points from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
    if (count == 0) throw DomainError("grid needs at least one point");
    if (count == 1) return {lo};
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

// ---------------------------------------------------------------------------
// PERT

struct PertInputs {
    double min_effort = 0.0;
    double most_likely = 0.0;
    double max_effort = 0.0;
};

/// (min + 4 * most likely + max) / 6
inline double pert_mean(const PertInputs& p) {
    if (!(p.min_effort > 0.0) || !std::isfinite(p.max_effort)) throw DomainError("PERT efforts must be finite and > 0");
    if (!(p.min_effort <= p.most_likely && p.most_likely <= p.max_effort)) {
        throw DomainError("PERT requires min <= most likely <= max");
    }
    return (p.min_effort + 4.0 * p.most_likely + p.max_effort) / 6.0;
}

}  // namespace estbias
