#pragma once

// Seeded Monte Carlo estimation of the expected value of a bias measure when
// one fixed estimate is issued against repeated i.i.d. draws of the actual
// effort.
//
// Reproducibility: draw i belongs to stream block i / kStreamBlock, and each
// block has its own engine seeded from (seed, block index). The draws depend
// only on (seed, n_draws); chunk_size and threads only change scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "estbias/distributions.hpp"
#include "estbias/errors.hpp"
#include "estbias/measures.hpp"

namespace estbias {

inline constexpr std::size_t kStreamBlock = 4096;

struct SimulationConfig {
    std::size_t n_draws = 10000;
    std::uint64_t seed = 1;
    /// Draws per scheduled task; rounded up to a whole number of stream blocks.
    std::size_t chunk_size = 4096;
    /// Worker threads; 0 picks hardware concurrency.
    unsigned threads = 1;
};

struct BiasCurvePoint {
    double estimate = 0.0;
    double expected_bias = 0.0;
    /// Mean-aggregated measures only.
    std::optional<double> std_error;
};

/// Engine for one stream block.
inline Engine block_engine(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return Engine(seq);
}

/// n_draws actual efforts from `dist`, in stream order.
template <SampleableEffort D>
std::vector<double> draw_actuals(const D& dist, const SimulationConfig& cfg) {
    if (cfg.n_draws == 0) throw DomainError("simulation needs n_draws >= 1");
    if (cfg.chunk_size == 0) throw DomainError("simulation needs chunk_size >= 1");

    const std::size_t n = cfg.n_draws;
    std::vector<double> out(n);
    const std::size_t blocks = (n + kStreamBlock - 1) / kStreamBlock;
    const std::size_t blocks_per_task = std::max<std::size_t>(1, (cfg.chunk_size + kStreamBlock - 1) / kStreamBlock);
    const std::size_t tasks = (blocks + blocks_per_task - 1) / blocks_per_task;

    auto fill_block = [&](std::size_t b) {
        Engine g = block_engine(cfg.seed, b);
        const std::size_t end = std::min(n, (b + 1) * kStreamBlock);
        for (std::size_t i = b * kStreamBlock; i < end; ++i) {
            const double x = dist.sample(g);
            if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("distribution produced a non-positive draw");
            out[i] = x;
        }
    };
    auto run_task = [&](std::size_t t) {
        const std::size_t last = std::min(blocks, (t + 1) * blocks_per_task);
        for (std::size_t b = t * blocks_per_task; b < last; ++b) fill_block(b);
    };

    unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
    if (threads <= 1) {
        for (std::size_t t = 0; t < tasks; ++t) run_task(t);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < tasks && !failed; t = next++) {
                    try {
                        run_task(t);
                    } catch (const std::exception& e) {
                        if (!failed.exchange(true)) failure = e.what();
                    }
                }
            });
        }
    }
    if (failed) throw DomainError(failure);
    return out;
}

/// FNV-1a over the bit patterns of the draws; equal draws give equal sums.
inline std::uint64_t draws_checksum(std::span<const double> draws) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double x : draws) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &x, sizeof bits);
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

/// Bias of the synthetic dataset {(estimate, a) : a in actuals}.
inline BiasCurvePoint evaluate_on_draws(std::span<const double> actuals, double estimate, BiasMeasure measure) {
    if (!(estimate > 0.0) || !std::isfinite(estimate)) throw DomainError("estimate must be finite and > 0");
    if (actuals.empty()) throw DomainError("no draws to evaluate");
    const auto form = score_form_of(measure);
    std::vector<double> scores;
    scores.reserve(actuals.size());
    for (double a : actuals) scores.push_back(score(estimate, a, form));

    BiasCurvePoint p;
    p.estimate = estimate;
    if (aggregation_of(measure) == Aggregation::Mean) {
        const double m = mean_of(scores);
        double ss = 0.0;
        for (double s : scores) ss += (s - m) * (s - m);
        const auto n = static_cast<double>(scores.size());
        p.expected_bias = m;
        p.std_error = scores.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    } else {
        p.expected_bias = median_of(std::move(scores));
    }
    return p;
}

template <SampleableEffort D>
BiasCurvePoint simulate_expected_bias(const D& dist, double estimate, BiasMeasure measure, const SimulationConfig& cfg) {
    if (!(estimate > 0.0) || !std::isfinite(estimate)) throw DomainError("estimate must be finite and > 0");
    return evaluate_on_draws(draw_actuals(dist, cfg), estimate, measure);
}

inline void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw DomainError("estimate grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw DomainError("grid values must be finite and > 0");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
    }
}

/// Every grid point is evaluated on the same draws (common random numbers).
template <SampleableEffort D>
std::vector<BiasCurvePoint> bias_curve(const D& dist, std::span<const double> grid, BiasMeasure measure,
                                       const SimulationConfig& cfg) {
    check_grid(grid);
    const auto draws = draw_actuals(dist, cfg);
    std::vector<BiasCurvePoint> curve;
    curve.reserve(grid.size());
    for (double e : grid) curve.push_back(evaluate_on_draws(draws, e, measure));
    return curve;
}

// ---------------------------------------------------------------------------
// Exact enumeration for the dice product

/// Expected bias over the 36 equally likely dice products. Mean-aggregated
/// measures use the expectation; median-aggregated ones the median of the 36
/// scores. For a constant denominator the sum is taken before dividing, so
/// the mean estimate gives exactly zero for MeanDev and MeanReEst.
inline double exact_expected_bias(const DiceProduct& dice, double estimate, BiasMeasure measure) {
    if (!(estimate > 0.0) || !std::isfinite(estimate)) throw DomainError("estimate must be finite and > 0");
    const auto form = score_form_of(measure);
    if (aggregation_of(measure) == Aggregation::Median) {
        std::vector<double> scores;
        for (int x : dice.outcomes()) scores.push_back(score(estimate, x, form));
        return median_of(std::move(scores));
    }
    double sum = 0.0;
    for (const auto& atom : dice.atoms()) {
        const double x = atom.outcome;
        double term = 0.0;
        switch (form) {
            case ScoreForm::Deviation:
            case ScoreForm::RelToEstimate: term = x - estimate; break;
            case ScoreForm::RelToActual: term = (x - estimate) / x; break;
            case ScoreForm::LogRatio: term = std::log(x) - std::log(estimate); break;
        }
        sum += atom.multiplicity * term;
    }
    return form == ScoreForm::RelToEstimate ? sum / (36.0 * estimate) : sum / 36.0;
}

/// Exact enumeration for dice (directly or behind AnyDistribution), Monte
/// Carlo otherwise. Exact results carry std_error 0 for mean aggregation.
template <SampleableEffort D>
BiasCurvePoint expected_bias(const D& dist, double estimate, BiasMeasure measure, const SimulationConfig& cfg) {
    const DiceProduct* dice = nullptr;
    if constexpr (std::is_same_v<D, DiceProduct>) dice = &dist;
    else if constexpr (std::is_same_v<D, AnyDistribution>) dice = dist.template get_if<DiceProduct>();
    if (dice != nullptr) {
        BiasCurvePoint p{estimate, exact_expected_bias(*dice, estimate, measure), std::nullopt};
        if (aggregation_of(measure) == Aggregation::Mean) p.std_error = 0.0;
        return p;
    }
    return simulate_expected_bias(dist, estimate, measure, cfg);
}

template <SampleableEffort D>
bool has_exact_path(const D& dist) {
    if constexpr (std::is_same_v<D, DiceProduct>) return true;
    else if constexpr (std::is_same_v<D, AnyDistribution>) return dist.template get_if<DiceProduct>() != nullptr;
    else return false;
}

/// Like bias_curve, but exact for dice.
template <SampleableEffort D>
std::vector<BiasCurvePoint> expected_bias_curve(const D& dist, std::span<const double> grid, BiasMeasure measure,
                                                const SimulationConfig& cfg) {
    if (!has_exact_path(dist)) return bias_curve(dist, grid, measure, cfg);
    check_grid(grid);
    std::vector<BiasCurvePoint> curve;
    for (double e : grid) curve.push_back(expected_bias(dist, e, measure, cfg));
    return curve;
}

// ---------------------------------------------------------------------------
// The log-normal effort experiment: mean 236, sd 126 work-hours

struct SkewedEffortRow {
    std::string label;  // mode | median | mean | harmonic
    double estimate = 0.0;
    double expected_bias = 0.0;  // simulated MeanReAct
    double std_error = 0.0;
    double analytic = 0.0;       // 1 - estimate * E[1/X]
};

inline LogNormalEffort skewed_effort_distribution() { return lognormal_from_mean_sd(236.0, 126.0); }

/// Simulated MeanReAct when the mode, median, mean or harmonic point is
/// issued as the estimate. All four rows share the same draws.
inline std::vector<SkewedEffortRow> reproduce_figure1(const SimulationConfig& cfg) {
    const auto dist = skewed_effort_distribution();
    // Ascending: mode < harmonic < median < mean.
    const std::vector<double> grid = {dist.mode(), harmonic_point(dist), dist.median(), dist.mean()};
    const auto curve = bias_curve(dist, grid, BiasMeasure::MeanReAct, cfg);
    auto row = [&](std::string label, std::size_t k) {
        return SkewedEffortRow{std::move(label), curve[k].estimate, curve[k].expected_bias,
                               curve[k].std_error.value_or(0.0), 1.0 - curve[k].estimate * dist.reciprocal_mean()};
    };
    return {row("mode", 0), row("median", 2), row("mean", 3), row("harmonic", 1)};
}

}  // namespace estbias
