#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "estbias/calibration.hpp"
#include "estbias/simulation.hpp"

using namespace estbias;

TEST(HitRate, CountsTiesAsHits) {
    const std::vector<EstimationRecord> rs{{"a", 10, 5}, {"b", 10, 10}, {"c", 10, 15}, {"d", 10, 20}};
    const auto r = percentile_hit_rate(rs, 0.5);
    EXPECT_EQ(r.n, 4u);
    EXPECT_EQ(r.hits, 2u);
    EXPECT_EQ(r.misses, 2u);
    EXPECT_EQ(r.hit_rate, 0.5);
    EXPECT_EQ(strict_miss_rate(r), 0.5);
    EXPECT_EQ(r.deviation, 0.0);
    EXPECT_DOUBLE_EQ(*r.std_error, std::sqrt(0.25 / 4.0));
    EXPECT_DOUBLE_EQ(*r.binomial_band, 1.96 * std::sqrt(0.25 / 4.0));
}

TEST(HitRate, WithoutTarget) {
    const std::vector<EstimationRecord> rs{{"a", 10, 5}, {"b", 10, 15}, {"c", 10, 25}};
    const auto r = percentile_hit_rate(rs);
    EXPECT_DOUBLE_EQ(r.hit_rate, 1.0 / 3.0);
    EXPECT_FALSE(r.target_percentile.has_value());
    EXPECT_FALSE(r.deviation.has_value());
    EXPECT_FALSE(r.std_error.has_value());
}

TEST(HitRate, Errors) {
    const std::vector<EstimationRecord> rs{{"a", 10, 5}};
    EXPECT_THROW(percentile_hit_rate({}), DomainError);
    EXPECT_THROW(percentile_hit_rate(rs, 0.0), DomainError);
    EXPECT_THROW(percentile_hit_rate(rs, 1.0), DomainError);
    const std::vector<EstimationRecord> bad{{"a", 10, 5}, {"neg", -1, 5}};
    EXPECT_THROW(percentile_hit_rate(bad), DomainError);
}

TEST(InvertCdf, LogNormalQuantiles) {
    const auto d = skewed_effort_distribution();
    // Frozen from a 25-digit evaluation of exp(mu + sigma * Phi^-1(p)).
    EXPECT_NEAR(invert_cdf(d, 0.25), 148.51009360272977, 148.5 * 1e-8);
    EXPECT_NEAR(invert_cdf(d, 0.45), 195.48886704501268, 195.5 * 1e-8);
    EXPECT_NEAR(invert_cdf(d, 0.5), 208.18643545497829, 208.2 * 1e-8);
    EXPECT_NEAR(invert_cdf(d, 0.9), 395.53076990053618, 395.5 * 1e-8);
    EXPECT_THROW(invert_cdf(d, 0.0), DomainError);
    EXPECT_THROW(invert_cdf(d, 1.0), DomainError);
}

TEST(InvertCdf, DiceSteps) {
    const DiceProduct dice;
    EXPECT_NEAR(invert_cdf(dice, 0.5), 10.0, 1e-8);
    EXPECT_NEAR(invert_cdf(dice, 1.0 / 36.0), 1.0, 1e-8);
    EXPECT_NEAR(invert_cdf(dice, 0.99), 36.0, 1e-7);
}

TEST(HitRate, SimulatedQuantileEstimatesAreCalibrated) {
    const auto d = skewed_effort_distribution();
    const SimulationConfig cfg{100'000, 42, 4096, 1};
    const auto actuals = draw_actuals(d, cfg);
    for (double p : {0.25, 0.45, 0.5, 0.9}) {
        const double q = invert_cdf(d, p);
        std::vector<EstimationRecord> rs;
        for (std::size_t i = 0; i < actuals.size(); ++i) rs.push_back({std::to_string(i), q, actuals[i]});
        const auto r = percentile_hit_rate(rs, p);
        EXPECT_LE(std::abs(*r.deviation), 4.0 * *r.std_error) << p;
    }
}

TEST(HitRate, ModeEstimatesMissFarBelowHalf) {
    // A mode estimate on right-skewed effort is hit well under half the time.
    const auto d = skewed_effort_distribution();
    const auto actuals = draw_actuals(d, {20'000, 9, 4096, 1});
    std::vector<EstimationRecord> rs;
    for (double a : actuals) rs.push_back({"x", d.mode(), a});
    const auto r = percentile_hit_rate(rs);
    EXPECT_NEAR(r.hit_rate, d.cdf(d.mode()), 0.02);
    EXPECT_LT(r.hit_rate, 0.35);
}

TEST(HitRate, SingleRecordHit) {
    const std::vector<EstimationRecord> rs{{"a", 10, 7}};
    EXPECT_EQ(percentile_hit_rate(rs).hit_rate, 1.0);
}

TEST(HitRate, MonotoneAndComplementary) {
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> effort(1.0, 100.0);
    std::vector<EstimationRecord> rs;
    for (int i = 0; i < 200; ++i) rs.push_back({std::to_string(i), effort(g), effort(g)});
    for (int trial = 0; trial < 200; ++trial) {
        const auto before = percentile_hit_rate(rs);
        EXPECT_EQ(before.hit_rate + strict_miss_rate(before), 1.0);
        auto& r = rs[static_cast<std::size_t>(trial)];
        r.estimated *= 1.0 + effort(g) / 50.0;
        EXPECT_GE(percentile_hit_rate(rs).hit_rate, before.hit_rate);
    }
}
