// Expected mean RE_act for a project whose effort is log-normal with mean 236
// and sd 126 work-hours, when the estimator reports the mode, median, mean or
// harmonic point of that distribution.

#include <cstdio>

#include "estbias/estbias.hpp"

int main() {
    using namespace estbias;

    const auto dist = skewed_effort_distribution();
    std::printf("mean %.1f  median %.1f  mode %.1f  sd %.1f  harmonic %.1f\n", dist.mean(), dist.median(), dist.mode(),
                std::sqrt(dist.variance()), harmonic_point(dist));

    SimulationConfig cfg;
    cfg.n_draws = 10000;
    cfg.seed = 2021;
    for (const auto& row : reproduce_figure1(cfg)) {
        std::printf("%-9s est=%7.2f  simulated=%+.3f (se %.3f)  analytic=%+.3f\n", row.label.c_str(), row.estimate,
                    row.expected_bias, row.std_error, row.analytic);
    }

    const auto re = re_act_bias_of_mean_estimate(dist);
    std::printf("RE_act bias of a perfect mean estimate: approx %+.4f, exact %+.4f\n", re.approx, re.exact);
    std::printf("zero-bias estimate for MeanReAct: %.2f\n", zero_bias_estimate(dist, BiasMeasure::MeanReAct));
}
