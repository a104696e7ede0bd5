// Multiply two fair dice; which estimate does each bias measure reward?

#include <cstdio>
#include <vector>

#include "estbias/estbias.hpp"

int main() {
    using namespace estbias;

    const DiceProduct dice;
    std::printf("mean %.2f  median %.0f  mode %.0f\n\n", dice.mean(), dice.median(), dice.mode());

    std::vector<double> grid;
    for (int v = 1; v <= 36; ++v) grid.push_back(v);

    std::printf("%-12s %10s %10s %14s\n", "measure", "grid opt", "refined", "functional");
    for (auto m : kAllMeasures) {
        const auto r = elicitation_scan(dice, m, grid, SimulationConfig{});
        std::printf("%-12s %10.4f %10.4f %14s\n", std::string(to_string(m)).c_str(), r.grid_optimum, r.optimal_estimate,
                    std::string(to_string(r.matched_functional)).c_str());
    }
}
