// estbias: command-line front end for the bias measures, simulation and
// solvers. Exit codes: 0 success, 1 computational failure, 2 usage/parse error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace cli = estbias::cli;

int main(int argc, char** argv) {
    CLI::App app{"Measure and analyse the bias of software effort estimates", "estbias"};
    app.set_version_flag("--version", std::string(estbias::kVersion));
    app.require_subcommand(1);

    std::string format = "json";
    const std::map<std::string, cli::Format> formats{{"json", cli::Format::Json}, {"csv", cli::Format::Csv}};
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "Output format (json or csv)")->check(CLI::IsMember({"json", "csv"}));
    };
    std::uint64_t seed = 1;
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Random seed")->envname("ESTBIAS_SEED");
    };

    cli::EvaluateOptions eval;
    auto* evaluate = app.add_subcommand("evaluate", "Bias measures over a dataset CSV");
    evaluate->add_option("path", eval.path, "CSV with header id,estimated,actual[,estimate_type]")->required();
    evaluate->add_option("--measures", eval.measures, "Comma-separated measures or 'all'");
    evaluate->add_flag("--skip-invalid", eval.skip_invalid, "Skip and count invalid rows instead of failing");
    add_format(evaluate);

    cli::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo expected bias of fixed estimates");
    simulate->add_option("--dist", sim.dist, "Distribution spec, e.g. lognormal:mean=236,sd=126")->required();
    simulate->add_option("--estimate", sim.estimates, "Comma list of values or mean|median|mode|harmonic");
    simulate->add_option("--measures", sim.measure, "Bias measure");
    simulate->add_option("--n", sim.n, "Number of draws")->check(CLI::PositiveNumber);
    simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores); does not affect results");
    add_seed(simulate);
    add_format(simulate);

    cli::SolveOptions solve_opt;
    auto* solve = app.add_subcommand("solve", "Estimate with zero expected bias");
    solve->add_option("--dist", solve_opt.dist, "Distribution spec")->required();
    solve->add_option("--measures", solve_opt.measure, "Bias measure");
    solve->add_option("--method", solve_opt.method, "analytic or search")->check(CLI::IsMember({"analytic", "search"}));
    solve->add_option("--n", solve_opt.n, "Draws for --method search")->check(CLI::PositiveNumber);
    solve->add_option("--threads", solve_opt.threads, "Worker threads for --method search");
    add_seed(solve);
    add_format(solve);

    cli::ElicitOptions eli;
    auto* elicit = app.add_subcommand("elicit", "Which estimate does a measure reward?");
    elicit->add_option("--dist", eli.dist, "Distribution spec")->required();
    elicit->add_option("--measures", eli.measure, "Bias measure");
    elicit->add_option("--grid", eli.grid, "lo..hi, lo..hi:step, lo..hi/count or a comma list");
    elicit->add_option("--n", eli.n, "Number of draws")->check(CLI::PositiveNumber);
    elicit->add_option("--threads", eli.threads, "Worker threads (0 = all cores)");
    add_seed(elicit);
    add_format(elicit);

    cli::CalibrateOptions cal;
    double target = 0.0;
    auto* calibrate = app.add_subcommand("calibrate", "Percentile hit rate of a dataset");
    calibrate->add_option("path", cal.path, "Dataset CSV")->required();
    auto* target_opt = calibrate->add_option("--target", target, "Percentile the estimates are meant to sit at, in (0,1)");
    calibrate->add_flag("--skip-invalid", cal.skip_invalid, "Skip and count invalid rows");
    add_format(calibrate);

    auto* dice = app.add_subcommand("dice", "The two-dice product example");
    add_format(dice);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kOk : cli::kUsageError;
    }

    try {
        cli::CommandOutput out;
        if (*evaluate) {
            out = cli::cmd_evaluate(eval);
        } else if (*simulate) {
            sim.seed = seed;
            out = cli::cmd_simulate(sim);
        } else if (*solve) {
            solve_opt.seed = seed;
            out = cli::cmd_solve(solve_opt);
        } else if (*elicit) {
            eli.seed = seed;
            out = cli::cmd_elicit(eli);
        } else if (*calibrate) {
            if (*target_opt) cal.target = target;
            out = cli::cmd_calibrate(cal);
        } else {
            out = cli::cmd_dice();
        }
        for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << out.render(formats.at(format));
        return cli::kOk;
    } catch (const estbias::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kUsageError;
    } catch (const estbias::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kComputeFailure;
    }
}
