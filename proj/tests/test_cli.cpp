#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "commands.hpp"

using namespace estbias;
using namespace estbias::cli;

namespace {

const std::string kData = ESTBIAS_TEST_DATA;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run_cli(const std::string& args, const std::string& env = "") {
    const auto err_path = std::filesystem::temp_directory_path() / "estbias_cli_stderr.txt";
    const std::string cmd = env + " " + std::string(ESTBIAS_CLI_PATH) + " " + args + " 2>" + err_path.string();
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream err(err_path);
    r.err.assign(std::istreambuf_iterator<char>(err), std::istreambuf_iterator<char>());
    return r;
}

}  // namespace

TEST(ParseGrid, Forms) {
    EXPECT_EQ(parse_grid("1..5"), (std::vector<double>{1, 2, 3, 4, 5}));
    EXPECT_EQ(parse_grid("1..2:0.5"), (std::vector<double>{1, 1.5, 2}));
    EXPECT_EQ(parse_grid("0..10/3"), (std::vector<double>{0, 5, 10}));
    EXPECT_EQ(parse_grid("3, 7,11"), (std::vector<double>{3, 7, 11}));
    EXPECT_EQ(parse_grid("1..36").size(), 36u);
    EXPECT_THROW(parse_grid("5..1"), ParseError);
    EXPECT_THROW(parse_grid("1..5:0"), ParseError);
    EXPECT_THROW(parse_grid("1..5/2.5"), ParseError);
    EXPECT_THROW(parse_grid("1,x"), ParseError);
}

TEST(ParseMeasures, ListsAndAll) {
    EXPECT_EQ(parse_measures("all").size(), 7u);
    EXPECT_EQ(parse_measures("MeanReAct, mdlogerr"), (std::vector<BiasMeasure>{BiasMeasure::MeanReAct, BiasMeasure::MdLogErr}));
    EXPECT_THROW(parse_measures("MeanReAct,MMRE"), ParseError);
    EXPECT_THROW(parse_single_measure("MeanDev,MdLogErr"), ParseError);
}

TEST(MismatchWarning, Table) {
    EXPECT_FALSE(mismatch_warning(EstimateType::Mean, BiasMeasure::MeanDev));
    EXPECT_FALSE(mismatch_warning(EstimateType::Median, BiasMeasure::MdLogErr));
    EXPECT_FALSE(mismatch_warning(EstimateType::Unknown, BiasMeasure::MeanReAct));
    const auto w = mismatch_warning(EstimateType::Mean, BiasMeasure::MeanReAct);
    ASSERT_TRUE(w);
    EXPECT_NE(w->find("measure rewards under-estimates of the mean"), std::string::npos);
    for (auto m : kAllMeasures) {
        const auto mode = mismatch_warning(EstimateType::Mode, m);
        ASSERT_TRUE(mode);
        EXPECT_NE(mode->find("calibrate"), std::string::npos);
    }
}

TEST(CmdEvaluate, ByTypeAndWarnings) {
    const auto out = cmd_evaluate({kData + "/typed.csv", "MeanReAct,MdLogErr", false});
    const auto& p = out.envelope["payload"];
    EXPECT_EQ(out.envelope["command"], "evaluate");
    EXPECT_EQ(p["report"]["n"], 10);
    EXPECT_TRUE(p["by_type"].contains("mean"));
    EXPECT_TRUE(p["by_type"].contains("mode"));
    EXPECT_TRUE(p["by_type"].contains("unknown"));
    EXPECT_EQ(p["by_type"]["mode"]["n"], 3);
    EXPECT_EQ(p["report"]["match_notes"]["MeanReAct"], "HarmonicPoint");
    bool mean_warning = false;
    for (const auto& w : out.warnings) mean_warning |= w.find("rewards under-estimates of the mean") != std::string::npos;
    EXPECT_TRUE(mean_warning);
    EXPECT_EQ(out.envelope["input_digest"].get<std::string>().rfind("sha256:", 0), 0u);
}

TEST(CmdEvaluate, PerfectEstimatesScoreZero) {
    const auto path = std::filesystem::temp_directory_path() / "estbias_perfect.csv";
    std::ofstream(path) << "id,estimated,actual\na,100,100\nb,100,100\n";
    const auto out = cmd_evaluate({path.string(), "all", false});
    for (const auto& [name, v] : out.envelope["payload"]["report"]["values"].items()) EXPECT_EQ(v, 0.0) << name;
    std::filesystem::remove(path);
}

TEST(CmdEvaluate, CsvRoundTripsJsonValues) {
    const auto out = cmd_evaluate({kData + "/plain.csv", "all", false});
    std::istringstream csv(out.csv);
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line + "\n", kBiasReportCsvHeader);
    int rows = 0;
    while (std::getline(csv, line)) {
        const auto cells = text::split(line, ',');
        ASSERT_EQ(cells.size(), 5u);
        const double json_value = out.envelope["payload"]["report"]["values"][std::string(cells[1])];
        EXPECT_EQ(*text::parse_double(cells[2]), json_value) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 7);
    // 100 -> 200, 50, 100: symmetric on the log scale.
    EXPECT_EQ(out.envelope["payload"]["report"]["values"]["MdLogErr"], 0.0);
}

TEST(CmdEvaluate, SkipInvalid) {
    EXPECT_THROW(cmd_evaluate({kData + "/invalid_rows.csv", "all", false}), ParseError);
    const auto out = cmd_evaluate({kData + "/invalid_rows.csv", "all", true});
    EXPECT_EQ(out.envelope["payload"]["skipped"], 2);
    EXPECT_EQ(out.envelope["payload"]["report"]["n"], 2);
}

TEST(CmdSimulate, ExactForDiceMonteCarloOtherwise) {
    SimulateOptions dice_opt;
    dice_opt.dist = "dice";
    dice_opt.estimates = "mean,median,mode";
    dice_opt.measure = "MeanDev";
    const auto d = cmd_simulate(dice_opt);
    EXPECT_EQ(d.envelope["payload"]["method"], "exact");
    EXPECT_EQ(d.envelope["payload"]["rows"][0]["expected_bias"], 0.0);
    EXPECT_FALSE(d.envelope["payload"].contains("draws_checksum"));

    SimulateOptions ln;
    ln.dist = "lognormal:mean=236,sd=126";
    ln.estimates = "mode,median,mean,harmonic,200";
    const auto l = cmd_simulate(ln);
    const auto& rows = l.envelope["payload"]["rows"];
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(l.envelope["payload"]["method"], "monte_carlo");
    EXPECT_NEAR(rows[0]["expected_bias"].get<double>(), 0.118, 0.02);
    EXPECT_NEAR(rows[2]["expected_bias"].get<double>(), -0.285, 0.02);
    EXPECT_NEAR(rows[3]["analytic"].get<double>(), 0.0, 1e-12);
    EXPECT_EQ(rows[4]["estimate"], 200.0);

    EXPECT_NEAR(rows[3]["expected_bias"].get<double>(), 0.0, 0.02);

    dice_opt.estimates = "12.25";
    dice_opt.measure = "MeanReEst";
    EXPECT_EQ(cmd_simulate(dice_opt).envelope["payload"]["rows"][0]["expected_bias"], 0.0);

    ln.estimates = "foo";
    EXPECT_THROW(cmd_simulate(ln), ParseError);
    ln.estimates = "-3";
    EXPECT_THROW(cmd_simulate(ln), DomainError);
}

TEST(CmdSolve, AnalyticAndSearch) {
    SolveOptions opt;
    opt.dist = "lognormal:mean=236,sd=126";
    const auto a = cmd_solve(opt);
    EXPECT_NEAR(a.envelope["payload"]["estimate"].get<double>(), 183.650813167160342, 1e-9);
    EXPECT_EQ(a.envelope["payload"]["functional"], "HarmonicPoint");
    opt.method = "search";
    const auto s = cmd_solve(opt);
    EXPECT_NEAR(s.envelope["payload"]["estimate"].get<double>(), 183.65, 3.0);
    opt.method = "newton";
    EXPECT_THROW(cmd_solve(opt), ParseError);
}

TEST(CmdElicit, DiceGrid) {
    ElicitOptions opt;
    opt.dist = "dice";
    opt.grid = "1..36";
    const auto out = cmd_elicit(opt);
    const auto& r = out.envelope["payload"]["result"];
    EXPECT_EQ(r["grid_optimum"], 6.0);
    EXPECT_NEAR(r["optimal_estimate"].get<double>(), 14400.0 / 2401.0, 1e-9);
    EXPECT_EQ(r["matched_functional"], "HarmonicPoint");
    EXPECT_EQ(out.envelope["payload"]["curve"].size(), 36u);
}

TEST(CmdElicit, DefaultGridOnLogNormal) {
    ElicitOptions opt;
    opt.dist = "lognormal:mean=236,sd=126";
    opt.measure = "MdLogErr";
    const auto out = cmd_elicit(opt);
    EXPECT_EQ(out.envelope["payload"]["result"]["matched_functional"], "Median");
    EXPECT_EQ(out.envelope["payload"]["curve"].size(), 200u);
}

TEST(CmdCalibrate, HitRate) {
    const auto out = cmd_calibrate({kData + "/quantiles.csv", 0.5, false});
    const auto& r = out.envelope["payload"]["report"];
    EXPECT_EQ(r["hits"], 6);
    EXPECT_EQ(r["misses"], 2);
    EXPECT_EQ(r["hit_rate"], 0.75);
    EXPECT_EQ(r["label"], "percentile calibration");
    EXPECT_NEAR(r["deviation"].get<double>(), 0.25, 1e-15);
    EXPECT_THROW(cmd_calibrate({kData + "/quantiles.csv", 1.5, false}), DomainError);
}

TEST(CmdDice, Payload) {
    const auto out = cmd_dice();
    const auto& p = out.envelope["payload"];
    EXPECT_EQ(p["distribution"]["mean_exact"], "49/4");
    EXPECT_EQ(p["distribution"]["median"], 10.0);
    EXPECT_EQ(p["distribution"]["mode"], 6.0);
    EXPECT_EQ(p["distribution"]["atoms"].size(), 18u);
    EXPECT_EQ(p["re_act_optimum"]["integer_grid"], 6.0);
    EXPECT_EQ(p["re_act_optimum"]["continuous_exact"], "14400/2401");
    EXPECT_EQ(p["rows"][2]["expected_bias"]["MeanDev"], 0.0);
    EXPECT_EQ(p["rows"][2]["expected_bias"]["MeanReEst"], 0.0);
}

TEST(CmdSimulate, EmpiricalDigestHashesFile) {
    SimulateOptions opt;
    opt.dist = "empirical:" + kData + "/efforts.csv";
    opt.estimates = "median";
    opt.measure = "MedianDev";
    const auto out = cmd_simulate(opt);
    EXPECT_EQ(out.envelope["input_digest"], sha256_hex(read_file(kData + "/efforts.csv")));
}

TEST(Sha256, KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// ---------------------------------------------------------------------------
// The binary

TEST(Binary, ExitCodes) {
    EXPECT_EQ(run_cli("dice").code, 0);
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("frobnicate").code, 2);
    EXPECT_EQ(run_cli("simulate").code, 2);
    EXPECT_EQ(run_cli("simulate --dist gamma:k=1").code, 2);
    EXPECT_EQ(run_cli("simulate --dist dice --measures MMRE").code, 2);
    EXPECT_EQ(run_cli("dice --format xml").code, 2);
    EXPECT_EQ(run_cli("evaluate /nonexistent.csv").code, 2);
    EXPECT_EQ(run_cli("evaluate " + kData + "/invalid_rows.csv").code, 2);
    EXPECT_EQ(run_cli("evaluate --skip-invalid " + kData + "/invalid_rows.csv").code, 0);
    EXPECT_EQ(run_cli("calibrate --target 2 " + kData + "/quantiles.csv").code, 2);
    const auto failed = run_cli("solve --dist lognormal:mu=0,sigma=50 --method search --n 1000");
    EXPECT_EQ(failed.code, 1);
    EXPECT_NE(failed.err.find("no sign change"), std::string::npos);
}

TEST(Binary, ErrorMessagesNameTheLine) {
    const auto r = run_cli("evaluate " + kData + "/invalid_rows.csv");
    EXPECT_NE(r.err.find("invalid_rows.csv:3:"), std::string::npos) << r.err;
}

TEST(Binary, WarningsGoToStderr) {
    const auto r = run_cli("evaluate " + kData + "/typed.csv --measures MeanReAct");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning:"), std::string::npos);
    EXPECT_EQ(r.out.find("warning:"), std::string::npos);
    EXPECT_TRUE(Json::accept(r.out));
}

TEST(Binary, SeedFromEnvironment) {
    const std::string args = "simulate --dist lognormal:mean=236,sd=126 --estimate mean --n 2000";
    const auto flag = run_cli(args + " --seed 77");
    const auto env = run_cli(args, "ESTBIAS_SEED=77");
    const auto other = run_cli(args, "ESTBIAS_SEED=78");
    ASSERT_EQ(flag.code, 0);
    EXPECT_EQ(flag.out, env.out);
    EXPECT_NE(flag.out, other.out);
    EXPECT_EQ(Json::parse(env.out)["config"]["seed"], 77);
}

TEST(Binary, ByteIdenticalAcrossRunsAndThreads) {
    const std::string args = "simulate --dist lognormal:mean=236,sd=126 --estimate mode,median,mean --n 50000 --seed 5";
    const auto one = run_cli(args + " --threads 1");
    const auto again = run_cli(args + " --threads 1");
    const auto four = run_cli(args + " --threads 4");
    ASSERT_EQ(one.code, 0);
    EXPECT_EQ(one.out, again.out);
    EXPECT_EQ(one.out, four.out);
}

TEST(Binary, CsvFormat) {
    const auto r = run_cli("evaluate " + kData + "/plain.csv --format csv");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("group,measure,value,matches,n\n", 0), 0u);
}
