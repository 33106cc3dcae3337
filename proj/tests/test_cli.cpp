#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

using circbench::cli::run_cli;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

bool has(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

}  // namespace

TEST(Cli, SolveFirstFamily) {
  Invocation r = run({"solve", "--family", "fe", "--n", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "i_GND = 0.05011765\n")) << r.out;
  EXPECT_TRUE(has(r.out, "i1_R5_B1 = -0.00141176\n"));
}

TEST(Cli, ExactBackendPrintsRationals) {
  Invocation r = run({"solve", "--family", "fe", "--backend", "exact", "--var", "i_GND"});
  EXPECT_EQ(r.out, "i_GND = 0.05011765 (213/4250)\n");
}

TEST(Cli, ModesSecondFamily) {
  Invocation r = run({"modes", "--family", "se", "--n", "2", "--orientation", "figure"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "i_GND = 0.06000000\n")) << r.out;
  EXPECT_TRUE(has(r.out, "mode: D1_B1=Blocking D4_B1=Conducting D1_B2=Blocking D4_B2=Conducting\n"));
}

TEST(Cli, DiagnoseOpenResistor) {
  Invocation r = run({"diagnose", "--family", "be", "--measure", "i2_R=0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "probability = 0.10000000\nfaults = {R}\n")) << r.out;
  EXPECT_TRUE(has(run({"diagnose", "--family", "be"}).out, "probability = 0.90000000\nfaults = {}\n"));
}

TEST(Cli, AlternatesGiveOneSolutionPerBranch) {
  Invocation r = run({"solve", "--family", "be", "--alternates", "R=90,110", "--var", "i_GND"});
  EXPECT_EQ(r.out, "mode: R=90\ni_GND = 0.13333333\n\nmode: R=110\ni_GND = 0.10909091\n\n");
}

TEST(Cli, ToleranceGivesEnclosure) {
  Invocation r = run({"solve", "--family", "be", "--tolerance", "10%", "--var", "i_GND"});
  EXPECT_EQ(r.out, "i_GND = [0.10909090, 0.13333334]\n");
}

TEST(Cli, OptimizeEndpointsAndOrConstraints) {
  Invocation r = run({"optimize", "--family", "be", "--tolerance", "0.1", "--tolerance-form", "inequalities", "--minimize",
               "i_GND", "--maximize", "i_GND", "--backend", "exact"});
  EXPECT_EQ(r.out, "minimize i_GND: optimal 0.10909091 (6/55)\nmaximize i_GND: optimal 0.13333333 (2/15)\n");
  r = run({"optimize", "--family", "be", "--alternates", "R=90,110", "--maximize", "i_GND"});
  EXPECT_EQ(r.out, "maximize i_GND: optimal 0.13333333\n  mode: R=90\n");
}

TEST(Cli, UnsupportedIsExplicit) {
  Invocation r = run({"optimize", "--family", "fe", "--tolerance", "10%", "--minimize", "i_GND"});
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(r.out.empty());
  EXPECT_TRUE(has(r.err, "Unsupported:")) << r.err;
  EXPECT_TRUE(has(r.err, "BLO2"));
  r = run({"optimize", "--family", "be", "--tolerance", "10%", "--tolerance-form", "strict", "--minimize", "i_GND"});
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(has(r.err, "BLO4"));
}

TEST(Cli, UsageErrorsNameTheFlag) {
  Invocation r = run({"solve", "--family", "xx"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(has(r.err, "--family")) << r.err;
  r = run({"solve", "--family", "fe", "--orientation", "literal"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(has(r.err, "--orientation"));
  r = run({"diagnose", "--family", "be", "--measure", "nope=1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(has(r.err, "--measure"));
  r = run({"solve", "--family", "be", "--tolerance", "abc"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(has(r.err, "--tolerance"));
  r = run({"solve", "--family", "be", "--tolerance", "0.1", "--backend", "exact"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(has(r.err, "--backend"));
  EXPECT_EQ(run({"solve"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, InfeasibleExitCode) {
  Invocation r = run({"modes", "--family", "se", "--pin", "D1_B1=Blocking", "--pin", "D4_B1=Blocking"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(has(r.err, "infeasible"));
  r = run({"diagnose", "--family", "be", "--measure", "i2_R=1", "--measure", "u_SRC=5"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, SymbolicFormulas) {
  EXPECT_TRUE(has(run({"symbolic", "--family", "be"}).out, "i_GND = u_SRC/R\n"));
  Invocation r = run({"symbolic", "--family", "se", "--n", "1"});
  EXPECT_TRUE(has(r.out, "i_GND = u_SRC/R2\n")) << r.out;
  EXPECT_TRUE(has(r.out, "conditions:\n"));
  r = run({"symbolic", "--family", "fe", "--n", "6"});
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(has(r.err, "Unsupported:"));
}

TEST(Cli, JsonAndCsvFormats) {
  Invocation r = run({"solve", "--family", "fe", "--format", "json", "--backend", "exact"});
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["values"]["i_GND"]["exact"], "213/4250");
  EXPECT_DOUBLE_EQ(j["values"]["i_GND"]["value"].get<double>(), 213.0 / 4250);
  r = run({"stats", "--family", "fe", "--n", "80", "--format", "csv"});
  EXPECT_TRUE(has(r.out, "variables,3524\n")) << r.out;
}

TEST(Cli, StatsMatchTableSizes) {
  Invocation r = run({"stats", "--family", "fe", "--n", "500"});
  EXPECT_TRUE(has(r.out, "variables = 22004\nconstraints = 22004\n")) << r.out;
}

TEST(Cli, GenerateRoundTripsThroughInstanceFile) {
  auto path = std::filesystem::temp_directory_path() / "circbench_cli_fe2.cbi";
  ASSERT_EQ(run({"generate", "--family", "fe", "--n", "2", "--out", path.string()}).code, 0);
  Invocation r = run({"solve", "--in", path.string(), "--var", "i_GND"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "i_GND = 0.02505882\n")) << r.err;
  EXPECT_EQ(run({"solve", "--in", path.string(), "--family", "fe"}).code, 2);
  std::filesystem::remove(path);
}

TEST(Cli, ExportLpWithIndicators) {
  Invocation r = run({"export-lp", "--family", "be", "--alternates", "R=90,110", "--indicators", "--maximize", "i_GND"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "Binaries\n y_R_1\n y_R_2\n")) << r.out;
  EXPECT_EQ(run({"export-lp", "--family", "be", "--alternates", "R=90,110"}).code, 3);
}

TEST(Cli, BenchTable) {
  Invocation r = run({"bench", "--family", "fe", "--n-list", "1,2", "--repetitions", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "n | exact | solved | abs_err | time\n1 | 0.05011765 | 0.05011765 |")) << r.out;
  EXPECT_EQ(run({"bench", "--family", "fe", "--n-list", "0"}).code, 2);
}
