#include "anisospec/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace anisospec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("anisospec_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig heat_config(const std::string& out_dir) {
  std::string text = R"(
problem.dim = 2
problem.p1 = 2
problem.p2 = 2
problem.initial = 2*sin(pi*x1)*sin(pi*x2)
problem.eps = 0.5
problem.horizon = 0.05
solver.modes = 2
solver.grid = 20
solver.kappa = 1
solver.snapshots = 10
monitor.r_list = 0.5*rstar
)";
  RunConfig cfg = RunConfig::parse(text);
  cfg.output_dir = out_dir;
  return cfg;
}

TEST(CmdCheck, AdmissibleConfigPasses) {
  TempDir dir("check_ok");
  RunConfig cfg = heat_config((dir.path / "out").string());
  std::FILE* sink = std::tmpfile();
  const int rc = cli::cmd_check(cfg, {}, sink);
  std::fclose(sink);
  EXPECT_EQ(rc, cli::kOk);
  EXPECT_TRUE(fs::exists(dir.path / "out" / "exponent_report.json"));
  const Json j =
      Json::parse(read_text_file(dir.path / "out" / "exponent_report.json"));
  EXPECT_NEAR(j["r_star"].get<double>(), 1.0, 1e-12);
}

TEST(CmdCheck, MuViolationNamesFailedVerdict) {
  TempDir dir("check_mu");
  RunConfig cfg = heat_config((dir.path / "out").string());
  cfg.problem.exponents = {FieldExpr::parse("3.9"), FieldExpr::parse("2.0")};
  cfg.slow_mode = false;
  std::FILE* sink = std::tmpfile();
  const int rc = cli::cmd_check(cfg, {}, sink);
  std::fclose(sink);
  EXPECT_EQ(rc, cli::kVerdictFailure);
  const Json j =
      Json::parse(read_text_file(dir.path / "out" / "exponent_report.json"));
  bool mu_failed = false;
  for (const auto& v : j["verdicts"])
    if (v["name"] == "mu_gap" && v["pass"] == false) mu_failed = true;
  EXPECT_TRUE(mu_failed);
}

TEST(CmdCheck, MalformedExpressionIsParseError) {
  EXPECT_THROW(RunConfig::parse("problem.p1 = 2 + *"), ParseError);
}

TEST(CmdSolve, WritesArtifactsAndDecaysHeatMode) {
  TempDir dir("solve");
  RunConfig cfg = heat_config((dir.path / "out").string());
  std::FILE* sink = std::tmpfile();
  const int rc = cli::cmd_solve(cfg, {}, sink);
  std::fclose(sink);
  ASSERT_EQ(rc, cli::kOk);
  ASSERT_TRUE(fs::exists(dir.path / "out" / "trajectory.bin"));
  ASSERT_TRUE(fs::exists(dir.path / "out" / "estimate_report.json"));
  ASSERT_TRUE(fs::exists(dir.path / "out" / "monitors.csv"));
  TrajectoryFile tf = read_trajectory(dir.path / "out" / "trajectory.bin");
  const double lam = 2.0 * 3.14159265358979323846 * 3.14159265358979323846;
  EXPECT_NEAR(tf.snapshots.back()[0], std::exp(-lam * 0.05), 1e-12);
}

TEST(CmdSolve, RefusesInadmissibleExponentsWithoutForce) {
  TempDir dir("solve_refuse");
  RunConfig cfg = heat_config((dir.path / "out").string());
  cfg.problem.exponents = {FieldExpr::parse("3.9"), FieldExpr::parse("2.0")};
  cfg.slow_mode = false;
  std::FILE* sink = std::tmpfile();
  EXPECT_EQ(cli::cmd_solve(cfg, {}, sink), cli::kVerdictFailure);
  cli::Options force;
  force.force = true;
  EXPECT_EQ(cli::cmd_solve(cfg, force, sink), cli::kOk);
  std::fclose(sink);
}

TEST(CmdSolve, ByteIdenticalReruns) {
  TempDir dir("determinism");
  RunConfig cfg = heat_config((dir.path / "a").string());
  std::FILE* sink = std::tmpfile();
  ASSERT_EQ(cli::cmd_solve(cfg, {}, sink), cli::kOk);
  cfg.output_dir = (dir.path / "b").string();
  ASSERT_EQ(cli::cmd_solve(cfg, {}, sink), cli::kOk);
  std::fclose(sink);
  for (const char* name :
       {"trajectory.bin", "estimate_report.json", "monitors.csv"}) {
    const std::string a = read_text_file(dir.path / "a" / name);
    const std::string b = read_text_file(dir.path / "b" / name);
    EXPECT_EQ(a, b) << name;
  }
}

TEST(CmdSweep, HeatEpsilonSweepPassesVerdicts) {
  TempDir dir("sweep");
  RunConfig cfg = heat_config((dir.path / "out").string());
  cfg.sweep_axis = "epsilon";
  cfg.sweep_values = {1e-1, 1e-2, 1e-3};
  std::FILE* sink = std::tmpfile();
  const int rc = cli::cmd_sweep(cfg, {}, sink);
  std::fclose(sink);
  EXPECT_EQ(rc, cli::kOk);
  EXPECT_TRUE(fs::exists(dir.path / "out" / "sweep.csv"));
  const Json j = Json::parse(read_text_file(dir.path / "out" / "verdicts.json"));
  ASSERT_FALSE(j["verdicts"].empty());
  for (const auto& v : j["verdicts"]) EXPECT_TRUE(v["pass"].get<bool>());
}

TEST(CmdSweep, RecordsPerRunFailuresAndContinues) {
  TempDir dir("sweep_fail");
  RunConfig cfg = heat_config((dir.path / "out").string());
  cfg.sweep_axis = "epsilon";
  cfg.sweep_values = {-1.0, 1e-1, 1e-2};  // first member invalid
  std::FILE* sink = std::tmpfile();
  const int rc = cli::cmd_sweep(cfg, {}, sink);
  std::fclose(sink);
  EXPECT_EQ(rc, cli::kRuntimeFailure);
  const Json j = Json::parse(read_text_file(dir.path / "out" / "verdicts.json"));
  ASSERT_EQ(j["failures"].size(), 1u);
  EXPECT_DOUBLE_EQ(j["failures"][0]["value"].get<double>(), -1.0);
  // The healthy members still produced rows (0.1 in 17-digit form).
  const std::string csv = read_text_file(dir.path / "out" / "sweep.csv");
  EXPECT_NE(csv.find("\r\n0.10000000000000001,"), std::string::npos);
}

TEST(CmdSweep, ByteIdenticalReruns) {
  TempDir dir("sweep_det");
  RunConfig cfg = heat_config((dir.path / "a").string());
  cfg.sweep_axis = "epsilon";
  cfg.sweep_values = {1e-1, 1e-2, 1e-3};
  cfg.threads = 3;
  std::FILE* sink = std::tmpfile();
  ASSERT_EQ(cli::cmd_sweep(cfg, {}, sink), cli::kOk);
  cfg.output_dir = (dir.path / "b").string();
  ASSERT_EQ(cli::cmd_sweep(cfg, {}, sink), cli::kOk);
  std::fclose(sink);
  for (const char* name : {"sweep.csv", "verdicts.json"})
    EXPECT_EQ(read_text_file(dir.path / "a" / name),
              read_text_file(dir.path / "b" / name))
        << name;
}

TEST(CmdSweep, MissingBlockIsUsageError) {
  TempDir dir("sweep_usage");
  RunConfig cfg = heat_config((dir.path / "out").string());
  std::FILE* sink = std::tmpfile();
  EXPECT_EQ(cli::cmd_sweep(cfg, {}, sink), cli::kUsageError);
  std::fclose(sink);
}

TEST(CmdMms, ZeroExactSolutionGivesZeroErrors) {
  TempDir dir("mms_zero");
  RunConfig cfg = heat_config((dir.path / "out").string());
  cfg.mms_u_exact = "0";
  cfg.mms_modes = {2, 3};
  cfg.mms_measure_grid = 16;
  std::FILE* sink = std::tmpfile();
  const int rc = cli::cmd_mms(cfg, {}, sink);
  std::fclose(sink);
  ASSERT_EQ(rc, cli::kOk);
  const std::string csv = read_text_file(dir.path / "out" / "mms.csv");
  EXPECT_NE(csv.find("modes,l2_qt_error,observed_order"), std::string::npos);
  EXPECT_NE(csv.find("\r\n2,0,0"), std::string::npos);
}

TEST(CmdMms, RequiresUExact) {
  TempDir dir("mms_usage");
  RunConfig cfg = heat_config((dir.path / "out").string());
  std::FILE* sink = std::tmpfile();
  EXPECT_EQ(cli::cmd_mms(cfg, {}, sink), cli::kUsageError);
  std::fclose(sink);
}

TEST(CmdVerify, SelectionsAndTamperedTolerance) {
  RunConfig cfg = heat_config("unused");
  std::FILE* sink = std::tmpfile();
  // Empty selection: no-op, exit 0.
  cfg.verify_suites = "";
  EXPECT_EQ(cli::cmd_verify(cfg, {}, sink), cli::kOk);
  // One fast suite passes.
  cfg.verify_suites = "exponents";
  EXPECT_EQ(cli::cmd_verify(cfg, {}, sink), cli::kOk);
  // Tampered (impossible) tolerance fails demonstrably.
  cfg.verify_suites = "basis.orthonormality";
  cfg.verify_tols["basis.orthonormality"] = 1e-20;
  EXPECT_EQ(cli::cmd_verify(cfg, {}, sink), cli::kVerdictFailure);
  std::fclose(sink);
}

}  // namespace
