#include "anisospec/monitor.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "anisospec/verify.hpp"

using namespace anisospec;

namespace {

constexpr double kPi = 3.14159265358979323846;

Problem heat_problem(double T = 0.1) {
  Problem prob;
  prob.domain = RectDomain({1.0, 1.0});
  prob.exponents = {FieldExpr::constant(2.0), FieldExpr::constant(2.0)};
  prob.forcing = FieldExpr::constant(0.0);
  prob.initial = FieldExpr::parse("2*sin(pi*x1)*sin(pi*x2)");
  prob.horizon = T;
  prob.epsilon = 0.5;
  return prob;
}

SolverConfig heat_config() {
  SolverConfig cfg;
  cfg.modes = {2, 2};
  cfg.grid = {20, 20};
  cfg.kappa = 1.0;
  cfg.snapshots = 50;
  return cfg;
}

TEST(Instrument, ZeroTrajectory) {
  Problem prob = heat_problem();
  prob.initial = FieldExpr::constant(0.0);
  Trajectory traj = solve(prob, heat_config());
  EstimateReport rep = instrument(traj, prob, std::vector<double>{0.5});
  EXPECT_DOUBLE_EQ(rep.sup_L2, 0.0);
  EXPECT_DOUBLE_EQ(rep.dissipation, 0.0);
  EXPECT_DOUBLE_EQ(rep.ut_L2, 0.0);
  EXPECT_DOUBLE_EQ(rep.hessian_weighted, 0.0);
  EXPECT_DOUBLE_EQ(rep.higher_int[0].second, 0.0);
  EXPECT_GE(rep.data_bound, 1.0);
  // eps > 0 keeps the modular strictly positive even for u = 0.
  EXPECT_GT(rep.sup_modular, 0.0);
  EXPECT_DOUBLE_EQ(energy_residual(traj), 0.0);
}

TEST(Instrument, HeatSingleModeDissipationClosedForm) {
  // u = e^{-lambda t} psi_(1,1), p = 2: dissipation = int_0^T lambda
  // e^{-2 lambda t} dt = (1 - e^{-2 lambda T}) / 2.
  Problem prob = heat_problem(0.1);
  SolverConfig cfg = heat_config();
  cfg.snapshots = 400;  // trapezoid accuracy for the time integral
  Trajectory traj = solve(prob, cfg);
  EstimateReport rep = instrument(traj, prob, {}, {24, 24});
  const double lam = 2.0 * kPi * kPi;
  const double want = 0.5 * (1.0 - std::exp(-2.0 * lam * 0.1));
  EXPECT_NEAR(rep.dissipation, want, 2e-5 * want);
  // Independent oracle: dense trapezoid of lambda e^{-2 lambda t}.
  const auto ts = linspace(0.0, 0.1, 20001);
  std::vector<double> g(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    g[i] = lam * std::exp(-2.0 * lam * ts[i]);
  EXPECT_NEAR(trapezoid(ts, g), want, 1e-8);
}

TEST(Instrument, HeatCaseMatchesParsevalFormulas) {
  Problem prob = heat_problem(0.05);
  SolverConfig cfg = heat_config();
  cfg.modes = {3, 3};
  cfg.grid = {26, 26};
  cfg.snapshots = 60;
  Problem prob2 = prob;
  prob2.initial = FieldExpr::parse(
      "2*sin(pi*x1)*sin(pi*x2) + 0.8*sin(2*pi*x1)*sin(3*pi*x2)");
  Trajectory traj = solve(prob2, cfg);
  EstimateReport rep = instrument(traj, prob2, {}, {26, 26});

  // Coefficient-side formulas on the same snapshot time grid.
  std::vector<double> ts, diss_t, hess_t;
  for (const auto& snap : traj.snapshots) {
    ts.push_back(snap.t);
    double d = 0.0, h = 0.0;
    std::vector<int> k(2, 1);
    for (std::size_t f = 0; f < snap.c.size(); ++f) {
      const double lam = eigenvalue(EigenIndex(k), prob.domain);
      d += lam * snap.c.c[f] * snap.c.c[f];
      h += lam * lam * snap.c.c[f] * snap.c.c[f];
      for (int a = 1; a >= 0; --a) {
        if (++k[static_cast<std::size_t>(a)] <= 3) break;
        k[static_cast<std::size_t>(a)] = 1;
      }
    }
    diss_t.push_back(d);
    hess_t.push_back(h);
  }
  const double diss_coeff = trapezoid(ts, diss_t);
  const double hess_coeff = trapezoid(ts, hess_t);
  EXPECT_NEAR(rep.dissipation, diss_coeff, 1e-8 * diss_coeff);
  EXPECT_NEAR(rep.hessian_weighted, hess_coeff, 1e-8 * hess_coeff);
  // In the heat case u_t = -sum lambda_k c_k psi_k, so ||u_t||^2 over Q_T
  // equals the weighted-Hessian integral.
  EXPECT_NEAR(rep.ut_L2, hess_coeff, 1e-8 * hess_coeff);
}

TEST(Instrument, RejectsROutsideAdmissibleInterval) {
  Problem prob = heat_problem(0.02);
  Trajectory traj = solve(prob, heat_config());
  // Constant p = 2: mu = 1, r* = 1 at N = 2.
  EXPECT_NO_THROW(instrument(traj, prob, std::vector<double>{0.99}));
  EXPECT_THROW(instrument(traj, prob, std::vector<double>{1.01}),
               InvalidArgument);
  EXPECT_THROW(instrument(traj, prob, std::vector<double>{0.0}),
               InvalidArgument);
}

TEST(Instrument, FastDiffusionModularLoggedOnlyWhenAllFast) {
  Problem prob = heat_problem(0.02);
  prob.epsilon = 0.05;
  prob.exponents = {FieldExpr::parse("1.8"), FieldExpr::parse("1.6")};
  SolverConfig cfg = heat_config();
  cfg.kappa = -1.0;
  Trajectory traj = solve(prob, cfg);
  EstimateReport rep = instrument(traj, prob, {}, {24, 24});
  ASSERT_TRUE(rep.second_der_fast_modular.has_value());
  EXPECT_GT(*rep.second_der_fast_modular, 0.0);

  Problem mixed = prob;
  mixed.exponents = {FieldExpr::parse("2.2"), FieldExpr::parse("1.9")};
  Trajectory traj2 = solve(mixed, cfg);
  EstimateReport rep2 = instrument(traj2, mixed, {}, {24, 24});
  EXPECT_FALSE(rep2.second_der_fast_modular.has_value());
}

TEST(EnergyResidual, QuadraticInStepSize) {
  // With a fixed step, doubling dt grows the residual by about 2^2
  // (second-order integrator).
  Problem prob = heat_problem(0.1);
  prob.exponents = {FieldExpr::parse("2.2"), FieldExpr::parse("1.9")};
  prob.epsilon = 0.1;
  auto run = [&](double dt) {
    SolverConfig cfg;
    cfg.modes = {2, 2};
    cfg.grid = {20, 20};
    cfg.snapshots = 10;
    cfg.dt = dt;
    cfg.dt_max = dt;
    cfg.tol = 1e30;
    return energy_residual(solve(prob, cfg));
  };
  const double r1 = run(0.1 / 512.0);
  const double r2 = run(0.1 / 256.0);
  EXPECT_GT(r2 / r1, 2.5);
  EXPECT_LT(r2 / r1, 6.0);
}

TEST(Contraction, IdenticalInitialData) {
  Problem prob = heat_problem(0.05);
  SolverConfig cfg = heat_config();
  Trajectory a = solve(prob, cfg);
  Trajectory b = solve(prob, cfg);
  auto chk = contraction_check(a, b);
  EXPECT_TRUE(chk.pass);
  for (double d : chk.distance) EXPECT_NEAR(d, 0.0, 1e-14);
}

TEST(Contraction, HeatExactDecay) {
  Problem prob = heat_problem(0.05);
  SolverConfig cfg = heat_config();
  cfg.modes = {2, 2};
  Trajectory a = solve(prob, cfg);
  Problem prob2 = prob;
  prob2.initial = FieldExpr::parse("4*sin(pi*x1)*sin(pi*x2)");
  Trajectory b = solve(prob2, cfg);
  auto chk = contraction_check(a, b);
  EXPECT_TRUE(chk.pass);
  // Initial data 2 sin sin = psi_11 and 4 sin sin = 2 psi_11: coefficient
  // distance 1, decaying exactly like the mode.
  const double lam = 2.0 * kPi * kPi;
  for (std::size_t s = 0; s < chk.distance.size(); ++s) {
    const double t = a.snapshots[s].t;
    EXPECT_NEAR(chk.distance[s], std::exp(-lam * t), 1e-10);
  }
  // Strictly decreasing distances in the heat case.
  for (std::size_t s = 0; s + 1 < chk.distance.size(); ++s)
    EXPECT_LT(chk.distance[s + 1], chk.distance[s]);
}

TEST(Contraction, MisalignedSnapshotsRejected) {
  Problem prob = heat_problem(0.05);
  SolverConfig cfg = heat_config();
  Trajectory a = solve(prob, cfg);
  SolverConfig cfg2 = cfg;
  cfg2.snapshots = cfg.snapshots / 2;
  Trajectory b = solve(prob, cfg2);
  EXPECT_THROW(contraction_check(a, b), InvalidArgument);
}

TEST(Boundedness, ConstantPassesGrowthFails) {
  const std::vector<double> bounds = {10.0, 10.0, 10.0};
  {
    const std::vector<double> values = {5.0, 5.0, 5.0};
    auto v = boundedness_verdict(values, bounds, 0.2);
    EXPECT_TRUE(v.pass);
    EXPECT_DOUBLE_EQ(v.ratio_to_data_bound, 0.5);
  }
  {
    const std::vector<double> values = {1.0, 10.0, 100.0};
    auto v = boundedness_verdict(values, bounds, 0.2);
    EXPECT_FALSE(v.pass);
  }
  {
    const std::vector<double> tiny_drift = {5.0, 5.01, 5.02};
    auto v = boundedness_verdict(tiny_drift, bounds, 0.2);
    EXPECT_TRUE(v.pass);
  }
}

TEST(ReportField, NamedAccessors) {
  EstimateReport rep;
  rep.sup_L2 = 1.0;
  rep.dissipation = 2.0;
  rep.higher_int = {{0.4, 7.0}};
  rep.second_order_W12 = {3.0, 4.0};
  EXPECT_DOUBLE_EQ(report_field(rep, "sup_L2"), 1.0);
  EXPECT_DOUBLE_EQ(report_field(rep, "higher_int[0]"), 7.0);
  EXPECT_DOUBLE_EQ(report_field(rep, "second_order_W12[1]"), 4.0);
  EXPECT_THROW(report_field(rep, "nope"), InvalidArgument);
}

TEST(Properties, MonitorSuitesPass) {
  auto results = run_property_suites("monitor", 888u);
  ASSERT_FALSE(results.empty());
  for (const auto& r : results)
    EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
}

}  // namespace
