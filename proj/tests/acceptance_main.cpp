// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anisospec/cli.hpp"
#include "anisospec/config.hpp"
#include "anisospec/monitor.hpp"
#include "anisospec/solver.hpp"
#include "anisospec/verify.hpp"

using namespace anisospec;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] %2d. %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Problem anisotropic_mms_problem() {
  Problem prob;
  prob.domain = RectDomain({1.0, 1.0});
  prob.exponents = {FieldExpr::parse("2.2"), FieldExpr::parse("1.9")};
  prob.forcing = FieldExpr::constant(0.0);
  prob.initial = FieldExpr::constant(0.0);
  prob.horizon = 0.5;
  prob.epsilon = 1e-3;
  return prob;
}

// 1. Heat-equation exactness.
void criterion_heat_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Problem prob;
  prob.domain = RectDomain({1.0, 1.0});
  prob.exponents = {FieldExpr::constant(2.0), FieldExpr::constant(2.0)};
  prob.forcing = FieldExpr::constant(0.0);
  prob.initial = FieldExpr::parse("2*sin(pi*x1)*sin(pi*x2)");
  prob.horizon = 0.1;
  prob.epsilon = 0.5;
  const double want = std::exp(-2.0 * kPi * kPi * 0.1);
  const int k11[2] = {1, 1};

  SolverConfig rk;
  rk.modes = {2, 2};
  rk.grid = {20, 20};
  rk.integrator = TimeIntegrator::kExplicitRk;
  rk.tol = 1e-9;
  const double got_rk = solve(prob, rk).snapshots.back().c.at(k11);
  const double rel_rk = std::fabs(got_rk - want) / want;

  SolverConfig imex;
  imex.modes = {2, 2};
  imex.grid = {20, 20};
  imex.kappa = 1.0;
  const double got_imex = solve(prob, imex).snapshots.back().c.at(k11);
  const double rel_imex = std::fabs(got_imex - want) / want;

  const double elapsed = seconds_since(t0);
  const bool pass = rel_rk <= 1e-6 && rel_imex <= 1e-12 && elapsed < 10.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "rel err rk %.2e (<=1e-6), imex %.2e (<=1e-12), %.1fs",
                rel_rk, rel_imex, elapsed);
  report(1, "heat exactness", pass, buf);
}

// 2. MMS convergence over modes {4, 8, 16}.
void criterion_mms_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.problem = anisotropic_mms_problem();
  cfg.solver.modes = {4, 4};
  cfg.solver.tol = 1e-6;
  cfg.solver.snapshots = 100;
  cfg.mms_modes = {4, 8, 16};
  cfg.mms_measure_grid = 64;
  cfg.mms_tol_scale_power = 4.0;
  const FieldExpr u_exact =
      FieldExpr::parse("exp(-t)*sin(pi*x1)*sin(pi*x2)");
  const auto rows = cli::run_mms(cfg, u_exact);
  const double elapsed = seconds_since(t0);
  const bool decreasing = rows[1].l2_qt_error < rows[0].l2_qt_error &&
                          rows[2].l2_qt_error < rows[1].l2_qt_error;
  const bool factor = rows[2].l2_qt_error <= rows[0].l2_qt_error / 5.0;
  const bool pass = decreasing && factor && elapsed < 300.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "errors %.3e / %.3e / %.3e, err16 <= err4/5: %s, %.0fs",
                rows[0].l2_qt_error, rows[1].l2_qt_error, rows[2].l2_qt_error,
                factor ? "yes" : "no", elapsed);
  report(2, "mms convergence", pass, buf);
}

// 3. Energy identity residual and its response to the step tolerance.
void criterion_energy_identity() {
  Problem prob = anisotropic_mms_problem();
  prob.forcing = manufactured_forcing(
      FieldExpr::parse("exp(-t)*sin(pi*x1)*sin(pi*x2)"), prob);
  prob.initial = FieldExpr::parse("sin(pi*x1)*sin(pi*x2)");
  SolverConfig cfg;
  cfg.modes = {8, 8};
  cfg.snapshots = 100;
  const double res_default = energy_residual(solve(prob, cfg));
  SolverConfig tight = cfg;
  tight.tol = cfg.tol / 4.0;
  const double res_tight = energy_residual(solve(prob, tight));
  const double ratio = res_tight / res_default;
  const bool pass =
      res_default <= 1e-5 && ratio >= 0.25 * 0.7 && ratio <= 0.25 * 1.3;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "residual %.3e (<=1e-5), tightened/default %.3f "
                "(0.175..0.325)",
                res_default, ratio);
  report(3, "energy identity", pass, buf);
}

// 4. Contraction of two solutions with different initial data.
void criterion_contraction() {
  Problem prob = anisotropic_mms_problem();
  prob.horizon = 0.25;
  SolverConfig cfg;
  cfg.modes = {8, 8};
  cfg.tol = 1e-9;
  cfg.snapshots = 100;
  Problem a = prob;
  a.initial = FieldExpr::parse("2*sin(pi*x1)*sin(pi*x2)");
  Problem b = prob;
  b.initial = FieldExpr::parse(
      "sin(pi*x1)*sin(pi*x2) + 0.6*sin(2*pi*x1)*sin(pi*x2)");
  Trajectory ta = solve(a, cfg);
  Trajectory tb = solve(b, cfg);
  auto chk = contraction_check(ta, tb, 1e-8);
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max snapshotwise distance increase %.2e",
                chk.max_increase);
  report(4, "contraction", chk.pass, buf);
}

// 5. Basis identity suites.
void criterion_identity_suites() {
  const auto res = run_property_suites("basis", 20240810u);
  bool pass = !res.empty();
  std::string detail;
  for (const auto& r : res) {
    pass = pass && r.pass;
    if (!r.pass) detail += r.name + " failed; ";
  }
  if (detail.empty())
    detail = "orthonormality 1e-12, parseval/derivative 1e-10, "
             "by-parts 1e-9";
  report(5, "basis identities", pass, detail);
}

// 6. Function-space suites plus the Luxemburg fixed point.
void criterion_funcspace_suites() {
  const auto res = run_property_suites("funcspace", 20240810u);
  bool pass = !res.empty();
  std::string detail;
  for (const auto& r : res) {
    pass = pass && r.pass;
    if (!r.pass) detail += r.name + " failed; ";
  }
  // Fixed point |rho(u/lambda*) - 1| <= 1e-8 on random expansions.
  Rng rng(99331u);
  auto grid = make_grid(RectDomain({1.0, 1.0}), {24, 24});
  BasisTransform basis(grid, {4, 4});
  GridFunction p = GridFunction::sample(
      grid, FieldExpr::parse("2 + 0.4*sin(x1) + 0.2*x2"));
  double worst_fp = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    GridFunction u = basis.eval_expansion(
        verify_detail::random_coeffs(rng, {4, 4}, uniform(rng, 0.2, 5.0)));
    const double lam = luxemburg_norm(u, p);
    GridFunction scaled = u;
    for (auto& v : scaled.values) v /= lam;
    worst_fp = std::max(worst_fp, std::fabs(modular(scaled, p) - 1.0));
  }
  pass = pass && worst_fp <= 1e-8;
  if (detail.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "fixed point %.2e (<=1e-8), holder+interpolation 100 "
                  "randoms",
                  worst_fp);
    detail = buf;
  }
  report(6, "function-space suites", pass, detail);
}

// 7. eps-uniform boundedness of the monitored integrals.
void criterion_eps_uniform_boundedness() {
  const auto t0 = std::chrono::steady_clock::now();
  Problem prob;
  prob.domain = RectDomain({1.0, 1.0});
  prob.exponents = {FieldExpr::parse("2 + 0.2*sin(3*x1)"),
                    FieldExpr::parse("2")};
  prob.forcing = FieldExpr::constant(0.0);
  prob.initial = FieldExpr::parse("16*x1*(1-x1)*x2*(1-x2)");
  prob.horizon = 0.25;
  prob.epsilon = 1e-1;
  SolverConfig cfg;
  cfg.modes = {16, 16};
  cfg.snapshots = 100;
  const double rstar = admissible_r_star(prob);
  const std::vector<double> r_list = {0.5 * rstar};
  const std::vector<double> eps_values = {1e-1, 1e-2, 1e-3};
  auto results = sweep(prob, cfg, SweepAxis::kEpsilon, eps_values, 3);
  std::vector<EstimateReport> reports;
  for (const auto& r : results) {
    if (!r.error.empty()) {
      report(7, "eps-uniform boundedness", false, "run failed: " + r.error);
      return;
    }
    Problem p = prob;
    p.epsilon = r.value;
    reports.push_back(instrument(*r.trajectory, p, r_list));
  }
  std::vector<double> hi, hess, bounds;
  for (const auto& rep : reports) {
    hi.push_back(rep.higher_int[0].second);
    hess.push_back(rep.hessian_weighted);
    bounds.push_back(rep.data_bound);
  }
  auto v_hi = boundedness_verdict(hi, bounds, 0.2);
  auto v_hess = boundedness_verdict(hess, bounds, 0.2);
  const double elapsed = seconds_since(t0);
  const bool pass = v_hi.pass && v_hess.pass && elapsed < 900.0;
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "higher_int %.4g/%.4g/%.4g (var %.1f%%), hessian "
                "%.4g/%.4g/%.4g (var %.1f%%), r=%.3f, %.0fs",
                hi[0], hi[1], hi[2], 100.0 * v_hi.max_rel_variation, hess[0],
                hess[1], hess[2], 100.0 * v_hess.max_rel_variation,
                r_list[0], elapsed);
  report(7, "eps-uniform boundedness", pass, buf);
}

// 8. Exponent arithmetic.
void criterion_exponent_arithmetic() {
  bool pass = r_star(1.0, 2) == 1.0 && std::fabs(r_star(1.2, 2) - 0.8) < 1e-15 &&
              std::fabs(r_star(1.0, 3) - 0.8) < 1e-15;
  const auto res = run_property_suites("exponents.beta_inverts_gamma",
                                       20240810u);
  for (const auto& r : res) pass = pass && r.pass;
  report(8, "exponent arithmetic", pass,
         "r*(1,2)=1, r*(1.2,2)=0.8, r*(1,3)=0.8; beta_max inverts gamma to "
         "1e-12");
}

// 9. Flux monotonicity on 1e4 random samples.
void criterion_flux_monotonicity() {
  Rng rng(555123u);
  bool pass = true;
  for (int trial = 0; trial < 10000; ++trial) {
    const double xi = uniform(rng, -10.0, 10.0);
    const double eta = uniform(rng, -10.0, 10.0);
    const double p = uniform(rng, 1.2, 3.0);
    const double eps = uniform(rng, 1e-9, 1.0);
    const double d = (flux(xi, p, eps) - flux(eta, p, eps)) * (xi - eta);
    if (d < 0.0) pass = false;
    if (std::fabs(xi - eta) > 1e-12 && !(d > 0.0)) pass = false;
  }
  report(9, "flux monotonicity", pass, "10^4 random (xi, eta, p, eps)");
}

// 10. Determinism of cmd_solve artifacts.
void criterion_determinism() {
  const fs::path base = fs::temp_directory_path() / "anisospec_acceptance";
  fs::remove_all(base);
  RunConfig cfg = RunConfig::parse(R"(
problem.dim = 2
problem.p1 = 2 + 0.2*sin(3*x1)
problem.p2 = 2
problem.initial = 2*sin(pi*x1)*sin(pi*x2)
problem.eps = 0.01
problem.horizon = 0.05
solver.modes = 4
solver.snapshots = 20
monitor.r_list = 0.5*rstar
seed = 7
)");
  std::FILE* sink = std::tmpfile();
  cfg.output_dir = (base / "a").string();
  const int rc1 = cli::cmd_solve(cfg, {}, sink);
  cfg.output_dir = (base / "b").string();
  const int rc2 = cli::cmd_solve(cfg, {}, sink);
  std::fclose(sink);
  bool pass = rc1 == cli::kOk && rc2 == cli::kOk;
  std::string detail = "trajectory.bin, estimate_report.json, monitors.csv";
  for (const char* name :
       {"trajectory.bin", "estimate_report.json", "monitors.csv"}) {
    if (!pass) break;
    const std::string a = read_text_file(base / "a" / name);
    const std::string b = read_text_file(base / "b" / name);
    if (a != b) {
      pass = false;
      detail = std::string(name) + " differs between reruns";
    }
  }
  fs::remove_all(base);
  report(10, "determinism", pass, detail);
}

}  // namespace

int main() {
  criterion_heat_exactness();
  criterion_mms_convergence();
  criterion_energy_identity();
  criterion_contraction();
  criterion_identity_suites();
  criterion_funcspace_suites();
  criterion_eps_uniform_boundedness();
  criterion_exponent_arithmetic();
  criterion_flux_monotonicity();
  criterion_determinism();
  std::printf("%d criteria failed\n", g_failures);
  return g_failures;
}
