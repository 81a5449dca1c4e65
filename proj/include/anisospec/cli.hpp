#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anisospec/config.hpp"
#include "anisospec/io.hpp"
#include "anisospec/monitor.hpp"
#include "anisospec/solver.hpp"
#include "anisospec/verify.hpp"

namespace anisospec::cli {

// Exit codes of the batch front-end.
inline constexpr int kOk = 0;
inline constexpr int kVerdictFailure = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kRuntimeFailure = 3;

struct Options {
  std::string out_dir;  // overrides config when non-empty
  bool force = false;
  std::uint64_t seed = 0;  // overrides config when nonzero
  int threads = 0;         // overrides config when nonzero
};

namespace detail {

inline std::filesystem::path ensure_out_dir(const RunConfig& cfg,
                                            const Options& opt) {
  const std::filesystem::path dir =
      opt.out_dir.empty() ? cfg.output_dir : opt.out_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

inline ExponentReport run_check(const RunConfig& cfg) {
  ExponentField field = make_exponent_field(
      cfg.problem.exponents, cfg.problem.domain, cfg.problem.horizon,
      cfg.sampling, cfg.lipschitz_override);
  return validate_exponents(field, cfg.problem.domain, cfg.problem.horizon,
                            cfg.sampling, cfg.slow_mode);
}

inline std::vector<std::string> report_field_names(const EstimateReport& rep) {
  std::vector<std::string> names = {"sup_L2",           "dissipation",
                                    "ut_L2",            "sup_modular",
                                    "hessian_weighted"};
  for (std::size_t i = 0; i < rep.higher_int.size(); ++i)
    names.push_back("higher_int[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < rep.second_order_W12.size(); ++i)
    names.push_back("second_order_W12[" + std::to_string(i) + "]");
  return names;
}

}  // namespace detail

/// check: exponent admissibility verdicts; exit 0 iff all pass.
inline int cmd_check(const RunConfig& cfg, const Options& opt,
                     std::FILE* out = stdout) {
  const auto dir = detail::ensure_out_dir(cfg, opt);
  ExponentReport rep = detail::run_check(cfg);
  const Json j = to_json(rep);
  write_text_file(dir / "exponent_report.json", j.dump(2) + "\n");
  for (const auto& v : rep.verdicts)
    std::fprintf(out, "[%s] %s: %s\n", v.pass ? "PASS" : "FAIL",
                 v.name.c_str(), v.detail.c_str());
  std::fprintf(out, "mu = %.6g, r_star = %.6g, beta_max = %.6g\n", rep.mu,
               rep.r_star, rep.beta_max);
  return rep.all_pass() ? kOk : kVerdictFailure;
}

/// solve: one evolution; writes trajectory.bin, estimate_report.json and a
/// per-snapshot monitors.csv.
inline int cmd_solve(const RunConfig& cfg, const Options& opt,
                     std::FILE* out = stdout) {
  const auto dir = detail::ensure_out_dir(cfg, opt);
  if (!opt.force) {
    ExponentReport rep = detail::run_check(cfg);
    if (!rep.all_pass()) {
      for (const auto& v : rep.verdicts)
        if (!v.pass)
          std::fprintf(out, "[FAIL] %s: %s\n", v.name.c_str(),
                       v.detail.c_str());
      std::fprintf(out, "exponent check failed; rerun with --force to solve "
                        "anyway\n");
      return kVerdictFailure;
    }
  }
  Trajectory traj = solve(cfg.problem, cfg.solver);
  write_trajectory(dir / "trajectory.bin", traj, cfg.problem);

  const std::vector<double> r_list = resolve_r_list(cfg);
  EstimateReport rep = instrument(traj, cfg.problem, r_list, {}, cfg.sampling);
  Json j = to_json(rep);
  j["energy_residual"] = energy_residual(traj);
  j["steps_accepted"] = traj.steps_accepted;
  j["steps_rejected"] = traj.steps_rejected;
  write_text_file(dir / "estimate_report.json", j.dump(2) + "\n");

  CsvWriter csv;
  csv.row_strings({"t", "l2_sq", "dissipation_accum", "work_accum",
                   "defect_accum", "ut_sq"});
  for (const auto& s : traj.snapshots)
    csv.row({s.t, s.c.norm2_sq(), s.dissipation_accum, s.work_accum,
             s.defect_accum, s.dc_dt.c.empty() ? 0.0 : s.dc_dt.norm2_sq()});
  write_text_file(dir / "monitors.csv", csv.text());

  std::fprintf(out, "solve: %ld accepted steps, %ld rejected; residual %.3g\n",
               traj.steps_accepted, traj.steps_rejected,
               energy_residual(traj));
  return kOk;
}

/// sweep: one solve per value on the configured axis, boundedness verdict
/// per monitored field; per-run failures are recorded and the sweep
/// continues.
inline int cmd_sweep(const RunConfig& cfg, const Options& opt,
                     std::FILE* out = stdout) {
  const auto dir = detail::ensure_out_dir(cfg, opt);
  if (cfg.sweep_axis.empty() || cfg.sweep_values.empty()) {
    std::fprintf(out, "sweep: config must set sweep.axis and sweep.values\n");
    return kUsageError;
  }
  SweepAxis axis;
  if (cfg.sweep_axis == "epsilon")
    axis = SweepAxis::kEpsilon;
  else if (cfg.sweep_axis == "modes")
    axis = SweepAxis::kModes;
  else {
    std::fprintf(out, "sweep: axis must be 'epsilon' or 'modes'\n");
    return kUsageError;
  }
  const int threads = opt.threads > 0 ? opt.threads : cfg.threads;
  auto results = sweep(cfg.problem, cfg.solver, axis, cfg.sweep_values,
                       threads);

  const std::vector<double> r_list = resolve_r_list(cfg);
  std::vector<EstimateReport> reports;
  std::vector<double> ok_values;
  Json errors = Json::array();
  for (const auto& r : results) {
    if (!r.error.empty() || !r.trajectory) {
      Json e;
      e["value"] = r.value;
      e["error"] = r.error;
      errors.push_back(e);
      continue;
    }
    Problem p = cfg.problem;
    if (axis == SweepAxis::kEpsilon) p.epsilon = r.value;
    reports.push_back(
        instrument(*r.trajectory, p, r_list, {}, cfg.sampling));
    ok_values.push_back(r.value);
  }

  if (!reports.empty()) {
    const auto names = detail::report_field_names(reports.front());
    CsvWriter csv;
    {
      std::vector<std::string> head = {"value"};
      head.insert(head.end(), names.begin(), names.end());
      head.push_back("data_bound");
      csv.row_strings(head);
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::vector<double> row = {ok_values[i]};
      for (const auto& n : names) row.push_back(report_field(reports[i], n));
      row.push_back(reports[i].data_bound);
      csv.row(row);
    }
    write_text_file(dir / "sweep.csv", csv.text());

    Json verdicts = Json::array();
    bool all_pass = true;
    if (reports.size() >= 3) {
      std::vector<double> bounds;
      for (const auto& rep : reports) bounds.push_back(rep.data_bound);
      for (const auto& n : names) {
        std::vector<double> values;
        for (const auto& rep : reports) values.push_back(report_field(rep, n));
        TrendVerdict v = boundedness_verdict(values, bounds, cfg.slack);
        Json jv;
        jv["field"] = n;
        jv["pass"] = v.pass;
        jv["max_rel_variation"] = v.max_rel_variation;
        jv["monotone_divergence"] = v.monotone_divergence;
        jv["ratio_to_data_bound"] = v.ratio_to_data_bound;
        verdicts.push_back(jv);
        all_pass = all_pass && v.pass;
        std::fprintf(out, "[%s] %s: %s\n", v.pass ? "PASS" : "FAIL",
                     n.c_str(), v.detail.c_str());
      }
    }
    Json j;
    j["axis"] = cfg.sweep_axis;
    j["values"] = cfg.sweep_values;
    j["verdicts"] = verdicts;
    j["failures"] = errors;
    write_text_file(dir / "verdicts.json", j.dump(2) + "\n");
    if (!errors.empty()) return kRuntimeFailure;
    return all_pass ? kOk : kVerdictFailure;
  }
  Json j;
  j["axis"] = cfg.sweep_axis;
  j["values"] = cfg.sweep_values;
  j["verdicts"] = Json::array();
  j["failures"] = errors;
  write_text_file(dir / "verdicts.json", j.dump(2) + "\n");
  return kRuntimeFailure;
}

struct MmsRow {
  int modes = 0;
  double l2_qt_error = 0.0;
  double observed_order = 0.0;
};

/// Core of the manufactured-solution study: derive the forcing for u_exact,
/// run the mode sweep, and measure L2(Q_T) errors on a fixed measurement
/// grid. The step tolerance is tightened with the mode count
/// (tol * (m_min/m)^power) so the time error refines along with space.
inline std::vector<MmsRow> run_mms(const RunConfig& cfg,
                                   const FieldExpr& u_exact) {
  Problem prob = cfg.problem;
  prob.forcing = manufactured_forcing(u_exact, prob);
  prob.initial = u_exact.at_time(0.0);

  std::vector<int> mode_list = cfg.mms_modes;
  if (mode_list.empty()) mode_list = {4, 8, 16};
  const int m_min = *std::min_element(mode_list.begin(), mode_list.end());

  const int dim = prob.domain.dim();
  GridPtr measure_grid = make_grid(
      prob.domain,
      std::vector<int>(static_cast<std::size_t>(dim), cfg.mms_measure_grid));
  FieldTape exact_tape(u_exact);

  std::vector<MmsRow> rows;
  for (int m : mode_list) {
    SolverConfig scfg = cfg.solver;
    scfg.modes.assign(static_cast<std::size_t>(dim), m);
    scfg.grid.assign(static_cast<std::size_t>(dim),
                     std::max(cfg.mms_grid_factor * m, 9));
    scfg.tol = cfg.solver.tol *
               std::pow(static_cast<double>(m_min) / m, cfg.mms_tol_scale_power);
    Trajectory traj = solve(prob, scfg);

    BasisTransform basis(measure_grid, scfg.modes);
    std::vector<double> err_t(traj.snapshots.size());
    std::vector<double> uh(measure_grid->size()), ue(measure_grid->size());
    std::vector<std::vector<double>> scratch;
    std::vector<double> times;
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
      const auto& snap = traj.snapshots[s];
      times.push_back(snap.t);
      basis.eval(snap.c, DerivSpec::none(), uh);
      exact_tape.eval_into(measure_grid->coords(), snap.t, ue, scratch);
      for (std::size_t g = 0; g < uh.size(); ++g) {
        const double d = uh[g] - ue[g];
        uh[g] = d * d;
      }
      err_t[s] = measure_grid->integrate(uh);
    }
    MmsRow row;
    row.modes = m;
    row.l2_qt_error = std::sqrt(trapezoid(times, err_t));
    if (!rows.empty() && rows.back().l2_qt_error > 0.0 &&
        row.l2_qt_error > 0.0)
      row.observed_order =
          std::log(rows.back().l2_qt_error / row.l2_qt_error) /
          std::log(static_cast<double>(m) / rows.back().modes);
    rows.push_back(row);
  }
  return rows;
}

/// mms: manufactured-solution convergence table.
inline int cmd_mms(const RunConfig& cfg, const Options& opt,
                   std::FILE* out = stdout) {
  const auto dir = detail::ensure_out_dir(cfg, opt);
  if (cfg.mms_u_exact.empty()) {
    std::fprintf(out, "mms: config must set mms.u_exact\n");
    return kUsageError;
  }
  const FieldExpr u_exact = FieldExpr::parse(cfg.mms_u_exact);
  const auto rows = run_mms(cfg, u_exact);
  CsvWriter csv;
  csv.row_strings({"modes", "l2_qt_error", "observed_order"});
  for (const auto& r : rows)
    csv.row({static_cast<double>(r.modes), r.l2_qt_error, r.observed_order});
  write_text_file(dir / "mms.csv", csv.text());
  for (const auto& r : rows)
    std::fprintf(out, "m = %3d  L2(QT) error = %.6e  order = %.2f\n", r.modes,
                 r.l2_qt_error, r.observed_order);
  return kOk;
}

/// verify: run the cross-module property suites with the configured seed;
/// exit 0 iff every selected property passes (empty selection is a no-op).
inline int cmd_verify(const RunConfig& cfg, const Options& opt,
                      std::FILE* out = stdout) {
  const std::uint64_t seed = opt.seed != 0 ? opt.seed : cfg.seed;
  if (cfg.verify_suites.empty()) {
    std::fprintf(out, "verify: empty suite selection, nothing to run\n");
    return kOk;
  }
  const auto results =
      run_property_suites(cfg.verify_suites, seed, cfg.verify_tols);
  bool all = true;
  for (const auto& r : results) {
    std::fprintf(out, "[%s] %s: %s\n", r.pass ? "PASS" : "FAIL",
                 r.name.c_str(), r.detail.c_str());
    all = all && r.pass;
  }
  std::fprintf(out, "%zu properties, %s\n", results.size(),
               all ? "all passed" : "FAILURES present");
  return all ? kOk : kVerdictFailure;
}

}  // namespace anisospec::cli
