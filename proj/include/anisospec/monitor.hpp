#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anisospec/basis.hpp"
#include "anisospec/common.hpp"
#include "anisospec/exponents.hpp"
#include "anisospec/solver.hpp"

namespace anisospec {

/// Every quantity appearing in the uniform a priori estimates, computed from
/// a trajectory: the L2 and gradient sup-norms, the weighted dissipation and
/// Hessian integrals, higher-integrability integrals for a list of margins
/// r, the W^{1,2}(Q_T) norms of the weighted gradients
/// V_i = (eps^2 + |D_i u|^2)^{(p_i-2)/4} D_i u, and the data-side bound they
/// are measured against. Unknown constants are never asserted; consumers
/// compare ratios and trends only.
struct EstimateReport {
  std::vector<double> t_grid;
  double sup_L2 = 0.0;       // sup_t ||u||_2^2
  double dissipation = 0.0;  // sum_i int int (eps^2+|D_i u|^2)^{(p_i-2)/2} |D_i u|^2
  double ut_L2 = 0.0;        // ||u_t||^2_{2,Q_T}
  double sup_modular = 0.0;  // sup_t sum_i int (eps^2+|D_i u|^2)^{p_i/2}
  double hessian_weighted = 0.0;
  std::vector<std::pair<double, double>> higher_int;  // (r, value)
  std::vector<double> second_order_W12;               // per direction i
  double data_bound = 1.0;
  // Modular of the second derivatives, logged only when every direction is
  // fast (all sampled p_j < 2).
  std::optional<double> second_der_fast_modular;
};

namespace detail {

inline std::vector<int> monitor_grid_shape(const std::vector<int>& modes) {
  std::vector<int> g(modes.size());
  for (std::size_t a = 0; a < modes.size(); ++a)
    g[a] = std::max(3 * modes[a], 9);
  return g;
}

}  // namespace detail

/// Admissible higher-integrability margin r* for a problem, from the sampled
/// anisotropy gap mu.
inline double admissible_r_star(const Problem& prob,
                                const SamplingGrid& sampling = {32, 32}) {
  ExponentField field;
  field.components = prob.exponents;
  const double mu =
      mu_gap(field, prob.domain, prob.horizon, sampling);
  return r_star(std::max(mu, 1.0), prob.domain.dim());
}

/// Fill an EstimateReport from trajectory snapshots. Spatial derivatives are
/// evaluated analytically from the coefficients; time integrals use the
/// trapezoid rule over snapshots; d/dt of V_i uses central differences
/// (one-sided at the endpoints).
inline EstimateReport instrument(const Trajectory& traj, const Problem& prob,
                                 std::span<const double> r_list,
                                 std::vector<int> grid_shape = {},
                                 const SamplingGrid& sampling = {32, 32}) {
  if (traj.snapshots.size() < 2)
    throw InvalidArgument("instrument: need at least two snapshots");
  const double rstar = admissible_r_star(prob, sampling);
  for (double r : r_list)
    if (!(r > 0.0) || !(r < rstar))
      throw InvalidArgument(
          "instrument: r = " + std::to_string(r) +
          " outside the admissible higher-integrability interval (0, " +
          std::to_string(rstar) + ")");

  const auto& modes = traj.snapshots.front().c.modes;
  if (grid_shape.empty()) grid_shape = detail::monitor_grid_shape(modes);
  GridPtr grid = make_grid(prob.domain, grid_shape);
  BasisTransform basis(grid, modes);
  const int dim = prob.domain.dim();
  const std::size_t n = grid->size();
  const double eps = prob.epsilon;

  std::vector<FieldTape> p_tapes, dp_tapes;  // p_i and D_j p_i, row-major i*dim+j
  for (int i = 0; i < dim; ++i)
    p_tapes.emplace_back(prob.exponents[static_cast<std::size_t>(i)]);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      dp_tapes.emplace_back(
          prob.exponents[static_cast<std::size_t>(i)].derivative(j));

  const std::size_t n_snap = traj.snapshots.size();
  EstimateReport rep;
  rep.t_grid.reserve(n_snap);
  std::vector<double> diss_t(n_snap), modular_t(n_snap), hess_t(n_snap),
      ut_t(n_snap), l2_t(n_snap);
  std::vector<std::vector<double>> hi_t(r_list.size(),
                                        std::vector<double>(n_snap));
  // V_i nodal values per snapshot (for the time-derivative part) and the
  // spatial part of the W^{1,2} integrand per snapshot.
  std::vector<std::vector<std::vector<double>>> V(
      static_cast<std::size_t>(dim),
      std::vector<std::vector<double>>(n_snap));
  std::vector<std::vector<double>> V_spatial(
      static_cast<std::size_t>(dim), std::vector<double>(n_snap, 0.0));
  std::vector<double> fast_mod_t(n_snap, 0.0);

  bool all_fast = true;

  std::vector<double> du(n), d2(n), p(n), dp(n), integrand(n), tmp(n);
  std::vector<std::vector<double>> scratch;

  for (std::size_t s = 0; s < n_snap; ++s) {
    const Snapshot& snap = traj.snapshots[s];
    const double t = snap.t;
    rep.t_grid.push_back(t);
    l2_t[s] = snap.c.norm2_sq();
    ut_t[s] = snap.dc_dt.c.empty() ? 0.0 : snap.dc_dt.norm2_sq();

    double diss = 0.0, mod = 0.0, hess = 0.0;
    std::vector<double> hi(r_list.size(), 0.0);
    for (int i = 0; i < dim; ++i) {
      basis.eval(snap.c, DerivSpec::first(i), du);
      p_tapes[static_cast<std::size_t>(i)].eval_into(grid->coords(), t, p,
                                                     scratch);
      for (double pv : p)
        if (pv >= 2.0) all_fast = false;
      for (std::size_t g = 0; g < n; ++g) {
        const double w2 = eps * eps + du[g] * du[g];
        integrand[g] = std::pow(w2, 0.5 * (p[g] - 2.0)) * du[g] * du[g];
        tmp[g] = std::pow(w2, 0.5 * p[g]);
      }
      diss += grid->integrate(integrand);
      mod += grid->integrate(tmp);
      for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
        for (std::size_t g = 0; g < n; ++g)
          integrand[g] = std::pow(std::fabs(du[g]), p[g] + r_list[ri]);
        hi[ri] += grid->integrate(integrand);
      }
      // V_i and its spatial derivatives.
      auto& Vi = V[static_cast<std::size_t>(i)][s];
      Vi.resize(n);
      for (std::size_t g = 0; g < n; ++g) {
        const double w2 = eps * eps + du[g] * du[g];
        Vi[g] = std::pow(w2, 0.25 * (p[g] - 2.0)) * du[g];
      }
      double spatial = 0.0;
      for (std::size_t g = 0; g < n; ++g) integrand[g] = Vi[g] * Vi[g];
      spatial += grid->integrate(integrand);
      for (int j = 0; j < dim; ++j) {
        basis.eval(snap.c, DerivSpec::second(i, j), d2);
        dp_tapes[static_cast<std::size_t>(i * dim + j)].eval_into(
            grid->coords(), t, dp, scratch);
        for (std::size_t g = 0; g < n; ++g) {
          const double w2 = eps * eps + du[g] * du[g];
          const double w = std::pow(w2, 0.25 * (p[g] - 2.0));
          const double dV =
              w * d2[g] * (1.0 + 0.5 * (p[g] - 2.0) * du[g] * du[g] / w2) +
              w * du[g] * 0.25 * dp[g] * std::log(w2);
          integrand[g] = dV * dV;
        }
        spatial += grid->integrate(integrand);
        // Weighted Hessian term of the third estimate.
        for (std::size_t g = 0; g < n; ++g) {
          const double w2 = eps * eps + du[g] * du[g];
          integrand[g] = std::pow(w2, 0.5 * (p[g] - 2.0)) * d2[g] * d2[g];
        }
        hess += grid->integrate(integrand);
      }
      V_spatial[static_cast<std::size_t>(i)][s] = spatial;
    }
    diss_t[s] = diss;
    modular_t[s] = mod;
    hess_t[s] = hess;
    for (std::size_t ri = 0; ri < r_list.size(); ++ri)
      hi_t[ri][s] = hi[ri];

    // Fast-diffusion modular log: exponent of the inner (twice-
    // differentiated) direction.
    double fm = 0.0;
    for (int j = 0; j < dim; ++j) {
      p_tapes[static_cast<std::size_t>(j)].eval_into(grid->coords(), t, p,
                                                     scratch);
      for (int i = 0; i < dim; ++i) {
        basis.eval(snap.c, DerivSpec::second(i, j), d2);
        for (std::size_t g = 0; g < n; ++g)
          integrand[g] = std::pow(std::fabs(d2[g]), p[g]);
        fm += grid->integrate(integrand);
      }
    }
    fast_mod_t[s] = fm;
  }

  rep.sup_L2 = *std::max_element(l2_t.begin(), l2_t.end());
  rep.sup_modular = *std::max_element(modular_t.begin(), modular_t.end());
  rep.dissipation = trapezoid(rep.t_grid, diss_t);
  rep.hessian_weighted = trapezoid(rep.t_grid, hess_t);
  rep.ut_L2 = trapezoid(rep.t_grid, ut_t);
  for (std::size_t ri = 0; ri < r_list.size(); ++ri)
    rep.higher_int.emplace_back(r_list[ri], trapezoid(rep.t_grid, hi_t[ri]));

  // W^{1,2}(Q_T) norms of V_i: spatial part by trapezoid; d/dt V_i by
  // central differences over snapshots.
  rep.second_order_W12.resize(static_cast<std::size_t>(dim));
  std::vector<double> vt_t(n_snap);
  std::vector<double> dv(n);
  for (int i = 0; i < dim; ++i) {
    const auto& Vi = V[static_cast<std::size_t>(i)];
    for (std::size_t s = 0; s < n_snap; ++s) {
      const std::size_t lo = s == 0 ? 0 : s - 1;
      const std::size_t hi_idx = s + 1 == n_snap ? s : s + 1;
      const double dt = rep.t_grid[hi_idx] - rep.t_grid[lo];
      for (std::size_t g = 0; g < n; ++g)
        dv[g] = (Vi[hi_idx][g] - Vi[lo][g]) / dt;
      for (std::size_t g = 0; g < n; ++g) dv[g] *= dv[g];
      vt_t[s] = grid->integrate(dv);
    }
    const double time_part = trapezoid(rep.t_grid, vt_t);
    const double spatial_part =
        trapezoid(rep.t_grid, V_spatial[static_cast<std::size_t>(i)]);
    rep.second_order_W12[static_cast<std::size_t>(i)] =
        std::sqrt(spatial_part + time_part);
  }

  if (all_fast)
    rep.second_der_fast_modular = trapezoid(rep.t_grid, fast_mod_t);

  // Data-side bound: 1 + ||f||^2 + ||grad f||^2 over Q_T
  //                  + sum_i int |D_i u_0|^{p_i(x,0)} + ||u_0||^2_{W^{1,2}}.
  {
    double fb = 0.0;
    FieldTape f_tape(prob.forcing);
    std::vector<FieldTape> df_tapes;
    for (int j = 0; j < dim; ++j)
      df_tapes.emplace_back(prob.forcing.derivative(j));
    std::vector<double> fsq_t(n_snap);
    std::vector<double> fv(n);
    for (std::size_t s = 0; s < n_snap; ++s) {
      double acc = 0.0;
      f_tape.eval_into(grid->coords(), rep.t_grid[s], fv, scratch);
      for (std::size_t g = 0; g < n; ++g) integrand[g] = fv[g] * fv[g];
      acc += grid->integrate(integrand);
      for (auto& dft : df_tapes) {
        dft.eval_into(grid->coords(), rep.t_grid[s], fv, scratch);
        for (std::size_t g = 0; g < n; ++g) integrand[g] = fv[g] * fv[g];
        acc += grid->integrate(integrand);
      }
      fsq_t[s] = acc;
    }
    fb += trapezoid(rep.t_grid, fsq_t);

    FieldTape u0_tape(prob.initial);
    std::vector<double> u0(n);
    u0_tape.eval_into(grid->coords(), 0.0, u0, scratch);
    for (std::size_t g = 0; g < n; ++g) integrand[g] = u0[g] * u0[g];
    fb += grid->integrate(integrand);
    for (int i = 0; i < dim; ++i) {
      FieldTape du0_tape(prob.initial.derivative(i));
      du0_tape.eval_into(grid->coords(), 0.0, du, scratch);
      p_tapes[static_cast<std::size_t>(i)].eval_into(grid->coords(), 0.0, p,
                                                     scratch);
      for (std::size_t g = 0; g < n; ++g)
        integrand[g] = du[g] * du[g] +
                       std::pow(std::fabs(du[g]), p[g]);
      fb += grid->integrate(integrand);
    }
    rep.data_bound = 1.0 + fb;
  }

  for (double v : {rep.sup_L2, rep.dissipation, rep.ut_L2, rep.sup_modular,
                   rep.hessian_weighted, rep.data_bound})
    if (!std::isfinite(v))
      throw EvalError("instrument: non-finite monitored quantity");
  return rep;
}

/// Max over snapshot intervals of the defect of the integrated energy
/// identity
///   Delta(1/2 ||u||_2^2) + int int sum_i F_i . D_i u - int int f u = 0,
/// normalized by sup_t ||u||_2^2 + 1. The running integrals come from the
/// solver's per-step Gauss accumulation, so the defect measures time
/// integration error only (the identity is exact for the semi-discrete
/// system).
inline double energy_residual(const Trajectory& traj) {
  if (traj.snapshots.size() < 2)
    throw InvalidArgument("energy_residual: need at least two snapshots");
  double sup = 0.0;
  for (const auto& s : traj.snapshots) sup = std::max(sup, s.c.norm2_sq());
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const auto& a = traj.snapshots[k];
    const auto& b = traj.snapshots[k + 1];
    const double defect = 0.5 * (b.c.norm2_sq() - a.c.norm2_sq()) +
                          (b.dissipation_accum - a.dissipation_accum) -
                          (b.work_accum - a.work_accum);
    worst = std::max(worst, std::fabs(defect));
  }
  return worst / (sup + 1.0);
}

struct ContractionResult {
  bool pass = false;
  double max_increase = 0.0;  // worst distance growth across an interval
  std::vector<double> distance;
};

/// Snapshotwise L2 contraction of two trajectories of the same problem with
/// different initial data: ||u1 - u2||_2(t_{k+1}) <= ||u1 - u2||_2(t_k)
/// within the drift tolerance.
inline ContractionResult contraction_check(const Trajectory& a,
                                           const Trajectory& b,
                                           double drift_tol = 1e-8) {
  if (a.snapshots.size() != b.snapshots.size())
    throw InvalidArgument("contraction_check: misaligned snapshots");
  ContractionResult out;
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    const auto& sa = a.snapshots[s];
    const auto& sb = b.snapshots[s];
    if (std::fabs(sa.t - sb.t) > 1e-12 * (1.0 + std::fabs(sa.t)))
      throw InvalidArgument("contraction_check: misaligned snapshot times");
    if (sa.c.modes != sb.c.modes)
      throw InvalidArgument("contraction_check: mode sets differ");
    double d2 = 0.0;
    for (std::size_t k = 0; k < sa.c.size(); ++k) {
      const double d = sa.c.c[k] - sb.c.c[k];
      d2 += d * d;
    }
    out.distance.push_back(std::sqrt(d2));
  }
  out.pass = true;
  for (std::size_t s = 0; s + 1 < out.distance.size(); ++s) {
    const double inc = out.distance[s + 1] - out.distance[s];
    out.max_increase = std::max(out.max_increase, inc);
    if (inc > drift_tol) out.pass = false;
  }
  return out;
}

struct TrendVerdict {
  bool pass = false;
  double max_rel_variation = 0.0;
  bool monotone_divergence = false;
  double ratio_to_data_bound = 0.0;
  std::string detail;
};

/// Boundedness check over a sweep: the values on the last half of the sweep
/// must vary by at most `slack` (relative) and must not diverge
/// monotonically. Emits the ratio of the last value to its data bound.
inline TrendVerdict boundedness_verdict(std::span<const double> values,
                                        std::span<const double> data_bounds,
                                        double slack = 0.2) {
  if (values.size() < 3)
    throw InvalidArgument("boundedness_verdict: need >= 3 sweep points");
  TrendVerdict out;
  const std::size_t start = values.size() - (values.size() + 1) / 2;
  double lo = values[start], hi = values[start];
  bool increasing = true;
  for (std::size_t i = start; i < values.size(); ++i) {
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
    if (i > start && values[i] <= values[i - 1]) increasing = false;
  }
  const double denom = std::max(std::fabs(lo), 1e-300);
  out.max_rel_variation = (hi - lo) / denom;
  const double last = values[values.size() - 1];
  const double first_half = values[start];
  out.monotone_divergence =
      increasing && (last - first_half) / denom > 0.5 * slack;
  out.pass = out.max_rel_variation <= slack && !out.monotone_divergence;
  out.ratio_to_data_bound =
      data_bounds.empty()
          ? 0.0
          : last / std::max(data_bounds[data_bounds.size() - 1], 1e-300);
  out.detail = "rel variation " + std::to_string(out.max_rel_variation) +
               (out.monotone_divergence ? ", monotone divergence" : "");
  return out;
}

/// Scalar field accessor for sweep verdicts; names match EstimateReport
/// members, with higher_int[k] and second_order_W12[i] indexed forms.
inline double report_field(const EstimateReport& rep, const std::string& name) {
  if (name == "sup_L2") return rep.sup_L2;
  if (name == "dissipation") return rep.dissipation;
  if (name == "ut_L2") return rep.ut_L2;
  if (name == "sup_modular") return rep.sup_modular;
  if (name == "hessian_weighted") return rep.hessian_weighted;
  if (name == "data_bound") return rep.data_bound;
  auto bracket = name.find('[');
  if (bracket != std::string::npos && name.back() == ']') {
    const std::string base = name.substr(0, bracket);
    const std::size_t idx = static_cast<std::size_t>(
        std::stoul(name.substr(bracket + 1, name.size() - bracket - 2)));
    if (base == "higher_int" && idx < rep.higher_int.size())
      return rep.higher_int[idx].second;
    if (base == "second_order_W12" && idx < rep.second_order_W12.size())
      return rep.second_order_W12[idx];
  }
  throw InvalidArgument("report_field: unknown field '" + name + "'");
}

}  // namespace anisospec
