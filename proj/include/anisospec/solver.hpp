#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anisospec/basis.hpp"
#include "anisospec/common.hpp"
#include "anisospec/exponents.hpp"
#include "anisospec/field_expr.hpp"
#include "anisospec/grid.hpp"

namespace anisospec {

/// Regularized directional flux (eps^2 + xi^2)^{(p-2)/2} xi.
/// Finite for all xi when eps > 0; for eps = 0, p < 2, xi = 0 returns 0.
inline double flux(double xi, double p, double eps) {
  if (eps == 0.0 && xi == 0.0) return 0.0;
  return std::pow(eps * eps + xi * xi, 0.5 * (p - 2.0)) * xi;
}

/// Problem data for the regularized anisotropic evolution. The solver always
/// integrates the eps-regularized system; the degenerate limit is studied
/// only through sweeps.
struct Problem {
  RectDomain domain;
  std::vector<FieldExpr> exponents;  // p_1..p_N(x, t)
  FieldExpr forcing;                 // f(x, t)
  FieldExpr initial;                 // u_0(x)
  double horizon = 1.0;              // T
  double epsilon = 1e-2;             // regularization, in (0, 1]

  void check() const {
    if (static_cast<int>(exponents.size()) != domain.dim())
      throw InvalidArgument("Problem: one exponent field per axis required");
    if (!(horizon > 0.0)) throw InvalidArgument("Problem: horizon > 0");
    if (!(epsilon > 0.0))
      throw InvalidArgument(
          "Problem: epsilon > 0 (the degenerate problem is never integrated "
          "directly)");
  }
};

enum class TimeIntegrator { kImexExponential, kExplicitRk };

struct SolverConfig {
  std::vector<int> modes;  // per axis
  std::vector<int> grid;   // nodes per axis; empty -> 3x modes (min 9)
  TimeIntegrator integrator = TimeIntegrator::kImexExponential;
  double dt = 0.0;       // initial step; 0 -> T/1000
  double dt_min = 0.0;   // 0 -> 1e-10 T
  double dt_max = 0.0;   // 0 -> T/50
  double tol = 1e-6;     // accepted local error per step
  double kappa = -1.0;   // imex shift; < 0 -> mean linearized diffusivity
  int snapshots = 100;   // intervals between stored snapshots

  std::vector<int> resolved_grid() const {
    if (!grid.empty()) return grid;
    std::vector<int> g(modes.size());
    for (std::size_t a = 0; a < modes.size(); ++a)
      g[a] = std::max(3 * modes[a], 9);
    return g;
  }
};

struct GalerkinState {
  double t = 0.0;
  SpectralCoeffs c;
  SpectralCoeffs dc_dt;  // last evaluated right-hand side
};

struct Snapshot {
  double t = 0.0;
  SpectralCoeffs c;
  SpectralCoeffs dc_dt;
  // Running integrals accumulated per accepted step (Gauss quadrature on
  // dense output): int_0^t int_Omega sum_j F_j . D_j u dx dt' and
  // int_0^t int_Omega f u dx dt', plus the accumulated absolute defect of
  // the semi-discrete energy identity.
  double dissipation_accum = 0.0;
  double work_accum = 0.0;
  double defect_accum = 0.0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  long steps_accepted = 0;
  long steps_rejected = 0;
  bool aliasing_warning = false;
};

/// Spatial side of the Galerkin system: assembles
///   c'_k = -sum_j (F_j(z, D_j u), D_j psi_k) + (f(., t), psi_k)
/// on a tensor quadrature grid. Holds per-time caches for the exponent and
/// forcing fields; not safe for concurrent use by multiple evolutions.
class GalerkinOperator {
 public:
  GalerkinOperator(const Problem& prob, const SolverConfig& cfg)
      : prob_(prob),
        grid_(make_grid(prob.domain, cfg.resolved_grid())),
        basis_(grid_, cfg.modes),
        lambda_(basis_.eigenvalues()),
        forcing_tape_(prob.forcing),
        forcing_time_dependent_(prob.forcing.depends_on_time()) {
    prob_.check();
    const int dim = prob_.domain.dim();
    for (int j = 0; j < dim; ++j) {
      exp_tapes_.emplace_back(prob_.exponents[static_cast<std::size_t>(j)]);
      exp_time_dependent_.push_back(
          prob_.exponents[static_cast<std::size_t>(j)].depends_on_time());
    }
    const std::size_t n = grid_->size();
    exp_values_.assign(static_cast<std::size_t>(dim),
                       std::vector<double>(n));
    exp_cache_t_.assign(static_cast<std::size_t>(dim),
                        std::numeric_limits<double>::quiet_NaN());
    forcing_values_.assign(n, 0.0);
    forcing_cache_t_ = std::numeric_limits<double>::quiet_NaN();
    grad_.assign(n, 0.0);
    fluxv_.assign(n, 0.0);
  }

  const GridPtr& grid() const { return grid_; }
  const BasisTransform& basis() const { return basis_; }
  const std::vector<double>& eigenvalues() const { return lambda_; }
  const Problem& problem() const { return prob_; }

  SpectralCoeffs project_initial(bool* aliasing = nullptr) {
    GridFunction u0 = GridFunction::sample(grid_, prob_.initial, 0.0);
    return basis_.project(u0.values, DerivSpec::none(), aliasing);
  }

  SpectralCoeffs rhs(const SpectralCoeffs& c, double t) {
    if (!c.finite()) throw SolverError("rhs: non-finite coefficients");
    const int dim = prob_.domain.dim();
    const std::size_t n = grid_->size();
    SpectralCoeffs out = forcing_projection(t);
    for (int j = 0; j < dim; ++j) {
      basis_.eval(c, DerivSpec::first(j), grad_);
      const auto& p = exponent_values(j, t);
      const double eps = prob_.epsilon;
      for (std::size_t g = 0; g < n; ++g)
        fluxv_[g] = flux(grad_[g], p[g], eps);
      for (std::size_t g = 0; g < n; ++g)
        if (!std::isfinite(fluxv_[g]))
          throw SolverError("rhs: non-finite flux (blowup detection)");
      SpectralCoeffs proj = basis_.project(fluxv_, DerivSpec::first(j));
      for (std::size_t k = 0; k < out.c.size(); ++k) out.c[k] -= proj.c[k];
    }
    return out;
  }

  struct EnergyRate {
    double dissipation = 0.0;  // int_Omega sum_j F_j . D_j u dx
    double work = 0.0;         // int_Omega f u dx
  };

  EnergyRate energy_rate(const SpectralCoeffs& c, double t) {
    const int dim = prob_.domain.dim();
    const std::size_t n = grid_->size();
    EnergyRate rate;
    std::vector<double> integrand(n);
    for (int j = 0; j < dim; ++j) {
      basis_.eval(c, DerivSpec::first(j), grad_);
      const auto& p = exponent_values(j, t);
      const double eps = prob_.epsilon;
      for (std::size_t g = 0; g < n; ++g)
        integrand[g] = flux(grad_[g], p[g], eps) * grad_[g];
      rate.dissipation += grid_->integrate(integrand);
    }
    basis_.eval(c, DerivSpec::none(), grad_);
    const auto& f = forcing_values(t);
    for (std::size_t g = 0; g < n; ++g) integrand[g] = f[g] * grad_[g];
    rate.work = grid_->integrate(integrand);
    return rate;
  }

  /// Mean over grid and directions of the linearized diffusivity
  /// (eps^2 + (D_j u_0)^2)^{(p_j(x,0)-2)/2}, clamped to [1e-3, 1e3].
  double default_kappa() {
    const int dim = prob_.domain.dim();
    const std::size_t n = grid_->size();
    SpectralCoeffs c0 = project_initial();
    double acc = 0.0;
    for (int j = 0; j < dim; ++j) {
      basis_.eval(c0, DerivSpec::first(j), grad_);
      const auto& p = exponent_values(j, 0.0);
      std::vector<double> a(n);
      for (std::size_t g = 0; g < n; ++g)
        a[g] = std::pow(prob_.epsilon * prob_.epsilon + grad_[g] * grad_[g],
                        0.5 * (p[g] - 2.0));
      acc += pairwise_sum(a) / static_cast<double>(n);
    }
    acc /= static_cast<double>(dim);
    return std::clamp(acc, 1e-3, 1e3);
  }

  const std::vector<double>& exponent_values(int j, double t) {
    auto& cache_t = exp_cache_t_[static_cast<std::size_t>(j)];
    auto& vals = exp_values_[static_cast<std::size_t>(j)];
    if (std::isnan(cache_t) ||
        (exp_time_dependent_[static_cast<std::size_t>(j)] && cache_t != t)) {
      exp_tapes_[static_cast<std::size_t>(j)].eval_into(grid_->coords(), t,
                                                        vals, scratch_);
      cache_t = t;
    }
    return vals;
  }

  const std::vector<double>& forcing_values(double t) {
    if (std::isnan(forcing_cache_t_) ||
        (forcing_time_dependent_ && forcing_cache_t_ != t)) {
      forcing_tape_.eval_into(grid_->coords(), t, forcing_values_, scratch_);
      forcing_cache_t_ = t;
    }
    return forcing_values_;
  }

 private:
  SpectralCoeffs forcing_projection(double t) {
    if (!forcing_proj_ || (forcing_time_dependent_ && forcing_proj_t_ != t)) {
      forcing_proj_ = basis_.project(forcing_values(t));
      forcing_proj_t_ = t;
    }
    return *forcing_proj_;
  }

  Problem prob_;
  GridPtr grid_;
  BasisTransform basis_;
  std::vector<double> lambda_;
  std::vector<FieldTape> exp_tapes_;
  std::vector<bool> exp_time_dependent_;
  FieldTape forcing_tape_;
  bool forcing_time_dependent_;

  std::vector<std::vector<double>> exp_values_;
  std::vector<double> exp_cache_t_;
  std::vector<double> forcing_values_;
  double forcing_cache_t_;
  std::optional<SpectralCoeffs> forcing_proj_;
  double forcing_proj_t_ = 0.0;
  std::vector<double> grad_, fluxv_;
  std::vector<std::vector<double>> scratch_;
};

namespace detail {

inline double phi1(double z) {
  if (std::fabs(z) < 1e-4) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return std::expm1(z) / z;
}

inline double phi2(double z) {
  if (std::fabs(z) < 1e-4)
    return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0));
  return (std::expm1(z) - z) / (z * z);
}

// 3-point Gauss-Legendre on (0,1) for the per-step energy integrals.
inline constexpr double kGaussNode[3] = {0.1127016653792583, 0.5,
                                         0.8872983346207417};
inline constexpr double kGaussWeight[3] = {5.0 / 18.0, 8.0 / 18.0,
                                           5.0 / 18.0};

}  // namespace detail

/// Adaptive time stepper for the Galerkin coefficient system.
///
/// imex-exponential: write c' = -kappa lambda c + [kappa lambda c + R(c,t)],
/// integrate the diagonal linear part exactly and the remainder with a
/// second-order exponential two-stage rule; the embedded first-order
/// predictor provides the error estimate. In the linear heat case with
/// kappa = 1 the remainder vanishes and each step is exact.
///
/// explicit-rk: Bogacki-Shampine 3(2) embedded pair.
///
/// A step is rejected and halved when the error estimate exceeds the
/// tolerance or any coefficient becomes non-finite; underflow below dt_min
/// raises a stiffness failure. Over each accepted step the dissipation and
/// forcing-work integrals of the energy identity are accumulated with
/// 3-point Gauss quadrature on the integrator's dense output, and the
/// identity defect |Delta(1/2 ||u||^2) + q_diss - q_work| is recorded.
class TimeStepper {
 public:
  TimeStepper(GalerkinOperator& op, const SolverConfig& cfg)
      : op_(op), cfg_(cfg) {
    const double T = op.problem().horizon;
    dt_ = cfg.dt > 0.0 ? cfg.dt : T / 1000.0;
    dt_min_ = cfg.dt_min > 0.0 ? cfg.dt_min : 1e-10 * T;
    dt_max_ = cfg.dt_max > 0.0 ? cfg.dt_max : T / 50.0;
    dt_ = std::clamp(dt_, dt_min_, dt_max_);
    if (cfg.integrator == TimeIntegrator::kImexExponential)
      kappa_ = cfg.kappa >= 0.0 ? cfg.kappa : op.default_kappa();
  }

  double current_dt() const { return dt_; }
  double kappa() const { return kappa_; }
  double dissipation_accum() const { return diss_accum_; }
  double work_accum() const { return work_accum_; }
  double defect_accum() const { return defect_accum_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

  /// Advance the state by one accepted step of size at most dt_cap.
  void step(GalerkinState& s, double dt_cap) {
    for (;;) {
      const double h = std::min(dt_, dt_cap);
      bool ok = cfg_.integrator == TimeIntegrator::kImexExponential
                    ? try_step_imex(s, h)
                    : try_step_rk(s, h);
      if (ok) {
        ++accepted_;
        return;
      }
      ++rejected_;
      if (h <= dt_min_ * (1.0 + 1e-12))
        throw SolverError(
            "stiffness failure: step size underflow at t = " +
            std::to_string(s.t) + " (dt = " + std::to_string(h) +
            ", dt_min = " + std::to_string(dt_min_) +
            "); tighten dt_min or switch integrator");
      dt_ = std::max(0.5 * h, dt_min_);
    }
  }

 private:
  static void check_blowup(const SpectralCoeffs& c, double t) {
    for (double v : c.c)
      if (!std::isfinite(v) || std::fabs(v) > 1e12)
        throw SolverError(
            "blowup detected at t = " + std::to_string(t) +
            ": coefficient magnitude exceeds 1e12 (the continuous problem is "
            "dissipative; refine the discretization)");
  }

  // G(c, t) = rhs(c, t) + kappa lambda c, the explicit remainder.
  SpectralCoeffs remainder(const SpectralCoeffs& c, double t) {
    SpectralCoeffs g = op_.rhs(c, t);
    const auto& lam = op_.eigenvalues();
    for (std::size_t k = 0; k < g.c.size(); ++k)
      g.c[k] += kappa_ * lam[k] * c.c[k];
    return g;
  }

  bool finite(const SpectralCoeffs& c) const { return c.finite(); }

  bool try_step_imex(GalerkinState& s, double h) {
    const auto& lam = op_.eigenvalues();
    const std::size_t m = s.c.size();
    // Failures at the accepted state are genuine blowup and propagate;
    // failures at trial states only reject the step.
    SpectralCoeffs g0 = remainder(s.c, s.t);

    SpectralCoeffs pred(s.c.modes);
    for (std::size_t k = 0; k < m; ++k) {
      const double z = -kappa_ * lam[k] * h;
      pred.c[k] = std::exp(z) * s.c.c[k] + h * detail::phi1(z) * g0.c[k];
    }
    if (!finite(pred)) return false;
    SpectralCoeffs g1;
    try {
      g1 = remainder(pred, s.t + h);
    } catch (const SolverError&) {
      return false;
    }

    SpectralCoeffs next(s.c.modes);
    double err = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double z = -kappa_ * lam[k] * h;
      const double corr = h * detail::phi2(z) * (g1.c[k] - g0.c[k]);
      next.c[k] = pred.c[k] + corr;
      err = std::max(err, std::fabs(corr));
    }
    if (!finite(next) || !(err == err)) return false;
    if (err > cfg_.tol) {
      return false;
    }
    // Dense output: c(theta) = e^{theta h L} c0 + theta h phi1 G0
    //               + theta^2 h phi2 (G1 - G0).
    accumulate_energy(h, s, [&](double theta, SpectralCoeffs& out) {
      for (std::size_t k = 0; k < m; ++k) {
        const double z = -kappa_ * lam[k] * theta * h;
        out.c[k] = std::exp(z) * s.c.c[k] +
                   theta * h * detail::phi1(z) * g0.c[k] +
                   theta * theta * h * detail::phi2(z) * (g1.c[k] - g0.c[k]);
      }
    }, next);
    s.t += h;
    s.c = std::move(next);
    s.dc_dt = SpectralCoeffs();  // refreshed on demand
    check_blowup(s.c, s.t);
    grow(err);
    return true;
  }

  bool try_step_rk(GalerkinState& s, double h) {
    const std::size_t m = s.c.size();
    if (!k1_valid_) {
      k1_ = op_.rhs(s.c, s.t);
      k1_valid_ = true;
    }
    auto axpy = [&](const SpectralCoeffs& base, double a,
                    const SpectralCoeffs& d) {
      SpectralCoeffs out = base;
      for (std::size_t k = 0; k < m; ++k) out.c[k] += a * d.c[k];
      return out;
    };
    SpectralCoeffs k2, k3, k4, next;
    try {
      SpectralCoeffs y2 = axpy(s.c, 0.5 * h, k1_);
      if (!finite(y2)) return invalidate_and_reject();
      k2 = op_.rhs(y2, s.t + 0.5 * h);
      SpectralCoeffs y3 = axpy(s.c, 0.75 * h, k2);
      if (!finite(y3)) return invalidate_and_reject();
      k3 = op_.rhs(y3, s.t + 0.75 * h);
      next = SpectralCoeffs(s.c.modes);
      for (std::size_t k = 0; k < m; ++k)
        next.c[k] = s.c.c[k] + h * (2.0 * k1_.c[k] + 3.0 * k2.c[k] +
                                    4.0 * k3.c[k]) / 9.0;
      if (!finite(next)) return invalidate_and_reject();
      k4 = op_.rhs(next, s.t + h);
    } catch (const SolverError&) {
      return invalidate_and_reject();  // non-finite trial stage
    }
    double err = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double e = h * (-5.0 / 72.0 * k1_.c[k] + k2.c[k] / 12.0 +
                            k3.c[k] / 9.0 - k4.c[k] / 8.0);
      err = std::max(err, std::fabs(e));
    }
    if (!(err == err)) return invalidate_and_reject();
    if (err > cfg_.tol) return invalidate_and_reject();

    // Cubic Hermite dense output from endpoint values and slopes.
    const SpectralCoeffs& c0 = s.c;
    accumulate_energy(h, s, [&](double theta, SpectralCoeffs& out) {
      const double t2 = theta * theta, t3 = t2 * theta;
      const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
      const double h10 = t3 - 2.0 * t2 + theta;
      const double h01 = -2.0 * t3 + 3.0 * t2;
      const double h11 = t3 - t2;
      for (std::size_t k = 0; k < m; ++k)
        out.c[k] = h00 * c0.c[k] + h10 * h * k1_.c[k] + h01 * next.c[k] +
                   h11 * h * k4.c[k];
    }, next);

    s.t += h;
    s.c = std::move(next);
    s.dc_dt = SpectralCoeffs();
    check_blowup(s.c, s.t);
    k1_ = std::move(k4);  // FSAL
    grow(err);
    return true;
  }

  bool invalidate_and_reject() {
    k1_valid_ = false;
    return false;
  }

  template <typename DenseOutput>
  void accumulate_energy(double h, const GalerkinState& s,
                         DenseOutput&& dense, const SpectralCoeffs& next) {
    SpectralCoeffs stage(s.c.modes);
    double q_diss = 0.0, q_work = 0.0;
    for (int g = 0; g < 3; ++g) {
      const double theta = detail::kGaussNode[g];
      dense(theta, stage);
      auto rate = op_.energy_rate(stage, s.t + theta * h);
      q_diss += h * detail::kGaussWeight[g] * rate.dissipation;
      q_work += h * detail::kGaussWeight[g] * rate.work;
    }
    diss_accum_ += q_diss;
    work_accum_ += q_work;
    const double defect =
        0.5 * (next.norm2_sq() - s.c.norm2_sq()) + q_diss - q_work;
    defect_accum_ += std::fabs(defect);
  }

  void grow(double err) {
    const double floor = 1e-300;
    double fac = 0.9 * std::sqrt(cfg_.tol / std::max(err, floor));
    fac = std::clamp(fac, 0.5, 2.0);
    dt_ = std::clamp(dt_ * fac, dt_min_, dt_max_);
  }

  GalerkinOperator& op_;
  SolverConfig cfg_;
  double dt_ = 0.0, dt_min_ = 0.0, dt_max_ = 0.0;
  double kappa_ = 1.0;
  double diss_accum_ = 0.0, work_accum_ = 0.0, defect_accum_ = 0.0;
  long accepted_ = 0, rejected_ = 0;
  SpectralCoeffs k1_;
  bool k1_valid_ = false;
};

/// Integrate the Galerkin system from 0 to T, recording snapshots at
/// equally spaced times (hit exactly) together with the running energy
/// accumulators. Deterministic for a fixed configuration.
inline Trajectory solve(const Problem& prob, const SolverConfig& cfg) {
  prob.check();
  GalerkinOperator op(prob, cfg);
  TimeStepper stepper(op, cfg);

  Trajectory traj;
  GalerkinState s;
  bool aliasing = false;
  s.c = op.project_initial(&aliasing);
  traj.aliasing_warning = aliasing;
  s.t = 0.0;

  const int n_snap = std::max(cfg.snapshots, 1);
  const std::vector<double> times = linspace(0.0, prob.horizon, n_snap + 1);

  auto record = [&](double t) {
    Snapshot snap;
    snap.t = t;
    snap.c = s.c;
    snap.dc_dt = op.rhs(s.c, t);
    snap.dissipation_accum = stepper.dissipation_accum();
    snap.work_accum = stepper.work_accum();
    snap.defect_accum = stepper.defect_accum();
    traj.snapshots.push_back(std::move(snap));
  };

  record(0.0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double target = times[i];
    while (s.t < target - 1e-13 * prob.horizon) {
      stepper.step(s, target - s.t);
    }
    s.t = target;  // clip accumulated roundoff
    record(target);
  }
  traj.steps_accepted = stepper.accepted();
  traj.steps_rejected = stepper.rejected();
  return traj;
}

/// Symbolic manufactured forcing f = u_t - sum_j D_j F_j(z, D_j u) for a
/// chosen exact solution. The divergence is produced by exact symbolic
/// differentiation, so the log term arising when p_j depends on x_j comes
/// out of the general power rule. u_exact must vanish on the boundary
/// (checked by sampling).
inline FieldExpr manufactured_forcing(const FieldExpr& u_exact,
                                      const Problem& prob_without_f) {
  const Problem& prob = prob_without_f;
  const int dim = prob.domain.dim();

  // Boundary check by sampling each face.
  {
    double interior_scale = 0.0;
    const int ns = 9;
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a)
      axes[static_cast<std::size_t>(a)] =
          linspace(0.0, prob.domain.lengths[static_cast<std::size_t>(a)], ns);
    const auto ts = linspace(0.0, prob.horizon, 5);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(ns);
    for (std::size_t f = 0; f < total; ++f) {
      for (int a = 0; a < dim; ++a)
        x[static_cast<std::size_t>(a)] =
            axes[static_cast<std::size_t>(a)]
                [static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      for (double t : ts)
        interior_scale = std::max(interior_scale,
                                  std::fabs(u_exact.eval(x, t)));
      for (int a = dim - 1; a >= 0; --a) {
        if (++idx[static_cast<std::size_t>(a)] < ns) break;
        idx[static_cast<std::size_t>(a)] = 0;
      }
    }
    const double tol = 1e-8 * (1.0 + interior_scale);
    for (int face_axis = 0; face_axis < dim; ++face_axis) {
      for (double xa : {0.0, prob.domain.lengths[static_cast<std::size_t>(
                                 face_axis)]}) {
        std::fill(idx.begin(), idx.end(), 0);
        std::size_t face_total = 1;
        for (int a = 0; a < dim; ++a)
          if (a != face_axis) face_total *= static_cast<std::size_t>(ns);
        for (std::size_t f = 0; f < face_total; ++f) {
          std::size_t rem = f;
          for (int a = dim - 1; a >= 0; --a) {
            if (a == face_axis) {
              x[static_cast<std::size_t>(a)] = xa;
              continue;
            }
            x[static_cast<std::size_t>(a)] =
                axes[static_cast<std::size_t>(a)][rem % ns];
            rem /= static_cast<std::size_t>(ns);
          }
          for (double t : ts) {
            if (std::fabs(u_exact.eval(x, t)) > tol)
              throw InvalidArgument(
                  "manufactured_forcing: u_exact does not vanish on the "
                  "boundary (face x" +
                  std::to_string(face_axis + 1) + " = " + std::to_string(xa) +
                  ")");
          }
        }
      }
    }
  }

  FieldExpr f = u_exact.derivative(kTimeVar);
  const FieldExpr eps2 = FieldExpr::constant(prob.epsilon * prob.epsilon);
  const FieldExpr two = FieldExpr::constant(2.0);
  for (int j = 0; j < dim; ++j) {
    const FieldExpr xi = u_exact.derivative(j);
    const FieldExpr base = eps2 + xi * xi;
    const FieldExpr expo =
        (prob.exponents[static_cast<std::size_t>(j)] - two) /
        FieldExpr::constant(2.0);
    const FieldExpr flux_j = FieldExpr::pow(base, expo) * xi;
    f = f - flux_j.derivative(j);
  }
  return f;
}

enum class SweepAxis { kEpsilon, kModes };

struct SweepResult {
  double value = 0.0;
  std::optional<Trajectory> trajectory;
  std::string error;  // empty on success
};

/// Run solve() per sweep value (epsilon or modes-per-axis), concurrently up
/// to max_concurrency members. Per-run failures are captured, not thrown.
inline std::vector<SweepResult> sweep(const Problem& prob,
                                      const SolverConfig& cfg, SweepAxis axis,
                                      std::span<const double> values,
                                      int max_concurrency = 1) {
  std::vector<SweepResult> results(values.size());
  auto run_one = [&](std::size_t i) {
    SweepResult r;
    r.value = values[i];
    try {
      Problem p = prob;
      SolverConfig c = cfg;
      if (axis == SweepAxis::kEpsilon) {
        p.epsilon = values[i];
      } else {
        const int m = static_cast<int>(std::lround(values[i]));
        if (m < 1) throw InvalidArgument("sweep: modes must be >= 1");
        c.modes.assign(static_cast<std::size_t>(prob.domain.dim()), m);
        c.grid.clear();  // re-derive from modes
      }
      r.trajectory = solve(p, c);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  };

  const int conc = std::max(1, max_concurrency);
  std::size_t next = 0;
  while (next < values.size()) {
    const std::size_t batch =
        std::min<std::size_t>(static_cast<std::size_t>(conc),
                              values.size() - next);
    std::vector<std::future<SweepResult>> futs;
    futs.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b)
      futs.push_back(std::async(std::launch::async, run_one, next + b));
    for (std::size_t b = 0; b < batch; ++b)
      results[next + b] = futs[b].get();
    next += batch;
  }
  return results;
}

}  // namespace anisospec
