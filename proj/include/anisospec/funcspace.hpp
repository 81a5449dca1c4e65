#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "anisospec/common.hpp"
#include "anisospec/exponents.hpp"
#include "anisospec/grid.hpp"

namespace anisospec {

/// Modular rho_{p(.)}(u) = int |u|^{p(x)} dx by quadrature.
inline double modular(const GridFunction& u, const GridFunction& p) {
  if (u.values.size() != p.values.size())
    throw InvalidArgument("modular: shape mismatch");
  std::vector<double> integrand(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    integrand[i] = std::pow(std::fabs(u.values[i]), p.values[i]);
    if (!std::isfinite(integrand[i]))
      throw EvalError("modular: non-finite contribution at node " +
                      std::to_string(i));
  }
  return u.grid->integrate(integrand);
}

namespace detail {

inline std::pair<double, double> exponent_range(const GridFunction& p) {
  double lo = p.values[0], hi = p.values[0];
  for (double v : p.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

inline double modular_scaled(const GridFunction& u, const GridFunction& p,
                             double lambda) {
  std::vector<double> integrand(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i)
    integrand[i] = std::pow(std::fabs(u.values[i]) / lambda, p.values[i]);
  return u.grid->integrate(integrand);
}

}  // namespace detail

/// Luxemburg norm inf{lambda > 0 : rho(u/lambda) <= 1} by bisection.
///
/// The initial bracket comes from the modular-norm inequalities: the norm
/// lies between rho^{1/p-} and rho^{1/p+} (in either order), scaled outward
/// for safety. lambda -> rho(u/lambda) is strictly decreasing, so bisection
/// converges; iteration stops when |rho(u/lambda) - 1| <= tol.
inline double luxemburg_norm(const GridFunction& u, const GridFunction& p,
                             double tol = 1e-10) {
  if (u.values.size() != p.values.size())
    throw InvalidArgument("luxemburg_norm: shape mismatch");
  if (!(tol > 0.0)) throw InvalidArgument("luxemburg_norm: tol > 0");
  bool zero = true;
  for (double v : u.values) zero = zero && v == 0.0;
  if (zero) return 0.0;

  const auto [p_lo, p_hi] = detail::exponent_range(p);
  if (!(p_lo > 1.0))
    throw InvalidArgument("luxemburg_norm: exponent must be > 1 nodewise");
  const double rho = modular(u, p);
  double lo = std::min(std::pow(rho, 1.0 / p_lo), std::pow(rho, 1.0 / p_hi));
  double hi = std::max(std::pow(rho, 1.0 / p_lo), std::pow(rho, 1.0 / p_hi));
  lo *= 0.5;
  hi *= 2.0;

  // Expand if the scaled bracket still fails to straddle rho(u/lambda) = 1.
  int guard = 0;
  while (detail::modular_scaled(u, p, lo) < 1.0 && guard++ < 80) lo *= 0.5;
  guard = 0;
  while (detail::modular_scaled(u, p, hi) > 1.0 && guard++ < 80) hi *= 2.0;
  if (detail::modular_scaled(u, p, lo) < 1.0 ||
      detail::modular_scaled(u, p, hi) > 1.0)
    throw SolverError("luxemburg_norm: bracket failure, rho(u) = " +
                      std::to_string(rho) + ", bracket [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = detail::modular_scaled(u, p, mid);
    if (std::fabs(r - 1.0) <= tol) return mid;
    if (r > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

/// Classical constant-exponent norm (int |u|^s)^{1/s} by quadrature.
inline double lp_norm(const GridFunction& u, double s) {
  std::vector<double> integrand(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i)
    integrand[i] = std::pow(std::fabs(u.values[i]), s);
  return std::pow(u.grid->integrate(integrand), 1.0 / s);
}

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Generalized Hoelder inequality int|fg| <= 2 ||f||_{p(.)} ||g||_{p'(.)}
/// with the nodewise conjugate exponent p' = p/(p-1).
inline InequalityCheck holder_check(const GridFunction& f,
                                    const GridFunction& g,
                                    const GridFunction& p) {
  if (f.values.size() != g.values.size() ||
      f.values.size() != p.values.size())
    throw InvalidArgument("holder_check: shape mismatch");
  std::vector<double> fg(f.values.size());
  for (std::size_t i = 0; i < fg.size(); ++i)
    fg[i] = std::fabs(f.values[i] * g.values[i]);
  InequalityCheck out;
  out.lhs = f.grid->integrate(fg);
  std::vector<double> conj(p.values.size());
  for (std::size_t i = 0; i < conj.size(); ++i) {
    if (!(p.values[i] > 1.0))
      throw InvalidArgument("holder_check: exponent must be > 1 nodewise");
    conj[i] = p.values[i] / (p.values[i] - 1.0);
  }
  GridFunction pconj(p.grid, std::move(conj));
  out.rhs = 2.0 * luxemburg_norm(f, p) * luxemburg_norm(g, pconj);
  out.pass = out.lhs <= out.rhs + 1e-10;
  return out;
}

/// Modular-norm bounds: min(||u||^{p-}, ||u||^{p+}) <= rho(u) <= max(...).
inline bool norm_modular_bounds_check(const GridFunction& u,
                                      const GridFunction& p,
                                      double rel_tol = 1e-8) {
  const double norm = luxemburg_norm(u, p);
  const double rho = modular(u, p);
  const auto [p_lo, p_hi] = detail::exponent_range(p);
  const double a = std::pow(norm, p_lo);
  const double b = std::pow(norm, p_hi);
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double slack = rel_tol * std::max({lo, hi, rho, 1e-300});
  return lo <= rho + slack && rho <= hi + slack;
}

/// Anisotropic norm sum_i ||D_i u||_{p_i(.)} from nodal gradient components
/// and the exponent fields sampled at a fixed time.
inline double anisotropic_norm(std::span<const GridFunction> grads,
                               std::span<const GridFunction> exponents) {
  if (grads.size() != exponents.size())
    throw InvalidArgument("anisotropic_norm: component count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i)
    s += luxemburg_norm(grads[i], exponents[i]);
  return s;
}

/// Interpolation weight theta = (1/2 - 1/s) / ((N+2)/(2N) - 1/p_h).
inline double interpolation_theta(double s, int dim, double p_h) {
  const double n = static_cast<double>(dim);
  if (!(p_h > 2.0 * n / (n + 2.0)))
    throw InvalidArgument("interpolation_theta: p_h must exceed 2N/(N+2)");
  const double p_h_star = sobolev_conjugate(p_h, dim);
  if (!(s > 2.0) || !(s < p_h_star))
    throw InvalidArgument("interpolation_theta: need 2 < s < p_h*");
  const double theta =
      (0.5 - 1.0 / s) / ((n + 2.0) / (2.0 * n) - 1.0 / p_h);
  if (!(theta > 0.0) || !(theta < 1.0))
    throw InvalidArgument("interpolation_theta: theta outside (0,1)");
  return theta;
}

/// ||u||_s <= ||u||_q^theta ||u||_2^{1-theta} with 1/s = theta/q +
/// (1-theta)/2; holds with constant exactly 1.
inline InequalityCheck interpolation_check(const GridFunction& u, double s,
                                           double q) {
  if (!(s > 2.0) || !(q >= s))
    throw InvalidArgument("interpolation_check: need 2 < s <= q");
  const double theta =
      q == s ? 1.0 : (0.5 - 1.0 / s) / (0.5 - 1.0 / q);
  InequalityCheck out;
  out.lhs = lp_norm(u, s);
  out.rhs = std::pow(lp_norm(u, q), theta) *
            std::pow(lp_norm(u, 2.0), 1.0 - theta);
  out.pass = out.lhs <= out.rhs * (1.0 + 1e-10);
  return out;
}

/// Homogeneity-invariant embedding ratio
/// ||u||_{p_h*} / (sum_i ||D_i u||_{p_i} + ||u||_1) for a constant exponent
/// vector. The embedding constant itself is unknown; only the ratio is
/// monitored. Returns 0 for u == 0. When the Sobolev conjugate is unbounded
/// (N <= p_h) the finite representative p_vee + 2 is used for the numerator.
inline double anisotropic_embedding_ratio(const GridFunction& u,
                                          std::span<const GridFunction> grads,
                                          std::span<const double> p) {
  const int dim = static_cast<int>(p.size());
  if (grads.size() != p.size())
    throw InvalidArgument("anisotropic_embedding_ratio: component mismatch");
  auto [p_vee, p_wedge] = pvee_pwedge(p);
  const double n = static_cast<double>(dim);
  const double p_h = harmonic_mean(p);
  const double p_h_star = sobolev_conjugate(p_h, dim);
  if (!(p_wedge > 2.0 * n / (n + 2.0)) || !(p_vee < p_h_star))
    throw InvalidArgument(
        "anisotropic_embedding_ratio: exponents violate 2N/(N+2) < p^ <= "
        "p^vee < p_h*");
  bool zero = true;
  for (double v : u.values) zero = zero && v == 0.0;
  if (zero) return 0.0;

  const double s = p_h_star == kUnbounded ? p_vee + 2.0 : p_h_star;
  const double num = lp_norm(u, s);
  double den = lp_norm(u, 1.0);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    GridFunction pi = GridFunction::constant(grads[i].grid, p[i]);
    den += luxemburg_norm(grads[i], pi);
  }
  return num / den;
}

}  // namespace anisospec
