#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "anisospec/common.hpp"
#include "anisospec/field_expr.hpp"
#include "anisospec/grid.hpp"

namespace anisospec {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// The variable exponent fields p_1..p_N on the closed space-time cylinder,
/// together with a Lipschitz bound and sampled per-component ranges.
struct ExponentField {
  std::vector<FieldExpr> components;  // p_i(x, t), each > 1 on the cylinder
  double lipschitz = 0.0;             // L: |(grad_x, d_t) p_i| <= L, all i
  std::vector<double> min_value;      // sampled per-component minima
  std::vector<double> max_value;      // sampled per-component maxima

  int directions() const { return static_cast<int>(components.size()); }
};

/// One named admissibility check.
struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// All exponent-derived quantities and admissibility verdicts.
struct ExponentReport {
  double mu = 0.0;            // sup of pointwise max_i p_i / min_i p_i
  double p_h_min = 0.0;       // sampled minimum of the harmonic mean
  double p_h_star_min = 0.0;  // Sobolev conjugate of p_h_min (+inf branch)
  double r_star = 0.0;        // higher-integrability exponent margin
  bool slow_everywhere = false;      // all p_i >= 2 on samples
  std::vector<int> fast_directions;  // axes with p_i <= 2 - sigma
  double gamma_at_beta = 0.0;
  double beta_max = 0.0;  // +inf when the Lipschitz constant is 0
  double nu = 0.0;        // 1 - (mu + gamma) N / (N + 2)
  double target_gap = 0.0;
  std::vector<Verdict> verdicts;

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
};

/// Pointwise max and min of the component values.
inline std::pair<double, double> pvee_pwedge(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("pvee_pwedge: N >= 1");
  double hi = values[0], lo = values[0];
  for (double v : values) {
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  return {hi, lo};
}

/// Harmonic mean N / sum(1/p_i).
inline double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("harmonic_mean: N >= 1");
  double s = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw InvalidArgument("harmonic_mean: values must be > 0");
    s += 1.0 / v;
  }
  return static_cast<double>(values.size()) / s;
}

/// Sobolev conjugate N p_h / (N - p_h) when N > p_h; +inf otherwise.
inline double sobolev_conjugate(double p_h, int dim) {
  if (!(p_h > 0.0)) throw InvalidArgument("sobolev_conjugate: p_h > 0");
  if (static_cast<double>(dim) > p_h)
    return static_cast<double>(dim) * p_h / (static_cast<double>(dim) - p_h);
  return kUnbounded;
}

/// Higher-integrability margin r* = (4 - 2N(mu - 1)) / (N + 2). May come out
/// <= 0 when mu is too large; callers flag that case rather than erroring.
inline double r_star(double mu, int dim) {
  if (!(mu >= 1.0)) throw InvalidArgument("r_star: mu >= 1");
  const double n = static_cast<double>(dim);
  return (4.0 - 2.0 * n * (mu - 1.0)) / (n + 2.0);
}

/// gamma = 2 beta L sqrt(N) (N+2)^2 / (4 N^2) (pmax + pmin + 2), the
/// cube-cover oscillation penalty added to mu in the admissibility gap.
inline double gamma_oscillation(double beta, double lipschitz, int dim,
                                double pmax, double pmin) {
  const double n = static_cast<double>(dim);
  return 2.0 * beta * lipschitz * std::sqrt(n) * (n + 2.0) * (n + 2.0) /
         (4.0 * n * n) * (pmax + pmin + 2.0);
}

/// Largest cube edge beta with gamma(beta) < target_gap - mu; +inf when the
/// Lipschitz constant vanishes (gamma is identically 0).
inline double beta_max(double mu, double lipschitz, int dim, double pmax,
                       double pmin, double target_gap) {
  if (!(mu < target_gap))
    throw InvalidArgument(
        "beta_max: inadmissible exponents, mu = " + std::to_string(mu) +
        " >= target gap " + std::to_string(target_gap));
  if (lipschitz < 0.0) throw InvalidArgument("beta_max: L >= 0");
  if (lipschitz == 0.0) return kUnbounded;
  const double slope = gamma_oscillation(1.0, lipschitz, dim, pmax, pmin);
  return (target_gap - mu) / slope;
}

/// Sampling description for suprema over the closed cylinder. Values are
/// approximations from below of the true sup (the fields are Lipschitz, so
/// grid refinement converges).
struct SamplingGrid {
  int per_axis = 64;
  int time_samples = 64;
};

namespace detail {

struct ExponentSamples {
  // samples[i][s]: component i at sample point s
  std::vector<std::vector<double>> values;
  std::size_t count = 0;
};

inline ExponentSamples sample_exponents(const std::vector<FieldExpr>& comps,
                                        const RectDomain& domain,
                                        double horizon,
                                        const SamplingGrid& grid) {
  const int dim = domain.dim();
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a)
    axes[static_cast<std::size_t>(a)] = linspace(
        0.0, domain.lengths[static_cast<std::size_t>(a)], grid.per_axis);
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.size();
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(dim),
                                          std::vector<double>(total));
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  for (std::size_t f = 0; f < total; ++f) {
    for (int a = 0; a < dim; ++a)
      coords[static_cast<std::size_t>(a)][f] =
          axes[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] <
          axes[static_cast<std::size_t>(a)].size())
        break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
  const std::vector<double> ts =
      horizon > 0.0 ? linspace(0.0, horizon, grid.time_samples)
                    : std::vector<double>{0.0};

  ExponentSamples out;
  out.count = total * ts.size();
  out.values.assign(comps.size(), std::vector<double>(out.count));
  std::vector<std::vector<double>> scratch;
  std::vector<double> buf(total);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    FieldTape tape(comps[i]);
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      tape.eval_into(coords, ts[ti], buf, scratch);
      std::copy(buf.begin(), buf.end(),
                out.values[i].begin() + static_cast<std::ptrdiff_t>(ti * total));
    }
  }
  return out;
}

}  // namespace detail

/// Build an ExponentField: sample component ranges over the closed cylinder
/// and take L = max over components of the sampled Lipschitz estimate unless
/// an override is supplied (the sampled value is advisory only).
inline ExponentField make_exponent_field(
    std::vector<FieldExpr> components, const RectDomain& domain,
    double horizon, const SamplingGrid& grid = {},
    std::optional<double> lipschitz_override = std::nullopt) {
  ExponentField field;
  field.components = std::move(components);
  const auto samples =
      detail::sample_exponents(field.components, domain, horizon, grid);
  field.min_value.resize(field.components.size());
  field.max_value.resize(field.components.size());
  for (std::size_t i = 0; i < field.components.size(); ++i) {
    auto [lo, hi] = std::pair(samples.values[i][0], samples.values[i][0]);
    for (double v : samples.values[i]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    field.min_value[i] = lo;
    field.max_value[i] = hi;
  }
  if (lipschitz_override) {
    field.lipschitz = *lipschitz_override;
  } else {
    double L = 0.0;
    for (const auto& e : field.components)
      L = std::max(L,
                   lipschitz_estimate(e, domain, horizon, grid.per_axis).value);
    field.lipschitz = L;
  }
  return field;
}

/// mu = sup over the sample grid of the pointwise ratio p_vee / p_wedge.
/// Exact for constant exponent fields. Errors on any sample <= 1.
inline double mu_gap(const ExponentField& field, const RectDomain& domain,
                     double horizon, const SamplingGrid& grid = {}) {
  const auto samples =
      detail::sample_exponents(field.components, domain, horizon, grid);
  double mu = 0.0;
  std::vector<double> point(field.components.size());
  for (std::size_t s = 0; s < samples.count; ++s) {
    for (std::size_t i = 0; i < point.size(); ++i)
      point[i] = samples.values[i][s];
    auto [hi, lo] = pvee_pwedge(point);
    if (!(lo > 1.0))
      throw InvalidArgument("mu: invalid exponent sample " +
                            std::to_string(lo) + " <= 1");
    mu = std::max(mu, hi / lo);
  }
  return mu;
}

/// Run every admissibility check of the exponent hypotheses on the sampling
/// grid and compute the derived quantities. Failures are verdicts, never
/// errors. slow_mode enables the relaxed gap mu < 1 + 2/N, which only
/// applies when all sampled exponents are >= 2.
inline ExponentReport validate_exponents(const ExponentField& field,
                                         const RectDomain& domain,
                                         double horizon,
                                         const SamplingGrid& grid = {},
                                         bool slow_mode = false) {
  const int dim = domain.dim();
  const double n = static_cast<double>(dim);
  const auto samples =
      detail::sample_exponents(field.components, domain, horizon, grid);

  ExponentReport rep;
  const double sigma_tol = 1e-9;

  double p_floor = std::numeric_limits<double>::infinity();
  for (const auto& comp : samples.values)
    for (double v : comp) p_floor = std::min(p_floor, v);

  rep.slow_everywhere = p_floor >= 2.0;
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    double hi = samples.values[i][0];
    for (double v : samples.values[i]) hi = std::max(hi, v);
    if (hi <= 2.0 - sigma_tol)
      rep.fast_directions.push_back(static_cast<int>(i));
  }

  // Pointwise quantities: mu, min of the harmonic mean, max component value.
  double mu = 0.0;
  double p_h_min = std::numeric_limits<double>::infinity();
  double p_max = -std::numeric_limits<double>::infinity();
  std::vector<double> point(field.components.size());
  for (std::size_t s = 0; s < samples.count; ++s) {
    for (std::size_t i = 0; i < point.size(); ++i)
      point[i] = samples.values[i][s];
    auto [hi, lo] = pvee_pwedge(point);
    if (lo > 0.0) mu = std::max(mu, hi / lo);
    p_max = std::max(p_max, hi);
    bool positive = true;
    for (double v : point) positive = positive && v > 0.0;
    if (positive) p_h_min = std::min(p_h_min, harmonic_mean(point));
  }
  rep.mu = mu;
  rep.p_h_min = p_h_min;
  rep.p_h_star_min = sobolev_conjugate(p_h_min, dim);
  rep.r_star = r_star(std::max(mu, 1.0), dim);

  const double lower_bound = 2.0 * n / (n + 2.0);
  {
    Verdict v;
    v.name = "p_lower_bound";
    v.pass = p_floor > lower_bound;
    v.detail = "min sampled p = " + std::to_string(p_floor) +
               ", required > " + std::to_string(lower_bound);
    rep.verdicts.push_back(v);
  }
  {
    // Conservative form of p_i < p_h*(z): compare the sampled maximum
    // against the Sobolev conjugate of the sampled minimum of p_h.
    Verdict v;
    v.name = "p_below_critical";
    v.pass = p_max < rep.p_h_star_min;
    v.detail = "max sampled p = " + std::to_string(p_max) + ", p_h* = " +
               (rep.p_h_star_min == kUnbounded
                    ? std::string("unbounded")
                    : std::to_string(rep.p_h_star_min));
    rep.verdicts.push_back(v);
  }
  const bool relaxed = slow_mode && rep.slow_everywhere;
  rep.target_gap = relaxed ? 1.0 + 2.0 / n : 1.0 + 1.0 / n;
  {
    Verdict v;
    v.name = "mu_gap";
    v.pass = mu < rep.target_gap;
    v.detail = "mu = " + std::to_string(mu) + ", required < " +
               std::to_string(rep.target_gap) +
               (relaxed ? " (slow-diffusion gap)" : "");
    rep.verdicts.push_back(v);
  }
  {
    Verdict v;
    v.name = "r_star_positive";
    v.pass = rep.r_star > 0.0;
    v.detail = "r_star = " + std::to_string(rep.r_star);
    rep.verdicts.push_back(v);
  }

  double p_min_of_max = std::numeric_limits<double>::infinity();
  double p_max_of_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.components.size(); ++i) {
    double lo = samples.values[i][0], hi = samples.values[i][0];
    for (double v : samples.values[i]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    p_min_of_max = std::min(p_min_of_max, lo);
    p_max_of_max = std::max(p_max_of_max, hi);
  }
  if (mu < rep.target_gap) {
    rep.beta_max = beta_max(mu, field.lipschitz, dim, p_max_of_max,
                            p_min_of_max, rep.target_gap);
    rep.gamma_at_beta =
        rep.beta_max == kUnbounded
            ? 0.0
            : gamma_oscillation(rep.beta_max, field.lipschitz, dim,
                                p_max_of_max, p_min_of_max);
  } else {
    rep.beta_max = 0.0;
    rep.gamma_at_beta = 0.0;
  }
  rep.nu = 1.0 - (mu + rep.gamma_at_beta) * n / (n + 2.0);
  return rep;
}

}  // namespace anisospec
