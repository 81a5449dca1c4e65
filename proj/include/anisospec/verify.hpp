#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "anisospec/basis.hpp"
#include "anisospec/common.hpp"
#include "anisospec/exponents.hpp"
#include "anisospec/field_expr.hpp"
#include "anisospec/funcspace.hpp"
#include "anisospec/monitor.hpp"
#include "anisospec/solver.hpp"

namespace anisospec {

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

using Rng = std::mt19937_64;

namespace verify_detail {

/// Random expansion in the sine basis with decaying coefficients; smooth and
/// boundary-compatible by construction.
inline SpectralCoeffs random_coeffs(Rng& rng, const std::vector<int>& modes,
                                    double scale = 1.0) {
  SpectralCoeffs c(modes);
  std::vector<int> k(modes.size(), 1);
  for (std::size_t f = 0; f < c.size(); ++f) {
    double k2 = 0.0;
    for (int v : k) k2 += static_cast<double>(v) * v;
    c.c[f] = scale * uniform(rng, -1.0, 1.0) / (1.0 + k2);
    for (int a = static_cast<int>(modes.size()) - 1; a >= 0; --a) {
      if (++k[static_cast<std::size_t>(a)] <= modes[static_cast<std::size_t>(a)])
        break;
      k[static_cast<std::size_t>(a)] = 1;
    }
  }
  return c;
}

/// Random smooth expression built from differentiable ops only (no kinks),
/// for finite-difference validation of symbolic derivatives.
inline FieldExpr random_smooth_expr(Rng& rng, int dim, int depth = 3) {
  if (depth == 0 || uniform01(rng) < 0.25) {
    const double pick = uniform01(rng);
    if (pick < 0.4) return FieldExpr::constant(uniform(rng, -2.0, 2.0));
    const int var =
        static_cast<int>(uniform(rng, 0.0, static_cast<double>(dim + 1)));
    return var >= dim ? FieldExpr::time()
                      : FieldExpr::variable(std::min(var, dim - 1));
  }
  const double pick = uniform01(rng);
  auto a = random_smooth_expr(rng, dim, depth - 1);
  auto b = random_smooth_expr(rng, dim, depth - 1);
  if (pick < 0.18) return a + b;
  if (pick < 0.34) return a - b;
  if (pick < 0.52) return a * b;
  if (pick < 0.60)  // keep denominators away from zero
    return a / (FieldExpr::constant(2.0) + b * b);
  if (pick < 0.70) return FieldExpr::apply(dsl::Op::kSin, a);
  if (pick < 0.78) return FieldExpr::apply(dsl::Op::kCos, a);
  if (pick < 0.84)
    return FieldExpr::apply(dsl::Op::kTanh, a);
  if (pick < 0.90)  // exp of a bounded argument
    return FieldExpr::apply(dsl::Op::kExp, FieldExpr::apply(dsl::Op::kTanh, a));
  if (pick < 0.95)
    return FieldExpr::apply(dsl::Op::kSqrt,
                            FieldExpr::constant(1.0) + a * a);
  return FieldExpr::apply(dsl::Op::kLog,
                          FieldExpr::constant(1.5) + a * a);
}

inline std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return std::string(buf);
}

inline bool rel_close(double a, double b, double tol) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
  return std::fabs(a - b) <= tol * scale;
}

}  // namespace verify_detail

struct PropertySuite {
  std::string name;
  double default_tol;
  std::function<PropertyResult(Rng&, double tol)> run;
};

inline std::vector<PropertySuite> property_suites();

/// Run the selected suites ("all", or comma-separated names / prefixes) with
/// per-suite RNGs derived from the seed. Tolerance overrides are looked up
/// by suite name.
inline std::vector<PropertyResult> run_property_suites(
    const std::string& selection, std::uint64_t seed,
    const std::map<std::string, double>& tol_overrides = {}) {
  std::vector<PropertyResult> results;
  auto selected = [&](const std::string& name) {
    if (selection == "all") return true;
    std::size_t pos = 0;
    while (pos < selection.size()) {
      auto comma = selection.find(',', pos);
      if (comma == std::string::npos) comma = selection.size();
      const std::string tok = selection.substr(pos, comma - pos);
      if (!tok.empty() &&
          (name == tok || name.rfind(tok + ".", 0) == 0 ||
           name.rfind(tok, 0) == 0))
        return true;
      pos = comma + 1;
    }
    return false;
  };
  for (const auto& suite : property_suites()) {
    if (!selected(suite.name)) continue;
    double tol = suite.default_tol;
    auto it = tol_overrides.find(suite.name);
    if (it != tol_overrides.end()) tol = it->second;
    Rng rng(seed ^ std::hash<std::string>{}(suite.name));
    PropertyResult r;
    try {
      r = suite.run(rng, tol);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.name = suite.name;
    results.push_back(std::move(r));
  }
  return results;
}

inline std::vector<PropertySuite> property_suites() {
  using verify_detail::random_coeffs;
  using verify_detail::random_smooth_expr;
  using verify_detail::rel_close;
  std::vector<PropertySuite> suites;

  suites.push_back({"dsl.derivative_matches_fd", 1e-6, [](Rng& rng, double tol) {
    PropertyResult r;
    double worst = 0.0;
    const int dim = 2;
    for (int trial = 0; trial < 100; ++trial) {
      FieldExpr e = random_smooth_expr(rng, dim);
      const int var = trial % (dim + 1) == dim
                          ? kTimeVar
                          : trial % (dim + 1);
      FieldExpr de = e.derivative(var);
      for (int pt = 0; pt < 3; ++pt) {
        std::vector<double> x = {uniform(rng, 0.1, 0.9),
                                 uniform(rng, 0.1, 0.9)};
        double t = uniform(rng, 0.1, 0.9);
        const double h = 1e-5;
        double fp, fm;
        if (var == kTimeVar) {
          fp = e.eval(x, t + h);
          fm = e.eval(x, t - h);
        } else {
          auto xp = x, xm = x;
          xp[static_cast<std::size_t>(var)] += h;
          xm[static_cast<std::size_t>(var)] -= h;
          fp = e.eval(xp, t);
          fm = e.eval(xm, t);
        }
        const double fd = (fp - fm) / (2.0 * h);
        const double sym = de.eval(x, t);
        const double scale = std::max({std::fabs(fd), std::fabs(sym), 1.0});
        worst = std::max(worst, std::fabs(fd - sym) / scale);
      }
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"dsl.print_parse_roundtrip", 1e-14, [](Rng& rng, double tol) {
    PropertyResult r;
    double worst = 0.0;
    const int dim = 2;
    for (int trial = 0; trial < 100; ++trial) {
      FieldExpr e = random_smooth_expr(rng, dim);
      // Mix in derivative trees so sgn/step forms round-trip too.
      if (trial % 3 == 0) e = FieldExpr::apply(dsl::Op::kAbs, e).derivative(0);
      FieldExpr back = FieldExpr::parse(e.str());
      for (int pt = 0; pt < 100; ++pt) {
        std::vector<double> x = {uniform(rng, 0.0, 1.0),
                                 uniform(rng, 0.0, 1.0)};
        double t = uniform(rng, 0.0, 1.0);
        const double a = e.eval(x, t);
        const double b = back.eval(x, t);
        const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
        worst = std::max(worst, std::fabs(a - b) / scale);
      }
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"exponents.r_star_shape", 1e-14, [](Rng& rng, double tol) {
    PropertyResult r;
    r.pass = true;
    for (int n = 1; n <= 4; ++n) {
      if (!rel_close(r_star(1.0, n), 4.0 / (n + 2.0), tol)) r.pass = false;
      double prev = r_star(1.0, n);
      for (double mu = 1.01; mu < 2.0; mu += 0.07) {
        const double cur = r_star(mu, n);
        if (!(cur < prev)) r.pass = false;
        prev = cur;
      }
    }
    (void)rng;
    r.detail = "r* decreasing in mu, r*(1, N) = 4/(N+2)";
    return r;
  }});

  suites.push_back({"exponents.gamma_linear", 1e-12, [](Rng& rng, double tol) {
    PropertyResult r;
    r.pass = true;
    for (int trial = 0; trial < 200; ++trial) {
      const double beta = uniform(rng, 0.0, 2.0);
      const double L = uniform(rng, 0.0, 5.0);
      const int n = 1 + static_cast<int>(uniform(rng, 0.0, 4.0));
      const double pmax = uniform(rng, 2.0, 4.0);
      const double pmin = uniform(rng, 1.2, 2.0);
      const double g = gamma_oscillation(beta, L, n, pmax, pmin);
      if (!rel_close(gamma_oscillation(2.0 * beta, L, n, pmax, pmin), 2.0 * g,
                     tol))
        r.pass = false;
      if (!rel_close(gamma_oscillation(beta, 2.0 * L, n, pmax, pmin), 2.0 * g,
                     tol))
        r.pass = false;
      if (gamma_oscillation(0.0, L, n, pmax, pmin) != 0.0) r.pass = false;
    }
    r.detail = "gamma linear in beta and L";
    return r;
  }});

  suites.push_back({"exponents.beta_inverts_gamma", 1e-12, [](Rng& rng,
                                                              double tol) {
    PropertyResult r;
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
      const int n = 1 + static_cast<int>(uniform(rng, 0.0, 4.0));
      const double target = 1.0 + 1.0 / n;
      const double mu = uniform(rng, 1.0, target - 0.01);
      const double L = uniform(rng, 0.01, 5.0);
      const double pmax = uniform(rng, 2.0, 4.0);
      const double pmin = uniform(rng, 1.2, 2.0);
      const double beta = beta_max(mu, L, n, pmax, pmin, target);
      const double gap = gamma_oscillation(beta, L, n, pmax, pmin);
      const double want = target - mu;
      worst = std::max(worst, std::fabs(gap - want) /
                                  std::max({gap, want, 1e-300}));
    }
    r.pass = worst <= tol;
    r.detail = "worst relative inversion error " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"funcspace.luxemburg_homogeneous", 1e-9, [](Rng& rng,
                                                                double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.0}), {24, 24});
    BasisTransform basis(grid, {4, 4});
    GridFunction p = GridFunction::sample(
        grid, FieldExpr::parse("2 + 0.5*sin(x1) + 0.3*x2"));
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      GridFunction u = basis.eval_expansion(random_coeffs(rng, {4, 4}));
      const double c = uniform(rng, 0.2, 5.0);
      GridFunction cu = u;
      for (auto& v : cu.values) v *= c;
      const double a = luxemburg_norm(cu, p, 1e-12);
      const double b = c * luxemburg_norm(u, p, 1e-12);
      worst = std::max(worst, std::fabs(a - b) / std::max(a, b));
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"funcspace.luxemburg_constant_exponent", 1e-10,
                    [](Rng& rng, double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.3}), {24, 24});
    BasisTransform basis(grid, {4, 4});
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      GridFunction u = basis.eval_expansion(random_coeffs(rng, {4, 4}));
      const double pc = uniform(rng, 1.3, 4.0);
      GridFunction p = GridFunction::constant(grid, pc);
      const double a = luxemburg_norm(u, p, 1e-13);
      const double b = lp_norm(u, pc);
      worst = std::max(worst, std::fabs(a - b) / std::max({a, b, 1e-300}));
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"funcspace.holder", 0.0, [](Rng& rng, double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.0}), {24, 24});
    BasisTransform basis(grid, {4, 4});
    GridFunction p =
        GridFunction::sample(grid, FieldExpr::parse("2 + 0.5*sin(x1)"));
    r.pass = true;
    for (int trial = 0; trial < 100; ++trial) {
      GridFunction f = basis.eval_expansion(random_coeffs(rng, {4, 4}));
      GridFunction g = basis.eval_expansion(random_coeffs(rng, {4, 4}));
      auto chk = holder_check(f, g, p);
      if (!chk.pass) r.pass = false;
    }
    (void)tol;
    r.detail = "100 random smooth pairs";
    return r;
  }});

  suites.push_back({"funcspace.norm_modular_bounds", 1e-8, [](Rng& rng,
                                                              double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.0}), {24, 24});
    BasisTransform basis(grid, {4, 4});
    GridFunction p = GridFunction::sample(grid, FieldExpr::parse("2 + x1"));
    r.pass = true;
    for (int trial = 0; trial < 50; ++trial) {
      GridFunction u = basis.eval_expansion(
          random_coeffs(rng, {4, 4}, uniform(rng, 0.1, 10.0)));
      if (!norm_modular_bounds_check(u, p, tol)) r.pass = false;
    }
    r.detail = "50 random expansions";
    return r;
  }});

  suites.push_back({"funcspace.interpolation", 0.0, [](Rng& rng, double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.0}), {24, 24});
    BasisTransform basis(grid, {4, 4});
    r.pass = true;
    for (int trial = 0; trial < 100; ++trial) {
      GridFunction u = basis.eval_expansion(random_coeffs(rng, {4, 4}));
      const double q = uniform(rng, 3.0, 8.0);
      const double s = uniform(rng, 2.01, q);
      auto chk = interpolation_check(u, s, q);
      if (!chk.pass) r.pass = false;
    }
    (void)tol;
    r.detail = "100 random smooth functions, constant exactly 1";
    return r;
  }});

  suites.push_back({"funcspace.embedding_ratio_scaling", 1e-9, [](Rng& rng,
                                                                  double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.0}), {24, 24});
    BasisTransform basis(grid, {4, 4});
    const std::vector<double> p = {2.2, 1.9};
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      SpectralCoeffs c = random_coeffs(rng, {4, 4});
      GridFunction u = basis.eval_expansion(c);
      std::vector<GridFunction> grads = {
          basis.eval_expansion(c, DerivSpec::first(0)),
          basis.eval_expansion(c, DerivSpec::first(1))};
      const double base = anisotropic_embedding_ratio(u, grads, p);
      const double scale = uniform(rng, 0.5, 4.0);
      GridFunction su = u;
      for (auto& v : su.values) v *= scale;
      auto sgrads = grads;
      for (auto& g : sgrads)
        for (auto& v : g.values) v *= scale;
      const double scaled = anisotropic_embedding_ratio(su, sgrads, p);
      worst = std::max(worst,
                       std::fabs(base - scaled) / std::max(base, scaled));
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"basis.orthonormality", 1e-12, [](Rng& rng, double tol) {
    PropertyResult r;
    (void)rng;
    auto grid = make_grid(RectDomain({1.0, 1.3}), {26, 28});
    BasisTransform basis(grid, {6, 5});
    double worst = 0.0;
    SpectralCoeffs unit({6, 5});
    for (std::size_t f = 0; f < unit.size(); ++f) {
      std::fill(unit.c.begin(), unit.c.end(), 0.0);
      unit.c[f] = 1.0;
      GridFunction psi = basis.eval_expansion(unit);
      SpectralCoeffs back = basis.project(psi.values);
      for (std::size_t k = 0; k < back.size(); ++k) {
        const double want = k == f ? 1.0 : 0.0;
        worst = std::max(worst, std::fabs(back.c[k] - want));
      }
    }
    r.pass = worst <= tol;
    r.detail = "worst Gram deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"basis.derivative_norms", 1e-10, [](Rng& rng, double tol) {
    PropertyResult r;
    (void)rng;
    const RectDomain dom({1.0, 1.3});
    auto grid = make_grid(dom, {30, 32});
    BasisTransform basis(grid, {4, 4});
    const double pi = 3.14159265358979323846;
    double worst = 0.0;
    for (int k1 = 1; k1 <= 4; ++k1) {
      for (int k2 = 1; k2 <= 4; ++k2) {
        SpectralCoeffs c({4, 4});
        const int kk[2] = {k1, k2};
        c.at(kk) = 1.0;
        // All |alpha| <= 2 multi-indices.
        const int alphas[6][2] = {{0, 0}, {1, 0}, {0, 1},
                                  {2, 0}, {0, 2}, {1, 1}};
        for (const auto& al : alphas) {
          DerivSpec d;
          if (al[0] == 1 && al[1] == 0) d = DerivSpec::first(0);
          if (al[0] == 0 && al[1] == 1) d = DerivSpec::first(1);
          if (al[0] == 2) d = DerivSpec::second(0, 0);
          if (al[1] == 2) d = DerivSpec::second(1, 1);
          if (al[0] == 1 && al[1] == 1) d = DerivSpec::second(0, 1);
          GridFunction g = basis.eval_expansion(c, d);
          std::vector<double> sq(g.values.size());
          for (std::size_t i = 0; i < sq.size(); ++i)
            sq[i] = g.values[i] * g.values[i];
          const double got = grid->integrate(sq);
          const double order = al[0] + al[1];
          const double want =
              std::pow(pi, 2.0 * order) *
              std::pow(k1 / dom.lengths[0], 2.0 * al[0]) *
              std::pow(k2 / dom.lengths[1], 2.0 * al[1]);
          worst = std::max(worst,
                           std::fabs(got - want) / std::max(want, 1.0));
        }
      }
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"basis.project_roundtrip", 1e-10, [](Rng& rng, double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.0}), {26, 26});
    BasisTransform basis(grid, {5, 5});
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      SpectralCoeffs c = random_coeffs(rng, {5, 5});
      GridFunction u = basis.eval_expansion(c);
      SpectralCoeffs back = basis.project(u.values);
      for (std::size_t k = 0; k < c.size(); ++k)
        worst = std::max(worst, std::fabs(back.c[k] - c.c[k]));
    }
    r.pass = worst <= tol;
    r.detail = "worst coefficient deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"basis.parseval", 1e-10, [](Rng& rng, double tol) {
    PropertyResult r;
    const RectDomain dom({1.0, 1.0});
    auto grid = make_grid(dom, {30, 30});
    BasisTransform basis(grid, {4, 4});
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      SpectralCoeffs c = random_coeffs(rng, {4, 4});
      // s = 0: Euclidean norm of coefficients == L2 norm by quadrature.
      {
        GridFunction u = basis.eval_expansion(c);
        std::vector<double> sq(u.values.size());
        for (std::size_t i = 0; i < sq.size(); ++i)
          sq[i] = u.values[i] * u.values[i];
        const double got = std::sqrt(grid->integrate(sq));
        const double want = parseval_norm(c, dom, 0.0);
        worst = std::max(worst, std::fabs(got - want) / std::max(want, 1.0));
      }
      // s = 1/2: Dirichlet seminorm.
      {
        double acc = 0.0;
        for (int a = 0; a < 2; ++a) {
          GridFunction g = basis.eval_expansion(c, DerivSpec::first(a));
          std::vector<double> sq(g.values.size());
          for (std::size_t i = 0; i < sq.size(); ++i)
            sq[i] = g.values[i] * g.values[i];
          acc += grid->integrate(sq);
        }
        const double got = std::sqrt(acc);
        const double want = parseval_norm(c, dom, 0.5);
        worst = std::max(worst, std::fabs(got - want) / std::max(want, 1.0));
      }
      // s = 1: L2 norm of the Laplacian.
      {
        std::vector<double> lap(grid->size(), 0.0);
        std::vector<double> tmp(grid->size());
        for (int a = 0; a < 2; ++a) {
          basis.eval(c, DerivSpec::second(a, a), tmp);
          for (std::size_t i = 0; i < lap.size(); ++i) lap[i] += tmp[i];
        }
        for (auto& v : lap) v *= v;
        const double got = std::sqrt(grid->integrate(lap));
        const double want = parseval_norm(c, dom, 1.0);
        worst = std::max(worst, std::fabs(got - want) / std::max(want, 1.0));
      }
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"basis.integration_by_parts", 1e-9, [](Rng& rng,
                                                           double tol) {
    PropertyResult r;
    auto grid = make_grid(RectDomain({1.0, 1.3}), {30, 32});
    BasisTransform basis(grid, {5, 4});
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      SpectralCoeffs c = random_coeffs(rng, {5, 4});
      auto chk = laplacian_identity_check(c, basis, tol);
      const double scale = std::max({std::fabs(chk.lhs), std::fabs(chk.rhs), 1e-300});
      worst = std::max(worst, std::fabs(chk.lhs - chk.rhs) / scale);
    }
    r.pass = worst <= tol;
    r.detail = "worst relative deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"solver.flux_monotone", 0.0, [](Rng& rng, double tol) {
    PropertyResult r;
    r.pass = true;
    long strict_failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const double xi = uniform(rng, -10.0, 10.0);
      const double eta = uniform(rng, -10.0, 10.0);
      const double p = uniform(rng, 1.2, 3.0);
      const double eps = uniform(rng, 1e-6, 1.0);
      const double d = (flux(xi, p, eps) - flux(eta, p, eps)) * (xi - eta);
      if (d < 0.0) r.pass = false;
      if (std::fabs(xi - eta) > 1e-12 && !(d > 0.0)) ++strict_failures;
    }
    if (strict_failures > 0) r.pass = false;
    (void)tol;
    r.detail = "10^4 random (xi, eta, p, eps)";
    return r;
  }});

  suites.push_back({"solver.heat_decay", 1e-12, [](Rng& rng, double tol) {
    PropertyResult r;
    (void)rng;
    Problem prob;
    prob.domain = RectDomain({1.0, 1.0});
    prob.exponents = {FieldExpr::constant(2.0), FieldExpr::constant(2.0)};
    prob.forcing = FieldExpr::constant(0.0);
    prob.initial = FieldExpr::parse(
        "2*sin(pi*x1)*sin(pi*x2) + 1.2*sin(2*pi*x1)*sin(pi*x2)");
    prob.horizon = 0.05;
    prob.epsilon = 0.5;
    SolverConfig cfg;
    cfg.modes = {3, 3};
    cfg.grid = {24, 24};
    cfg.kappa = 1.0;
    cfg.snapshots = 20;
    Trajectory traj = solve(prob, cfg);
    const auto& first = traj.snapshots.front();
    const auto& last = traj.snapshots.back();
    const RectDomain& dom = prob.domain;
    double worst = 0.0;
    std::vector<int> k(2, 1);
    for (std::size_t f = 0; f < first.c.size(); ++f) {
      const double lam = eigenvalue(EigenIndex(k), dom);
      const double want = first.c.c[f] * std::exp(-lam * prob.horizon);
      const double got = last.c.c[f];
      if (std::fabs(want) > 1e-6)
        worst = std::max(worst, std::fabs(got - want) / std::fabs(want));
      for (int a = 1; a >= 0; --a) {
        if (++k[static_cast<std::size_t>(a)] <= 3) break;
        k[static_cast<std::size_t>(a)] = 1;
      }
    }
    r.pass = worst <= tol;
    r.detail = "worst mode decay deviation " + verify_detail::fmt_sci(worst);
    return r;
  }});

  suites.push_back({"solver.energy_identity_heat", 1e-9, [](Rng& rng,
                                                            double tol) {
    PropertyResult r;
    (void)rng;
    Problem prob;
    prob.domain = RectDomain({1.0, 1.0});
    prob.exponents = {FieldExpr::constant(2.0), FieldExpr::constant(2.0)};
    prob.forcing = FieldExpr::constant(0.0);
    prob.initial = FieldExpr::parse("2*sin(pi*x1)*sin(pi*x2)");
    prob.horizon = 0.1;
    prob.epsilon = 0.5;
    SolverConfig cfg;
    cfg.modes = {2, 2};
    cfg.grid = {20, 20};
    cfg.kappa = 1.0;
    cfg.dt = 5e-4;
    cfg.dt_max = 5e-4;
    cfg.snapshots = 50;
    Trajectory traj = solve(prob, cfg);
    const double res = energy_residual(traj);
    r.pass = res <= tol;
    r.detail = "normalized residual " + verify_detail::fmt_sci(res);
    return r;
  }});

  suites.push_back({"monitor.contraction_heat", 1e-8, [](Rng& rng, double tol) {
    PropertyResult r;
    (void)rng;
    Problem prob;
    prob.domain = RectDomain({1.0, 1.0});
    prob.exponents = {FieldExpr::constant(2.0), FieldExpr::constant(2.0)};
    prob.forcing = FieldExpr::constant(0.0);
    prob.initial = FieldExpr::parse("2*sin(pi*x1)*sin(pi*x2)");
    prob.horizon = 0.05;
    prob.epsilon = 0.5;
    SolverConfig cfg;
    cfg.modes = {3, 3};
    cfg.grid = {24, 24};
    cfg.kappa = 1.0;
    cfg.snapshots = 25;
    Trajectory a = solve(prob, cfg);
    Problem prob2 = prob;
    prob2.initial = FieldExpr::parse(
        "sin(pi*x1)*sin(pi*x2) + 0.6*sin(2*pi*x1)*sin(pi*x2)");
    Trajectory b = solve(prob2, cfg);
    auto chk = contraction_check(a, b, tol);
    r.pass = chk.pass;
    r.detail = "max distance increase " + verify_detail::fmt_sci(chk.max_increase);
    return r;
  }});

  suites.push_back({"monitor.instrument_additivity", 1e-10, [](Rng& rng,
                                                               double tol) {
    PropertyResult r;
    (void)rng;
    Problem prob;
    prob.domain = RectDomain({1.0, 1.0});
    prob.exponents = {FieldExpr::parse("2.2"), FieldExpr::parse("1.9")};
    prob.forcing = FieldExpr::constant(0.0);
    prob.initial = FieldExpr::parse("2*sin(pi*x1)*sin(pi*x2)");
    prob.horizon = 0.02;
    prob.epsilon = 0.1;
    SolverConfig cfg;
    cfg.modes = {4, 4};
    cfg.grid = {20, 20};
    cfg.snapshots = 8;
    Trajectory traj = solve(prob, cfg);
    const std::vector<double> rlist = {0.3};
    EstimateReport whole = instrument(traj, prob, rlist, {20, 20});
    Trajectory head, tail;
    const std::size_t split = 4;
    head.snapshots.assign(traj.snapshots.begin(),
                          traj.snapshots.begin() + split + 1);
    tail.snapshots.assign(traj.snapshots.begin() + split,
                          traj.snapshots.end());
    EstimateReport h = instrument(head, prob, rlist, {20, 20});
    EstimateReport t = instrument(tail, prob, rlist, {20, 20});
    double worst = 0.0;
    auto cmp = [&](double whole_v, double sum_v) {
      const double scale = std::max({std::fabs(whole_v), std::fabs(sum_v), 1.0});
      worst = std::max(worst, std::fabs(whole_v - sum_v) / scale);
    };
    cmp(whole.dissipation, h.dissipation + t.dissipation);
    cmp(whole.hessian_weighted, h.hessian_weighted + t.hessian_weighted);
    cmp(whole.ut_L2, h.ut_L2 + t.ut_L2);
    cmp(whole.higher_int[0].second,
        h.higher_int[0].second + t.higher_int[0].second);
    r.pass = worst <= tol;
    r.detail = "worst additivity defect " + verify_detail::fmt_sci(worst);
    return r;
  }});

  return suites;
}

}  // namespace anisospec
