#include "anisospec/funcspace.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "anisospec/basis.hpp"
#include "anisospec/verify.hpp"

using namespace anisospec;

namespace {

GridPtr unit_square(int n = 24) {
  return make_grid(RectDomain({1.0, 1.0}), {n, n});
}

TEST(Modular, Examples) {
  auto grid = unit_square();
  GridFunction u2 = GridFunction::constant(grid, 2.0);
  GridFunction p2 = GridFunction::constant(grid, 2.0);
  EXPECT_NEAR(modular(u2, p2), 4.0, 1e-12);
  GridFunction u0 = GridFunction::constant(grid, 0.0);
  EXPECT_DOUBLE_EQ(modular(u0, p2), 0.0);
  GridFunction u1 = GridFunction::constant(grid, 1.0);
  GridFunction p = GridFunction::sample(grid, FieldExpr::parse("2 + x1"));
  EXPECT_NEAR(modular(u1, p), 1.0, 1e-12);  // box volume
}

TEST(Luxemburg, ConstantExponentReducesToL2) {
  auto grid = unit_square();
  GridFunction u = GridFunction::constant(grid, 3.0);
  GridFunction p = GridFunction::constant(grid, 2.0);
  EXPECT_NEAR(luxemburg_norm(u, p, 1e-12), 3.0, 1e-10);
}

TEST(Luxemburg, ModularOneFixedPoint) {
  auto grid = unit_square();
  GridFunction u = GridFunction::constant(grid, 1.0);
  GridFunction p = GridFunction::sample(grid, FieldExpr::parse("2 + x2"));
  EXPECT_NEAR(luxemburg_norm(u, p, 1e-12), 1.0, 1e-10);
}

TEST(Luxemburg, PiecewiseExponent1D) {
  // Omega = (0,1), p = 2 on (0,1/2), 3 on (1/2,1), u = 1:
  // rho(u/lambda) = (1/lambda^2 + 1/lambda^3)/2 = 1 at lambda = 1.
  auto grid = make_grid(RectDomain({1.0}), {64});
  GridFunction u = GridFunction::constant(grid, 1.0);
  std::vector<double> pv(grid->size());
  for (std::size_t i = 0; i < pv.size(); ++i)
    pv[i] = grid->coords()[0][i] < 0.5 ? 2.0 : 3.0;
  GridFunction p(grid, std::move(pv));
  EXPECT_NEAR(luxemburg_norm(u, p, 1e-12), 1.0, 1e-9);
}

TEST(Luxemburg, ZeroFunction) {
  auto grid = unit_square();
  GridFunction u = GridFunction::constant(grid, 0.0);
  GridFunction p = GridFunction::constant(grid, 2.5);
  EXPECT_DOUBLE_EQ(luxemburg_norm(u, p), 0.0);
}

TEST(Holder, Examples) {
  auto grid = unit_square();
  GridFunction one = GridFunction::constant(grid, 1.0);
  GridFunction p2 = GridFunction::constant(grid, 2.0);
  auto chk = holder_check(one, one, p2);
  EXPECT_NEAR(chk.lhs, 1.0, 1e-12);
  EXPECT_NEAR(chk.rhs, 2.0, 1e-9);
  EXPECT_TRUE(chk.pass);

  GridFunction zero = GridFunction::constant(grid, 0.0);
  auto chk0 = holder_check(zero, one, p2);
  EXPECT_DOUBLE_EQ(chk0.lhs, 0.0);
  EXPECT_TRUE(chk0.pass);
}

TEST(NormModularBounds, ConstantCases) {
  auto grid = unit_square();
  GridFunction u = GridFunction::constant(grid, 1.0);
  GridFunction p = GridFunction::sample(grid, FieldExpr::parse("2 + x1"));
  EXPECT_TRUE(norm_modular_bounds_check(u, p));
  // Constant exponent: both bounds coincide with ||u||^p.
  GridFunction pc = GridFunction::constant(grid, 2.7);
  GridFunction w = GridFunction::constant(grid, 1.8);
  EXPECT_TRUE(norm_modular_bounds_check(w, pc));
}

TEST(AnisotropicNorm, Examples) {
  auto grid = unit_square(30);
  BasisTransform basis(grid, {2, 2});
  // Zero gradients -> zero norm.
  std::vector<GridFunction> zgrads = {GridFunction::constant(grid, 0.0),
                                      GridFunction::constant(grid, 0.0)};
  std::vector<GridFunction> p22 = {GridFunction::constant(grid, 2.0),
                                   GridFunction::constant(grid, 2.0)};
  EXPECT_DOUBLE_EQ(anisotropic_norm(zgrads, p22), 0.0);

  // u = sin(pi x1) sin(pi x2): ||D_1 u||_2 = ||D_2 u||_2 = pi/2, sum = pi.
  SpectralCoeffs c({2, 2});
  const int k11[2] = {1, 1};
  c.at(k11) = 0.5;  // psi_(1,1) = 2 sin sin, so 0.5 psi = sin sin
  std::vector<GridFunction> grads = {
      basis.eval_expansion(c, DerivSpec::first(0)),
      basis.eval_expansion(c, DerivSpec::first(1))};
  EXPECT_NEAR(anisotropic_norm(grads, p22), 3.14159265358979323846, 1e-9);
}

TEST(Theta, Examples) {
  EXPECT_NEAR(interpolation_theta(3.0, 3, 2.0), 0.5, 1e-14);
  EXPECT_NEAR(interpolation_theta(4.0, 2, 2.0), 0.5, 1e-14);
  // s -> 2+ drives theta -> 0.
  EXPECT_LT(interpolation_theta(2.0 + 1e-6, 3, 2.0), 1e-5);
  // Inadmissible: s outside (2, p_h*).
  EXPECT_THROW(interpolation_theta(7.0, 3, 2.0), InvalidArgument);
  EXPECT_THROW(interpolation_theta(1.5, 3, 2.0), InvalidArgument);
}

TEST(Interpolation, ConstantIsEquality) {
  auto grid = unit_square();
  GridFunction u = GridFunction::constant(grid, 1.7);
  auto chk = interpolation_check(u, 3.0, 5.0);
  EXPECT_TRUE(chk.pass);
  EXPECT_NEAR(chk.lhs, 1.7, 1e-10);
  EXPECT_NEAR(chk.lhs, chk.rhs, 1e-9);
}

TEST(Interpolation, DegenerateSEqualsQ) {
  auto grid = unit_square();
  BasisTransform basis(grid, {3, 3});
  Rng rng(99u);
  GridFunction u =
      basis.eval_expansion(verify_detail::random_coeffs(rng, {3, 3}));
  auto chk = interpolation_check(u, 4.0, 4.0);
  EXPECT_NEAR(chk.lhs, chk.rhs, 1e-12 * std::max(1.0, chk.rhs));
  EXPECT_TRUE(chk.pass);
}

TEST(EmbeddingRatio, Examples) {
  auto grid = unit_square(30);
  BasisTransform basis(grid, {2, 2});
  const std::vector<double> p = {2.0, 2.0};
  // Zero function -> ratio 0 by convention.
  GridFunction zero = GridFunction::constant(grid, 0.0);
  std::vector<GridFunction> zgrads = {GridFunction::constant(grid, 0.0),
                                      GridFunction::constant(grid, 0.0)};
  EXPECT_DOUBLE_EQ(anisotropic_embedding_ratio(zero, zgrads, p), 0.0);

  // First eigenfunction: finite ratio, invariant under scaling.
  SpectralCoeffs c({2, 2});
  const int k11[2] = {1, 1};
  c.at(k11) = 1.0;
  GridFunction u = basis.eval_expansion(c);
  std::vector<GridFunction> grads = {
      basis.eval_expansion(c, DerivSpec::first(0)),
      basis.eval_expansion(c, DerivSpec::first(1))};
  const double ratio = anisotropic_embedding_ratio(u, grads, p);
  EXPECT_GT(ratio, 0.0);
  EXPECT_TRUE(std::isfinite(ratio));
  GridFunction u2 = u;
  for (auto& v : u2.values) v *= 2.0;
  auto g2 = grads;
  for (auto& g : g2)
    for (auto& v : g.values) v *= 2.0;
  EXPECT_NEAR(anisotropic_embedding_ratio(u2, g2, p), ratio, 1e-10 * ratio);
}

TEST(EmbeddingRatio, RejectsInadmissibleExponents) {
  auto grid = unit_square();
  GridFunction u = GridFunction::constant(grid, 1.0);
  std::vector<GridFunction> grads = {GridFunction::constant(grid, 0.0),
                                     GridFunction::constant(grid, 0.0)};
  const std::vector<double> bad = {0.9, 2.0};  // p_wedge below 2N/(N+2)
  EXPECT_THROW(anisotropic_embedding_ratio(u, grads, bad), InvalidArgument);
}

TEST(Properties, SuitesPass) {
  auto results = run_property_suites("funcspace", 12345u);
  ASSERT_FALSE(results.empty());
  for (const auto& r : results)
    EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
}

}  // namespace
