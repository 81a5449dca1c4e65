#include "anisospec/basis.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "anisospec/verify.hpp"

using namespace anisospec;

namespace {

constexpr double kPi = 3.14159265358979323846;

TEST(Eigenvalue, Examples) {
  const RectDomain unit({1.0, 1.0});
  EXPECT_NEAR(eigenvalue(EigenIndex({1, 1}), unit), 2.0 * kPi * kPi, 1e-12);
  EXPECT_NEAR(eigenvalue(EigenIndex({2, 1}), unit), 5.0 * kPi * kPi, 1e-11);
  const RectDomain doubled({2.0, 2.0});
  EXPECT_NEAR(eigenvalue(EigenIndex({1, 1}), doubled),
              eigenvalue(EigenIndex({1, 1}), unit) / 4.0, 1e-12);
}

TEST(EigenIndex, RejectsNonPositive) {
  EXPECT_THROW(EigenIndex({0, 1}), InvalidArgument);
}

TEST(EvalExpansion, OrthonormalityRoundTrip) {
  auto grid = make_grid(RectDomain({1.0, 1.0}), {22, 22});
  BasisTransform basis(grid, {3, 3});
  SpectralCoeffs c({3, 3});
  const int k12[2] = {1, 2};
  c.at(k12) = 1.0;
  GridFunction u = basis.eval_expansion(c);
  SpectralCoeffs back = basis.project(u.values);
  for (std::size_t f = 0; f < back.size(); ++f)
    EXPECT_NEAR(back.c[f], c.c[f], 1e-12);
}

TEST(EvalExpansion, DerivativeVanishesAtMidpoint) {
  const RectDomain dom({1.4, 0.9});
  auto grid = make_grid(dom, {20, 20});
  BasisTransform basis(grid, {1, 1});
  SpectralCoeffs c({1, 1});
  c.c[0] = 1.0;
  // D_1 psi_(1,1) has a cos(pi x1 / l1) factor: zero at x1 = l1/2.
  FieldExpr psi_dx = FieldExpr::parse("sqrt(2/1.4)*sqrt(2/0.9)*(pi/1.4)"
                                      "*cos(pi*x1/1.4)*sin(pi*x2/0.9)");
  std::vector<double> x = {0.7, 0.45};
  EXPECT_NEAR(psi_dx.eval(x, 0.0), 0.0, 1e-15);
  GridFunction d = basis.eval_expansion(c, DerivSpec::first(0));
  // Compare the transform against the closed form at the grid nodes.
  for (std::size_t g = 0; g < grid->size(); ++g) {
    std::vector<double> xs = {grid->coords()[0][g], grid->coords()[1][g]};
    EXPECT_NEAR(d.values[g], psi_dx.eval(xs, 0.0), 1e-12);
  }
}

TEST(EvalExpansion, FirstDerivativeNormSquared) {
  const RectDomain dom({1.0, 1.0});
  auto grid = make_grid(dom, {24, 24});
  BasisTransform basis(grid, {1, 1});
  SpectralCoeffs c({1, 1});
  c.c[0] = 1.0;
  GridFunction d = basis.eval_expansion(c, DerivSpec::first(0));
  std::vector<double> sq(d.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = d.values[i] * d.values[i];
  EXPECT_NEAR(grid->integrate(sq), kPi * kPi, 1e-10);
}

TEST(Project, Examples) {
  auto grid = make_grid(RectDomain({1.0, 1.0}), {24, 24});
  BasisTransform basis(grid, {4, 4});
  // Zero function projects to zero.
  std::vector<double> zeros(grid->size(), 0.0);
  SpectralCoeffs z = basis.project(zeros);
  for (double v : z.c) EXPECT_DOUBLE_EQ(v, 0.0);

  // psi_(1,1) + 0.5 psi_(3,2) recovers (1, 0.5) and <= 1e-10 elsewhere.
  SpectralCoeffs c({4, 4});
  const int k11[2] = {1, 1};
  const int k32[2] = {3, 2};
  c.at(k11) = 1.0;
  c.at(k32) = 0.5;
  GridFunction u = basis.eval_expansion(c);
  SpectralCoeffs back = basis.project(u.values);
  for (std::size_t f = 0; f < back.size(); ++f)
    EXPECT_NEAR(back.c[f], c.c[f], 1e-10);
}

TEST(Project, AliasingWarning) {
  auto coarse = make_grid(RectDomain({1.0, 1.0}), {7, 7});
  BasisTransform basis(coarse, {4, 4});  // needs >= 9 nodes per axis
  std::vector<double> vals(coarse->size(), 1.0);
  bool warn = false;
  basis.project(vals, DerivSpec::none(), &warn);
  EXPECT_TRUE(warn);
  auto fine = make_grid(RectDomain({1.0, 1.0}), {12, 12});
  BasisTransform ok(fine, {4, 4});
  std::vector<double> vals2(fine->size(), 1.0);
  ok.project(vals2, DerivSpec::none(), &warn);
  EXPECT_FALSE(warn);
}

TEST(ParsevalNorm, Examples) {
  const RectDomain dom({1.0, 1.0});
  SpectralCoeffs c({3, 3});
  const int k21[2] = {2, 1};
  c.at(k21) = 0.7;
  // s = 0: Euclidean norm of coefficients.
  EXPECT_NEAR(parseval_norm(c, dom, 0.0), 0.7, 1e-14);
  // Single mode, s = 1: lambda_k |c_k|.
  const double lam = eigenvalue(EigenIndex({2, 1}), dom);
  EXPECT_NEAR(parseval_norm(c, dom, 1.0), lam * 0.7, 1e-10);
  // s = 1/2 on psi_(1,1): sqrt(2 pi^2) = ||grad u||_2.
  SpectralCoeffs e({1, 1});
  e.c[0] = 1.0;
  EXPECT_NEAR(parseval_norm(e, dom, 0.5), std::sqrt(2.0 * kPi * kPi), 1e-12);
}

TEST(LaplacianIdentity, SingleModeAndZero) {
  auto grid = make_grid(RectDomain({1.0, 1.0}), {26, 26});
  BasisTransform basis(grid, {3, 3});
  SpectralCoeffs c({3, 3});
  const int k21[2] = {2, 1};
  c.at(k21) = 1.0;
  auto chk = laplacian_identity_check(c, basis);
  EXPECT_TRUE(chk.pass);
  const double lam = eigenvalue(EigenIndex({2, 1}), grid->domain());
  EXPECT_NEAR(chk.lhs, lam * lam, 1e-7 * lam * lam);

  SpectralCoeffs zero({3, 3});
  auto chk0 = laplacian_identity_check(zero, basis);
  EXPECT_DOUBLE_EQ(chk0.lhs, 0.0);
  EXPECT_DOUBLE_EQ(chk0.rhs, 0.0);
  EXPECT_TRUE(chk0.pass);
}

TEST(Grid, WeightsPositiveSummingToVolume) {
  const RectDomain dom({1.7, 0.4});
  auto grid = make_grid(dom, {13, 9});
  double sum = 0.0;
  for (double w : grid->weights()) {
    EXPECT_GT(w, 0.0);
    sum += w;
  }
  EXPECT_NEAR(sum, dom.volume(), 1e-12 * dom.volume());
}

TEST(Properties, SuitesPass) {
  auto results = run_property_suites("basis", 321u);
  ASSERT_FALSE(results.empty());
  for (const auto& r : results)
    EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
}

}  // namespace
