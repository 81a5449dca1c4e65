#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "anisospec/common.hpp"
#include "anisospec/grid.hpp"

namespace anisospec {

/// Multi-index k (all components >= 1) of a Dirichlet sine eigenfunction.
struct EigenIndex {
  std::vector<int> k;

  EigenIndex() = default;
  explicit EigenIndex(std::vector<int> kk) : k(std::move(kk)) {
    for (int v : k)
      if (v < 1) throw InvalidArgument("EigenIndex: components >= 1");
  }
};

/// Dirichlet eigenvalue on the box: lambda_k = pi^2 sum_i k_i^2 / l_i^2.
///
/// The eigenfunctions are psi_k(x) = prod_i sqrt(2/l_i) sin(pi k_i x_i / l_i)
/// on Prod(0, l_i), normalized so ||psi_k||_2 = 1. This family is the
/// complete Dirichlet eigenbasis of the translated box.
inline double eigenvalue(const EigenIndex& idx, const RectDomain& dom) {
  if (static_cast<int>(idx.k.size()) != dom.dim())
    throw InvalidArgument("eigenvalue: index/domain dimension mismatch");
  const double pi = 3.14159265358979323846;
  double s = 0.0;
  for (int a = 0; a < dom.dim(); ++a) {
    const double r = idx.k[static_cast<std::size_t>(a)] /
                     dom.lengths[static_cast<std::size_t>(a)];
    s += r * r;
  }
  return pi * pi * s;
}

/// Coefficient tensor c_k over the mode box {1..m_1} x ... x {1..m_N},
/// row-major with the last axis fastest.
struct SpectralCoeffs {
  std::vector<int> modes;
  std::vector<double> c;

  SpectralCoeffs() = default;
  explicit SpectralCoeffs(std::vector<int> m) : modes(std::move(m)) {
    std::size_t n = 1;
    for (int v : modes) {
      if (v < 1) throw InvalidArgument("SpectralCoeffs: modes >= 1");
      n *= static_cast<std::size_t>(v);
    }
    c.assign(n, 0.0);
  }

  std::size_t size() const { return c.size(); }

  std::size_t flat_index(std::span<const int> k) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < modes.size(); ++a) {
      if (k[a] < 1 || k[a] > modes[a])
        throw InvalidArgument("SpectralCoeffs: index out of mode box");
      f = f * static_cast<std::size_t>(modes[a]) +
          static_cast<std::size_t>(k[a] - 1);
    }
    return f;
  }

  double& at(std::span<const int> k) { return c[flat_index(k)]; }
  double at(std::span<const int> k) const { return c[flat_index(k)]; }

  double norm2_sq() const {  // ||u||_2^2 by Parseval
    double s = 0.0;
    for (double v : c) s += v * v;
    return s;
  }

  bool finite() const {
    for (double v : c)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Derivative selector for expansion evaluation: none, D_i, or D2_{ij}.
struct DerivSpec {
  int i = -1;
  int j = -1;

  static DerivSpec none() { return {}; }
  static DerivSpec first(int i) { return {i, -1}; }
  static DerivSpec second(int i, int j) { return {i, j}; }
};

/// Separable transforms between coefficient tensors and nodal grids for the
/// sine eigenbasis: evaluation of expansions (with exact analytic first and
/// second derivatives) and L2 projection by quadrature.
class BasisTransform {
 public:
  BasisTransform(GridPtr grid, std::vector<int> modes)
      : grid_(std::move(grid)), modes_(std::move(modes)) {
    const int dim = grid_->domain().dim();
    if (static_cast<int>(modes_.size()) != dim)
      throw InvalidArgument("BasisTransform: modes/domain mismatch");
    const double pi = 3.14159265358979323846;
    factors_.resize(3);
    for (int order = 0; order <= 2; ++order)
      factors_[static_cast<std::size_t>(order)].resize(
          static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
      const auto& x = grid_->axis_nodes(a);
      const double l = grid_->domain().lengths[static_cast<std::size_t>(a)];
      const int m = modes_[static_cast<std::size_t>(a)];
      const double norm = std::sqrt(2.0 / l);
      for (int order = 0; order <= 2; ++order) {
        auto& M = factors_[static_cast<std::size_t>(order)]
                          [static_cast<std::size_t>(a)];
        M.assign(x.size() * static_cast<std::size_t>(m), 0.0);
        for (std::size_t g = 0; g < x.size(); ++g) {
          for (int k = 1; k <= m; ++k) {
            const double freq = pi * k / l;
            const double arg = freq * x[g];
            double v = 0.0;
            if (order == 0)
              v = norm * std::sin(arg);
            else if (order == 1)
              v = norm * freq * std::cos(arg);
            else
              v = -norm * freq * freq * std::sin(arg);
            M[g * static_cast<std::size_t>(m) + static_cast<std::size_t>(k - 1)] = v;
          }
        }
      }
    }
  }

  const GridPtr& grid() const { return grid_; }
  const std::vector<int>& modes() const { return modes_; }

  int max_mode() const {
    int m = 0;
    for (int v : modes_) m = std::max(m, v);
    return m;
  }

  /// True when the grid meets the minimal sampling bound (>= 2*max_mode + 1
  /// nodes per axis). Note this bound only controls aliasing; quadrature
  /// orthogonality to 1e-12 needs denser grids (about 2*m + 12 per axis).
  bool grid_resolves_modes() const {
    for (std::size_t a = 0; a < modes_.size(); ++a)
      if (grid_->shape()[a] < 2 * modes_[a] + 1) return false;
    return true;
  }

  /// Nodal values of sum_k c_k D^alpha psi_k, with alpha encoded per axis as
  /// derivative order 0, 1 or 2 (D2_{ii} gives order 2 on axis i).
  void eval(const SpectralCoeffs& coeffs, DerivSpec d,
            std::span<double> out) const {
    check_coeffs(coeffs);
    std::vector<int> order(modes_.size(), 0);
    apply_deriv_orders(d, order);
    const int dim = static_cast<int>(modes_.size());
    // Transform axis by axis, coefficient extent -> grid extent.
    std::vector<double> cur(coeffs.c.begin(), coeffs.c.end());
    std::vector<int> shape(modes_.begin(), modes_.end());
    for (int a = 0; a < dim; ++a) {
      const auto& M = factors_[static_cast<std::size_t>(
          order[static_cast<std::size_t>(a)])][static_cast<std::size_t>(a)];
      contract_axis(cur, shape, a, M,
                    grid_->shape()[static_cast<std::size_t>(a)], false);
    }
    if (cur.size() != out.size())
      throw InvalidArgument("BasisTransform::eval: output size mismatch");
    std::copy(cur.begin(), cur.end(), out.begin());
  }

  GridFunction eval_expansion(const SpectralCoeffs& coeffs,
                              DerivSpec d = DerivSpec::none()) const {
    std::vector<double> v(grid_->size());
    eval(coeffs, d, v);
    return GridFunction(grid_, std::move(v));
  }

  /// Coefficients <u, psi_k> by quadrature; optionally <u, D^alpha psi_k>
  /// with per-axis derivative orders taken from d (used by the Galerkin
  /// right-hand side to form (F_j, D_j psi_k)).
  SpectralCoeffs project(std::span<const double> values,
                         DerivSpec d = DerivSpec::none(),
                         bool* aliasing_warning = nullptr) const {
    if (values.size() != grid_->size())
      throw InvalidArgument("BasisTransform::project: size mismatch");
    if (aliasing_warning) *aliasing_warning = !grid_resolves_modes();
    std::vector<int> order(modes_.size(), 0);
    apply_deriv_orders(d, order);
    const int dim = static_cast<int>(modes_.size());
    // Weighted values, then contract grid extent -> coefficient extent.
    std::vector<double> cur(values.size());
    const auto& w = grid_->weights();
    for (std::size_t i = 0; i < values.size(); ++i) cur[i] = values[i] * w[i];
    std::vector<int> shape(grid_->shape());
    for (int a = 0; a < dim; ++a) {
      const auto& M = factors_[static_cast<std::size_t>(
          order[static_cast<std::size_t>(a)])][static_cast<std::size_t>(a)];
      contract_axis(cur, shape, a, M, modes_[static_cast<std::size_t>(a)],
                    true);
    }
    SpectralCoeffs out(modes_);
    if (cur.size() != out.c.size())
      throw InvalidArgument("BasisTransform::project: internal shape error");
    out.c = std::move(cur);
    return out;
  }

  /// Flat eigenvalue table aligned with SpectralCoeffs flattening.
  std::vector<double> eigenvalues() const {
    SpectralCoeffs probe(modes_);
    std::vector<double> lam(probe.size());
    std::vector<int> k(modes_.size(), 1);
    for (std::size_t f = 0; f < lam.size(); ++f) {
      lam[f] = eigenvalue(EigenIndex(k), grid_->domain());
      for (int a = static_cast<int>(modes_.size()) - 1; a >= 0; --a) {
        if (++k[static_cast<std::size_t>(a)] <=
            modes_[static_cast<std::size_t>(a)])
          break;
        k[static_cast<std::size_t>(a)] = 1;
      }
    }
    return lam;
  }

 private:
  void check_coeffs(const SpectralCoeffs& coeffs) const {
    if (coeffs.modes != modes_)
      throw InvalidArgument("BasisTransform: coefficient modes mismatch");
  }

  void apply_deriv_orders(DerivSpec d, std::vector<int>& order) const {
    auto bump = [&](int axis) {
      if (axis < 0) return;
      if (axis >= static_cast<int>(order.size()))
        throw InvalidArgument("DerivSpec: axis out of range");
      order[static_cast<std::size_t>(axis)] += 1;
    };
    bump(d.i);
    bump(d.j);
  }

  // Apply matrix M (new_extent x old_extent, stored row-major as
  // [g*old + k] when !transpose, i.e. M[g][k]) along axis a of the tensor;
  // transpose=true applies M^T meaning out[k] = sum_g M[g][k] in[g].
  static void contract_axis(std::vector<double>& data, std::vector<int>& shape,
                            int a, const std::vector<double>& M,
                            int new_extent, bool transpose) {
    const std::size_t old_extent =
        static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]);
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < a; ++i) outer *= static_cast<std::size_t>(shape[static_cast<std::size_t>(i)]);
    for (std::size_t i = static_cast<std::size_t>(a) + 1; i < shape.size(); ++i)
      inner *= static_cast<std::size_t>(shape[i]);
    std::vector<double> out(outer * static_cast<std::size_t>(new_extent) * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      const double* src = data.data() + o * old_extent * inner;
      double* dst = out.data() + o * static_cast<std::size_t>(new_extent) * inner;
      for (std::size_t k = 0; k < old_extent; ++k) {
        const double* row = src + k * inner;
        for (int g = 0; g < new_extent; ++g) {
          const double m =
              transpose
                  ? M[k * static_cast<std::size_t>(new_extent) + static_cast<std::size_t>(g)]
                  : M[static_cast<std::size_t>(g) * old_extent + k];
          if (m == 0.0) continue;
          double* drow = dst + static_cast<std::size_t>(g) * inner;
          for (std::size_t i = 0; i < inner; ++i) drow[i] += m * row[i];
        }
      }
    }
    data = std::move(out);
    shape[static_cast<std::size_t>(a)] = new_extent;
  }

  GridPtr grid_;
  std::vector<int> modes_;
  // factors_[order][axis] is (grid_nodes x modes) row-major.
  std::vector<std::vector<std::vector<double>>> factors_;
};

/// (sum_k lambda_k^{2s} c_k^2)^{1/2}: equals ||Delta^s u||_2 for integer s
/// and the Dirichlet seminorm ||grad u||_2 for s = 1/2.
inline double parseval_norm(const SpectralCoeffs& coeffs,
                            const RectDomain& dom, double order_s) {
  std::vector<int> k(coeffs.modes.size(), 1);
  std::vector<double> terms(coeffs.size());
  for (std::size_t f = 0; f < coeffs.size(); ++f) {
    const double lam = eigenvalue(EigenIndex(k), dom);
    terms[f] = std::pow(lam, 2.0 * order_s) * coeffs.c[f] * coeffs.c[f];
    for (int a = static_cast<int>(coeffs.modes.size()) - 1; a >= 0; --a) {
      if (++k[static_cast<std::size_t>(a)] <=
          coeffs.modes[static_cast<std::size_t>(a)])
        break;
      k[static_cast<std::size_t>(a)] = 1;
    }
  }
  return std::sqrt(pairwise_sum(terms));
}

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Quadrature check of int |Delta u|^2 = sum_{ij} int (D2_{ij} u)^2 for a
/// finite expansion (both sides evaluated independently on the grid).
inline IdentityCheck laplacian_identity_check(const SpectralCoeffs& coeffs,
                                              const BasisTransform& basis,
                                              double rel_tol = 1e-9) {
  const int dim = basis.grid()->domain().dim();
  const std::size_t n = basis.grid()->size();
  std::vector<double> lap(n, 0.0), tmp(n);
  for (int i = 0; i < dim; ++i) {
    basis.eval(coeffs, DerivSpec::second(i, i), tmp);
    for (std::size_t g = 0; g < n; ++g) lap[g] += tmp[g];
  }
  for (std::size_t g = 0; g < n; ++g) lap[g] *= lap[g];
  IdentityCheck out;
  out.lhs = basis.grid()->integrate(lap);
  double rhs = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      basis.eval(coeffs, DerivSpec::second(i, j), tmp);
      for (std::size_t g = 0; g < n; ++g) tmp[g] *= tmp[g];
      rhs += basis.grid()->integrate(tmp);
    }
  }
  out.rhs = rhs;
  const double scale = std::max({std::fabs(out.lhs), std::fabs(out.rhs), 1e-300});
  out.pass = std::fabs(out.lhs - out.rhs) <= rel_tol * scale;
  return out;
}

}  // namespace anisospec
