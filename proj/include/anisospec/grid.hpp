#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "anisospec/common.hpp"
#include "anisospec/field_expr.hpp"

namespace anisospec {

/// Axis-aligned box Prod_i (0, l_i).
struct RectDomain {
  std::vector<double> lengths;

  RectDomain() = default;
  explicit RectDomain(std::vector<double> l) : lengths(std::move(l)) {
    if (lengths.empty()) throw InvalidArgument("RectDomain: dimension >= 1");
    for (double v : lengths)
      if (!(v > 0.0)) throw InvalidArgument("RectDomain: lengths must be > 0");
  }

  int dim() const { return static_cast<int>(lengths.size()); }
  double volume() const {
    double v = 1.0;
    for (double l : lengths) v *= l;
    return v;
  }
};

/// Gauss-Legendre nodes and weights on (0, 1), by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n >= 1");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_n(x) and P'_n(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map from (-1,1) to (0,1); nodes come out in decreasing x.
    nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 0.5 * w;
    weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
}

/// Tensor-product Gauss-Legendre grid over a RectDomain. Row-major flattening
/// with the last axis fastest.
class TensorGrid {
 public:
  TensorGrid(RectDomain domain, std::vector<int> shape)
      : domain_(std::move(domain)), shape_(std::move(shape)) {
    if (static_cast<int>(shape_.size()) != domain_.dim())
      throw InvalidArgument("TensorGrid: shape/dimension mismatch");
    const int dim = domain_.dim();
    axis_nodes_.resize(static_cast<std::size_t>(dim));
    axis_weights_.resize(static_cast<std::size_t>(dim));
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
      if (shape_[static_cast<std::size_t>(a)] < 1)
        throw InvalidArgument("TensorGrid: nodes per axis >= 1");
      std::vector<double> x, w;
      gauss_legendre(shape_[static_cast<std::size_t>(a)], x, w);
      const double l = domain_.lengths[static_cast<std::size_t>(a)];
      for (auto& v : x) v *= l;
      for (auto& v : w) v *= l;
      axis_nodes_[static_cast<std::size_t>(a)] = std::move(x);
      axis_weights_[static_cast<std::size_t>(a)] = std::move(w);
      total *= static_cast<std::size_t>(shape_[static_cast<std::size_t>(a)]);
    }
    weight_.resize(total);
    coord_.assign(static_cast<std::size_t>(dim), std::vector<double>(total));
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (std::size_t f = 0; f < total; ++f) {
      double w = 1.0;
      for (int a = 0; a < dim; ++a) {
        coord_[static_cast<std::size_t>(a)][f] =
            axis_nodes_[static_cast<std::size_t>(a)]
                       [static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        w *= axis_weights_[static_cast<std::size_t>(a)]
                          [static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      }
      weight_[f] = w;
      for (int a = dim - 1; a >= 0; --a) {
        if (++idx[static_cast<std::size_t>(a)] <
            shape_[static_cast<std::size_t>(a)])
          break;
        idx[static_cast<std::size_t>(a)] = 0;
      }
    }
  }

  const RectDomain& domain() const { return domain_; }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return weight_.size(); }
  const std::vector<double>& axis_nodes(int a) const {
    return axis_nodes_[static_cast<std::size_t>(a)];
  }
  const std::vector<double>& axis_weights(int a) const {
    return axis_weights_[static_cast<std::size_t>(a)];
  }
  const std::vector<double>& weights() const { return weight_; }
  /// coords()[axis][flat_index]
  std::span<const std::vector<double>> coords() const {
    return {coord_.data(), coord_.size()};
  }

  /// Quadrature of nodal values; deterministic fixed-order reduction.
  double integrate(std::span<const double> values) const {
    if (values.size() != weight_.size())
      throw InvalidArgument("TensorGrid::integrate: size mismatch");
    std::vector<double> prod(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      prod[i] = values[i] * weight_[i];
    return pairwise_sum(prod);
  }

 private:
  RectDomain domain_;
  std::vector<int> shape_;
  std::vector<std::vector<double>> axis_nodes_, axis_weights_;
  std::vector<double> weight_;
  std::vector<std::vector<double>> coord_;
};

using GridPtr = std::shared_ptr<const TensorGrid>;

inline GridPtr make_grid(RectDomain domain, std::vector<int> shape) {
  return std::make_shared<TensorGrid>(std::move(domain), std::move(shape));
}

/// Nodal values of a scalar function on a quadrature grid.
struct GridFunction {
  GridPtr grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(GridPtr g, std::vector<double> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (!grid || values.size() != grid->size())
      throw InvalidArgument("GridFunction: values/grid shape mismatch");
  }

  static GridFunction constant(GridPtr g, double c) {
    std::vector<double> v(g->size(), c);
    return GridFunction(std::move(g), std::move(v));
  }

  /// Sample a field expression on the grid at time t.
  static GridFunction sample(GridPtr g, const FieldExpr& e, double t = 0.0) {
    std::vector<double> v(g->size());
    FieldTape tape(e);
    tape.eval(g->coords(), t, v);
    return GridFunction(std::move(g), std::move(v));
  }
};

/// Max over a dense closed sample grid of the Euclidean norm of the full
/// space-time gradient, times a 1.1 safety factor. Sampling-based: the
/// returned estimate is not certified and may under- or over-estimate.
inline LipschitzEstimate lipschitz_estimate(const FieldExpr& e,
                                            const RectDomain& domain,
                                            double horizon,
                                            int samples_per_axis = 64) {
  const int dim = domain.dim();
  std::vector<FieldTape> grads;
  grads.reserve(static_cast<std::size_t>(dim) + 1);
  for (int a = 0; a < dim; ++a) grads.emplace_back(e.derivative(a));
  grads.emplace_back(e.derivative(kTimeVar));

  std::vector<std::vector<double>> axes(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a)
    axes[static_cast<std::size_t>(a)] =
        linspace(0.0, domain.lengths[static_cast<std::size_t>(a)],
                 samples_per_axis);
  const std::vector<double> ts =
      horizon > 0.0 ? linspace(0.0, horizon, samples_per_axis)
                    : std::vector<double>{0.0};

  // Flatten the spatial sample grid once; sweep time outside.
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

  double worst = 0.0;
  std::vector<double> buf(total);
  std::vector<double> norm2(total);
  std::vector<std::vector<double>> scratch;
  for (double t : ts) {
    std::fill(norm2.begin(), norm2.end(), 0.0);
    for (auto& g : grads) {
      g.eval_into(coords, t, buf, scratch);
      for (std::size_t i = 0; i < total; ++i) norm2[i] += buf[i] * buf[i];
    }
    for (std::size_t i = 0; i < total; ++i) worst = std::max(worst, norm2[i]);
  }
  LipschitzEstimate out;
  out.value = 1.1 * std::sqrt(worst);
  out.certified = false;
  return out;
}

}  // namespace anisospec
