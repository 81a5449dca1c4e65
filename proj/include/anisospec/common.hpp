#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anisospec {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Expression text could not be parsed; carries the byte offset of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::size_t byte_offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation produced a non-finite value or hit a domain error.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument combinations (inadmissible exponents, bad shapes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Time integration failed (stiffness, blowup, bracket failure, ...).
class SolverError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline double pairwise_sum_impl(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

}  // namespace detail

/// Deterministic fixed-order pairwise summation.
inline double pairwise_sum(std::span<const double> values) {
  return detail::pairwise_sum_impl(values.data(), values.size());
}

/// n equally spaced points from a to b inclusive (n >= 2), or {a} for n == 1.
inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  if (n <= 1) {
    out.push_back(a);
    return out;
  }
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.push_back(a + (b - a) * static_cast<double>(i) / (n - 1));
  out.back() = b;
  return out;
}

/// Trapezoid rule over an arbitrary strictly increasing time grid.
inline double trapezoid(std::span<const double> t, std::span<const double> f) {
  if (t.size() != f.size())
    throw InvalidArgument("trapezoid: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    acc += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
  return acc;
}

/// Portable uniform double in [0,1) from a 64-bit generator; avoids the
/// implementation-defined behavior of std::uniform_real_distribution.
template <typename Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Rng>
double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace anisospec
