#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>

namespace cpgait {

/// Maps x onto [0, 1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Shortest signed representative of x modulo 1, in [-1/2, 1/2).
inline double wrap_signed(double x) { return wrap_unit(x + 0.5) - 0.5; }

/// Per-coordinate wrapped distance min(|d|, 1-|d|) on the unit circle.
inline double circle_distance(double a, double b) {
  const double d = std::abs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

/// Euclidean combination of wrapped coordinate distances on the 2-torus.
inline double torus_distance(double a1, double a2, double b1, double b2) {
  return std::hypot(circle_distance(a1, b1), circle_distance(a2, b2));
}

/// Locates the cell of a uniform periodic grid with `n` nodes at k/n.
/// Returns the left node index and the local coordinate u in [0, 1).
inline std::pair<std::size_t, double> periodic_cell(double phase, std::size_t n) {
  const double x = wrap_unit(phase) * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::floor(x));
  double u = x - static_cast<double>(k);
  if (k >= n) {
    k = 0;
    u = 0.0;
  }
  return {k, u};
}

/// Cubic Hermite interpolation of a 1-periodic function sampled at k/n,
/// given values and derivatives with respect to phase.
inline double hermite3(std::span<const double> y, std::span<const double> dy, double phase) {
  const std::size_t n = y.size();
  const auto [k, u] = periodic_cell(phase, n);
  const std::size_t k1 = (k + 1) % n;
  const double h = 1.0 / static_cast<double>(n);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  return h00 * y[k] + h10 * h * dy[k] + h01 * y[k1] + h11 * h * dy[k1];
}

/// Quintic Hermite interpolant of a 1-periodic function from samples of the
/// value and its first two phase derivatives. Returns (f, f', f'') of the
/// interpolant, so the derivative is exactly consistent with the value.
struct Quintic {
  double value;
  double first;
  double second;
};

inline Quintic hermite5(std::span<const double> y, std::span<const double> dy,
                        std::span<const double> d2y, double phase) {
  const std::size_t n = y.size();
  const auto [k, u] = periodic_cell(phase, n);
  const std::size_t k1 = (k + 1) % n;
  const double h = 1.0 / static_cast<double>(n);

  const double p0 = y[k], p1 = y[k1];
  const double m0 = dy[k] * h, m1 = dy[k1] * h;
  const double a0 = d2y[k] * h * h, a1 = d2y[k1] * h * h;

  // Coefficients of the local polynomial c0 + c1 u + ... + c5 u^5.
  const double c0 = p0, c1 = m0, c2 = 0.5 * a0;
  const double c3 = 10 * (p1 - p0) - 6 * m0 - 4 * m1 - 1.5 * a0 + 0.5 * a1;
  const double c4 = -15 * (p1 - p0) + 8 * m0 + 7 * m1 + 1.5 * a0 - a1;
  const double c5 = 6 * (p1 - p0) - 3 * m0 - 3 * m1 - 0.5 * a0 + 0.5 * a1;

  const double f = c0 + u * (c1 + u * (c2 + u * (c3 + u * (c4 + u * c5))));
  const double fu = c1 + u * (2 * c2 + u * (3 * c3 + u * (4 * c4 + u * 5 * c5)));
  const double fuu = 2 * c2 + u * (6 * c3 + u * (12 * c4 + u * 20 * c5));
  return {f, fu / h, fuu / (h * h)};
}

}  // namespace cpgait
