#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "cpgait/network.hpp"
#include "cpgait/phase_reduction.hpp"

namespace testing {

// Smooth stand-in for a computed H, negative on [1/3, 2/3] with a nontrivial eta.
struct Fourier {
  double mean = -1.0;
  double a[3] = {-0.24, 0.13, 0.06};
  double b[3] = {-0.31, -0.2, 0.0};

  double operator()(double x) const {
    double s = mean;
    for (int k = 0; k < 3; ++k) {
      const double w = 2 * M_PI * (k + 1);
      s += a[k] * std::cos(w * x) + b[k] * std::sin(w * x);
    }
    return s;
  }
  double d1(double x) const {
    double s = 0;
    for (int k = 0; k < 3; ++k) {
      const double w = 2 * M_PI * (k + 1);
      s += w * (-a[k] * std::sin(w * x) + b[k] * std::cos(w * x));
    }
    return s;
  }
  double d2(double x) const {
    double s = 0;
    for (int k = 0; k < 3; ++k) {
      const double w = 2 * M_PI * (k + 1);
      s -= w * w * (a[k] * std::cos(w * x) + b[k] * std::sin(w * x));
    }
    return s;
  }
};

inline std::shared_ptr<const cpgait::CouplingTable> fourier_table(const Fourier& f = {}, std::size_t n = 1024) {
  return std::make_shared<cpgait::CouplingTable>(cpgait::CouplingTable::from_function(
      [f](double x) { return f(x); }, [f](double x) { return f.d1(x); }, [f](double x) { return f.d2(x); }, n));
}

// Root of H(2/3 - e) - H(1/3 + e) on (0, 1/6) by plain bisection on the analytic form.
inline double fourier_eta(const Fourier& f) {
  auto g = [&](double e) { return f(2.0 / 3.0 - e) - f(1.0 / 3.0 + e); };
  double lo = 1e-9, hi = 1.0 / 6.0 - 1e-9;
  if (g(lo) * g(hi) > 0) return 1.0 / 6.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (g(lo) * g(m) <= 0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

// Random couplings satisfying c1+c5 = c2+c4+c7 = c3+c6.
inline cpgait::CouplingStrengths random_balanced(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.5);
  cpgait::CouplingStrengths c;
  const double c2 = u(rng), c4 = u(rng), c7 = u(rng);
  const double sum = c2 + c4 + c7;
  std::uniform_real_distribution<double> part(0.02, sum - 0.02);
  const double c1 = part(rng), c3 = part(rng);
  c.c = {c1, c2, c3, c4, sum - c1, sum - c3, c7};
  return c;
}

}  // namespace testing
