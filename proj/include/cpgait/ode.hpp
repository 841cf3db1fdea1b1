#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "cpgait/error.hpp"

namespace cpgait {

template <std::size_t N>
using State = std::array<double, N>;

/// Error control for the embedded Dormand-Prince 5(4) integrator.
struct Tolerances {
  double rel = 1e-8;
  double abs = 1e-10;
  double initial_step = 1e-3;
  /// Steps shorter than min_step * max(1, |t|) are treated as stiffness failure.
  double min_step = 1e-13;
  /// 0 leaves the step size unbounded.
  double max_step = 0.0;
  std::size_t max_steps = 200'000'000;

  Tolerances scaled(double factor) const {
    Tolerances t = *this;
    t.rel *= factor;
    t.abs *= factor;
    return t;
  }
};

/// One accepted integrator step together with its continuous extension.
template <std::size_t N, class Dense>
class DenseSegment {
 public:
  DenseSegment(const Dense& dense, double t0, double t1) : dense_(dense), t0_(t0), t1_(t1) {}

  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  const State<N>& end_state() const { return dense_.current_state(); }
  const State<N>& begin_state() const { return dense_.previous_state(); }

  State<N> operator()(double t) const {
    State<N> x;
    dense_.calc_state(t, x);
    return x;
  }

 private:
  const Dense& dense_;
  double t0_;
  double t1_;
};

namespace detail {

template <std::size_t N>
bool all_finite(const State<N>& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace detail

/// Integrates dx/dt = rhs(x, t) from t0 to t_end with dense output.
///
/// `rhs` has the odeint signature `void(const State<N>&, State<N>&, double)`.
/// `on_step(const DenseSegment&)` runs after every accepted step; returning
/// false stops the integration early, in which case the state at the end of
/// that step is returned. Segments may extend past t_end; callers querying the
/// continuous extension must clamp to t_end themselves.
template <std::size_t N, class Rhs, class OnStep>
State<N> integrate_dense(Rhs&& rhs, const State<N>& x0, double t0, double t_end,
                         const Tolerances& tol, OnStep&& on_step,
                         const std::string& module = "ode") {
  namespace odeint = boost::numeric::odeint;
  using Stepper = odeint::runge_kutta_dopri5<State<N>>;
  using Controlled = odeint::controlled_runge_kutta<Stepper>;
  using Dense = odeint::dense_output_runge_kutta<Controlled>;

  if (!detail::all_finite(x0)) {
    throw NumericalError(module, NumericalError::Reason::kBlowUp, "non-finite initial state");
  }
  if (!(t_end > t0)) return x0;

  typename Controlled::error_checker_type checker(tol.abs, tol.rel);
  typename Controlled::step_adjuster_type adjuster(tol.max_step);
  Dense dense{Controlled(checker, adjuster)};
  dense.initialize(x0, t0, std::min(tol.initial_step, t_end - t0));

  auto system = [&rhs](const State<N>& x, State<N>& dxdt, double t) { rhs(x, dxdt, t); };
  std::size_t steps = 0;
  while (dense.current_time() < t_end) {
    std::pair<double, double> span;
    try {
      span = dense.do_step(system);
    } catch (const odeint::step_adjustment_error&) {
      throw NumericalError(module, NumericalError::Reason::kStiffFailure,
                           "step size control failed near t=" + std::to_string(dense.current_time()));
    }
    if (!detail::all_finite(dense.current_state())) {
      throw NumericalError(module, NumericalError::Reason::kBlowUp,
                           "non-finite state at t=" + std::to_string(span.second));
    }
    const double h = span.second - span.first;
    if (h < tol.min_step * std::max(1.0, std::abs(span.second)) && span.second < t_end) {
      throw NumericalError(module, NumericalError::Reason::kStiffFailure,
                           "step size underflow at t=" + std::to_string(span.second));
    }
    if (++steps > tol.max_steps) {
      throw NumericalError(module, NumericalError::Reason::kStiffFailure,
                           "step budget exhausted at t=" + std::to_string(span.second));
    }
    DenseSegment<N, Dense> segment(dense, span.first, span.second);
    if (!on_step(static_cast<const DenseSegment<N, Dense>&>(segment))) {
      return dense.current_state();
    }
  }
  State<N> x_end;
  dense.calc_state(t_end, x_end);
  return x_end;
}

template <std::size_t N, class Rhs>
State<N> integrate_to(Rhs&& rhs, const State<N>& x0, double t0, double t_end,
                      const Tolerances& tol, const std::string& module = "ode") {
  return integrate_dense<N>(std::forward<Rhs>(rhs), x0, t0, t_end, tol,
                            [](const auto&) { return true; }, module);
}

/// Locates a root of g on [a, b] given g(a) and g(b) of opposite sign.
template <class G>
double bisect_root(G&& g, double a, double b, double ga, double tol = 1e-13, int max_iter = 200) {
  for (int i = 0; i < max_iter && (b - a) > tol * std::max(1.0, std::abs(a)); ++i) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if (gm == 0.0) return m;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace cpgait
