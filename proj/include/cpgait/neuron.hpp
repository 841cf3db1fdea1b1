#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cpgait/ode.hpp"

namespace cpgait {

/// Constants of the four-variable bursting neuron. Defaults are the
/// reference parameter table; `i_ext` is the speed parameter and is swept
/// over [35.65, 37.7]. Units are assumed to be mV, ms, mS and uA.
struct NeuronParams {
  double capacitance = 1.2;

  double g_ca = 4.4;
  double g_k = 9.0;
  double g_ks = 0.5;
  double g_leak = 2.0;
  double g_syn = 0.01;

  double e_ca = 120.0;
  double e_k = -80.0;
  double e_ks = -80.0;
  double e_leak = -60.0;
  double e_syn_post = -70.0;
  double e_syn_pre = 2.0;

  double k_ca = 0.056;
  double k_k = 0.1;
  double k_ks = 0.8;
  double k_syn = 0.11;

  double v_ca = -1.2;
  double v_k = 2.0;
  double v_ks = -26.0;

  double syn_scale = 444.48;  // a
  double gamma = 5.0;
  double delta = 0.027;
  double tau_syn = 5.56;

  double i_ext = 35.65;

  /// Throws ConfigError unless conductances, C, tau_syn and delta are positive
  /// and every field is finite.
  void validate() const;

  /// Stable 64-bit digest of every field (hex), used to key cached tables.
  std::string hash() const;
};

inline constexpr double kIExtMin = 35.65;
inline constexpr double kIExtMax = 37.7;

struct NeuronState {
  double v = 0.0;
  double m = 0.0;
  double w = 0.0;
  double s = 0.0;

  State<4> as_array() const { return {v, m, w, s}; }
  static NeuronState from_array(const State<4>& x) { return {x[0], x[1], x[2], x[3]}; }
};

namespace gates {

double ca_activation(double v, const NeuronParams& p);   // n_inf
double k_activation(double v, const NeuronParams& p);    // m_inf
double ks_activation(double v, const NeuronParams& p);   // w_inf
double syn_activation(double v, const NeuronParams& p);  // s_inf
double k_time_scale(double v, const NeuronParams& p);    // tau_m
double ks_time_scale(double v, const NeuronParams& p);   // tau_w

}  // namespace gates

/// Right-hand side (dv/dt, dm/dt, dw/dt, ds/dt) with the drive I_ext + i_extra.
/// Throws NumericalError(kBlowUp) on non-finite input.
NeuronState vector_field(const NeuronState& x, const NeuronParams& p, double i_extra = 0.0);

/// Same as vector_field but on raw arrays and without the finiteness check;
/// this is the integrator's inner loop.
void vector_field_raw(const State<4>& x, State<4>& dxdt, const NeuronParams& p, double i_extra);

/// Analytic Jacobian of vector_field with respect to (v, m, w, s).
Eigen::Matrix4d jacobian(const NeuronState& x, const NeuronParams& p);

/// Second time derivative of s along the flow, used for H''.
double syn_second_derivative(const NeuronState& x, const NeuronParams& p);

/// Accepted integrator steps with their time derivatives. Off-step queries use
/// cubic Hermite interpolation between the bracketing steps.
struct Trajectory {
  std::vector<double> t;
  std::vector<NeuronState> x;
  std::vector<NeuronState> dxdt;

  std::size_t size() const { return t.size(); }
  NeuronState at(double time) const;
};

Trajectory integrate(const NeuronState& initial, const NeuronParams& p, double duration,
                     const Tolerances& tol = {});

struct LimitCycleOptions {
  double v_threshold = -20.0;
  /// Minimum quiescent (below-threshold) interval before an onset, as a
  /// fraction of the current period estimate.
  double quiescence_fraction = 0.25;
  double period_rtol = 1e-6;
  double transient_periods = 10.0;
  std::size_t grid_size = 4096;
  std::size_t max_cycles = 2000;
  /// Time span used to obtain a first period estimate; doubled on demand.
  double probe_duration = 1500.0;
  double max_probe_duration = 24000.0;
  bool enforce_range = true;
  Tolerances tol{1e-10, 1e-12};
  NeuronState initial{-30.0, 0.0, 0.0, 0.0};
};

/// Uniformly sampled periodic orbit anchored at burst onset (index 0).
struct LimitCycle {
  NeuronParams params;
  double period = 0.0;  // ms
  std::vector<NeuronState> samples;
  std::vector<NeuronState> derivatives;  // d/dt at each sample
  /// max-norm of Gamma(T) - Gamma(0) from a direct integration over one period.
  double closure_error = 0.0;
  /// |T_k - T_{k-1}| / T_k of the final two onset-to-onset estimates.
  double period_change = 0.0;
  /// Extent by which m or w left [0, 1] along the stored orbit (0 if none).
  double gating_excursion = 0.0;

  double frequency() const { return 1.0 / period; }
  std::size_t size() const { return samples.size(); }
  double dphase() const { return 1.0 / static_cast<double>(samples.size()); }
  /// State at a phase in [0, 1) by periodic cubic Hermite interpolation.
  NeuronState state_at(double phase) const;
  std::vector<double> component(int index) const;
};

/// Finds the attracting bursting orbit by forward integration and burst-onset
/// period detection. Throws NumericalError(kNoConvergence) when no stable
/// periodic bursting is found (e.g. the orbit settles to rest).
LimitCycle find_limit_cycle(const NeuronParams& p, const LimitCycleOptions& opts = {});

struct FrequencyRow {
  double i_ext = 0.0;
  std::optional<double> frequency;  // 1/ms
  std::optional<double> period;     // ms
  std::string error;
};

std::vector<FrequencyRow> frequency_curve(const NeuronParams& p, const std::vector<double>& i_ext_grid,
                                          const LimitCycleOptions& opts = {});

}  // namespace cpgait
