#include "cpgait/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "cpgait/detail/onset.hpp"
#include "cpgait/error.hpp"
#include "cpgait/periodic.hpp"

namespace cpgait {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr const char* kModule = "bn-core";

}  // namespace

const char* to_string(NumericalError::Reason reason) noexcept {
  using R = NumericalError::Reason;
  switch (reason) {
    case R::kStiffFailure: return "stiff-failure";
    case R::kBlowUp: return "blow-up";
    case R::kNoConvergence: return "no-convergence";
    case R::kAssumptionViolation: return "assumption-violation";
    case R::kDegenerate: return "degenerate";
    case R::kSingular: return "singular";
    case R::kInsufficientEvents: return "insufficient-events";
    case R::kBranchLost: return "branch-lost";
    case R::kInconsistency: return "inconsistency";
    case R::kGridMismatch: return "grid-mismatch";
    case R::kKickTooLarge: return "kick-too-large";
  }
  return "unknown";
}

void NeuronParams::validate() const {
  const double fields[] = {capacitance, g_ca,      g_k,     g_ks,       g_leak,    g_syn,  e_ca,
                           e_k,         e_ks,      e_leak,  e_syn_post, e_syn_pre, k_ca,   k_k,
                           k_ks,        k_syn,     v_ca,    v_k,        v_ks,      syn_scale,
                           gamma,       delta,     tau_syn, i_ext};
  for (double f : fields) {
    if (!std::isfinite(f)) throw ConfigError("neuron parameters must be finite");
  }
  if (capacitance <= 0) throw ConfigError("capacitance must be positive");
  if (g_ca <= 0 || g_k <= 0 || g_ks <= 0 || g_leak <= 0) {
    throw ConfigError("ionic conductances must be positive");
  }
  if (g_syn < 0) throw ConfigError("g_syn must be non-negative");
  if (tau_syn <= 0) throw ConfigError("tau_syn must be positive");
  if (delta <= 0) throw ConfigError("delta must be positive");
  if (gamma <= 0) throw ConfigError("gamma must be positive");
}

std::string NeuronParams::hash() const {
  std::ostringstream text;
  text.precision(17);
  for (double f : {capacitance, g_ca, g_k, g_ks, g_leak, g_syn, e_ca, e_k, e_ks, e_leak, e_syn_post,
                   e_syn_pre, k_ca, k_k, k_ks, k_syn, v_ca, v_k, v_ks, syn_scale, gamma, delta,
                   tau_syn, i_ext}) {
    text << f << ';';
  }
  // FNV-1a
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace gates {

double ca_activation(double v, const NeuronParams& p) { return logistic(2 * p.k_ca * (v - p.v_ca)); }
double k_activation(double v, const NeuronParams& p) { return logistic(2 * p.k_k * (v - p.v_k)); }
double ks_activation(double v, const NeuronParams& p) { return logistic(2 * p.k_ks * (v - p.v_ks)); }
double syn_activation(double v, const NeuronParams& p) {
  return p.syn_scale * logistic(2 * p.k_syn * (v - p.e_syn_pre));
}
double k_time_scale(double v, const NeuronParams& p) { return 1.0 / std::cosh(p.k_k * (v - p.v_k)); }
double ks_time_scale(double v, const NeuronParams& p) { return 1.0 / std::cosh(p.k_ks * (v - p.v_ks)); }

}  // namespace gates

void vector_field_raw(const State<4>& x, State<4>& dxdt, const NeuronParams& p, double i_extra) {
  const double v = x[0], m = x[1], w = x[2], s = x[3];
  const double i_ca = p.g_ca * gates::ca_activation(v, p) * (v - p.e_ca);
  const double i_k = p.g_k * m * (v - p.e_k);
  const double i_ks = p.g_ks * w * (v - p.e_ks);
  const double i_leak = p.g_leak * (v - p.e_leak);
  dxdt[0] = (-(i_ca + i_k + i_ks + i_leak) + p.i_ext + i_extra) / p.capacitance;
  dxdt[1] = p.gamma * std::cosh(p.k_k * (v - p.v_k)) * (gates::k_activation(v, p) - m);
  dxdt[2] = p.delta * std::cosh(p.k_ks * (v - p.v_ks)) * (gates::ks_activation(v, p) - w);
  const double s_inf = gates::syn_activation(v, p);
  dxdt[3] = (s_inf * (1.0 - s) - s) / p.tau_syn;
}

NeuronState vector_field(const NeuronState& x, const NeuronParams& p, double i_extra) {
  const State<4> a = x.as_array();
  if (!detail::all_finite(a) || !std::isfinite(i_extra)) {
    throw NumericalError(kModule, NumericalError::Reason::kBlowUp, "non-finite state passed to vector field");
  }
  State<4> d;
  vector_field_raw(a, d, p, i_extra);
  return NeuronState::from_array(d);
}

Eigen::Matrix4d jacobian(const NeuronState& x, const NeuronParams& p) {
  const double v = x.v, m = x.m, w = x.w, s = x.s;
  const double n_inf = gates::ca_activation(v, p);
  const double dn_inf = 2 * p.k_ca * n_inf * (1 - n_inf);
  const double m_inf = gates::k_activation(v, p);
  const double dm_inf = 2 * p.k_k * m_inf * (1 - m_inf);
  const double w_inf = gates::ks_activation(v, p);
  const double dw_inf = 2 * p.k_ks * w_inf * (1 - w_inf);
  const double sig = logistic(2 * p.k_syn * (v - p.e_syn_pre));
  const double s_inf = p.syn_scale * sig;
  const double ds_inf = p.syn_scale * 2 * p.k_syn * sig * (1 - sig);
  const double am = p.k_k * (v - p.v_k);
  const double aw = p.k_ks * (v - p.v_ks);

  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  J(0, 0) = -(p.g_ca * (dn_inf * (v - p.e_ca) + n_inf) + p.g_k * m + p.g_ks * w + p.g_leak) / p.capacitance;
  J(0, 1) = -p.g_k * (v - p.e_k) / p.capacitance;
  J(0, 2) = -p.g_ks * (v - p.e_ks) / p.capacitance;
  J(1, 0) = p.gamma * (p.k_k * std::sinh(am) * (m_inf - m) + std::cosh(am) * dm_inf);
  J(1, 1) = -p.gamma * std::cosh(am);
  J(2, 0) = p.delta * (p.k_ks * std::sinh(aw) * (w_inf - w) + std::cosh(aw) * dw_inf);
  J(2, 2) = -p.delta * std::cosh(aw);
  J(3, 0) = ds_inf * (1 - s) / p.tau_syn;
  J(3, 3) = -(s_inf + 1) / p.tau_syn;
  return J;
}

double syn_second_derivative(const NeuronState& x, const NeuronParams& p) {
  const NeuronState f = vector_field(x, p);
  const Eigen::Matrix4d J = jacobian(x, p);
  return J(3, 0) * f.v + J(3, 3) * f.s;
}

NeuronState Trajectory::at(double time) const {
  if (t.empty()) throw NumericalError(kModule, NumericalError::Reason::kInsufficientEvents, "empty trajectory");
  if (time <= t.front()) return x.front();
  if (time >= t.back()) return x.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t k1 = static_cast<std::size_t>(it - t.begin());
  const std::size_t k0 = k1 - 1;
  const double h = t[k1] - t[k0];
  const double u = (time - t[k0]) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  const State<4> a = x[k0].as_array(), b = x[k1].as_array();
  const State<4> da = dxdt[k0].as_array(), db = dxdt[k1].as_array();
  State<4> r;
  for (int i = 0; i < 4; ++i) r[i] = h00 * a[i] + h10 * h * da[i] + h01 * b[i] + h11 * h * db[i];
  return NeuronState::from_array(r);
}

Trajectory integrate(const NeuronState& initial, const NeuronParams& p, double duration, const Tolerances& tol) {
  p.validate();
  if (!(duration >= 0)) throw ConfigError("integration duration must be non-negative");
  Trajectory traj;
  traj.t.push_back(0.0);
  traj.x.push_back(initial);
  traj.dxdt.push_back(vector_field(initial, p));
  if (duration == 0.0) return traj;

  auto rhs = [&p](const State<4>& x, State<4>& d, double) { vector_field_raw(x, d, p, 0.0); };
  const State<4> end = integrate_dense<4>(
      rhs, initial.as_array(), 0.0, duration, tol,
      [&](const auto& seg) {
        if (seg.t_end() >= duration) return true;
        traj.t.push_back(seg.t_end());
        const NeuronState xs = NeuronState::from_array(seg.end_state());
        traj.x.push_back(xs);
        traj.dxdt.push_back(vector_field(xs, p));
        return true;
      },
      kModule);
  traj.t.push_back(duration);
  traj.x.push_back(NeuronState::from_array(end));
  traj.dxdt.push_back(vector_field(traj.x.back(), p));
  return traj;
}

using detail::CrossingTracker;

NeuronState LimitCycle::state_at(double phase) const {
  const std::size_t n = samples.size();
  const auto [k, u] = periodic_cell(phase, n);
  const std::size_t k1 = (k + 1) % n;
  const double h = period / static_cast<double>(n);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  const State<4> a = samples[k].as_array(), b = samples[k1].as_array();
  const State<4> da = derivatives[k].as_array(), db = derivatives[k1].as_array();
  State<4> r;
  for (int c = 0; c < 4; ++c) r[c] = h00 * a[c] + h10 * h * da[c] + h01 * b[c] + h11 * h * db[c];
  return NeuronState::from_array(r);
}

std::vector<double> LimitCycle::component(int index) const {
  std::vector<double> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) out[k] = samples[k].as_array()[index];
  return out;
}

LimitCycle find_limit_cycle(const NeuronParams& p, const LimitCycleOptions& opts) {
  p.validate();
  if (opts.enforce_range && (p.i_ext < kIExtMin - 1e-9 || p.i_ext > kIExtMax + 1e-9)) {
    throw ConfigError("I_ext=" + std::to_string(p.i_ext) + " outside the operating range [35.65, 37.7]");
  }
  if (opts.grid_size < 8) throw ConfigError("limit-cycle grid must have at least 8 samples");

  auto rhs = [&p](const State<4>& x, State<4>& d, double) { vector_field_raw(x, d, p, 0.0); };
  const Tolerances& tol = opts.tol;

  State<4> x = opts.initial.as_array();
  double t = 0.0;
  CrossingTracker tracker{opts.v_threshold, 0.0, x[0] < opts.v_threshold, 0};
  std::vector<CrossingTracker::Crossing> crossings;

  // Probe for a rough period from spacing of long-quiescence crossings.
  double probe = opts.probe_duration;
  double rough_period = 0.0;
  while (true) {
    const double t_end = t + probe;
    x = integrate_dense<4>(
        rhs, x, t, t_end, tol,
        [&](const auto& seg) {
          tracker.scan(seg, t_end, [&](const CrossingTracker::Crossing& c) { crossings.push_back(c); });
          return true;
        },
        kModule);
    t = t_end;
    if (crossings.size() >= 4) {
      double q_max = 0.0;
      for (std::size_t i = 1; i < crossings.size(); ++i) q_max = std::max(q_max, crossings[i].quiescence);
      std::vector<double> onsets;
      for (std::size_t i = 1; i < crossings.size(); ++i) {
        if (crossings[i].quiescence >= 0.5 * q_max) onsets.push_back(crossings[i].time);
      }
      if (onsets.size() >= 3) {
        rough_period = onsets.back() - onsets[onsets.size() - 2];
        break;
      }
    }
    if (t >= opts.max_probe_duration) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "no sustained bursting at I_ext=%.6g: %zu threshold crossings in %.0f ms, final v=%.4g mV",
                    p.i_ext, crossings.size(), t, x[0]);
      throw NumericalError(kModule, NumericalError::Reason::kNoConvergence, buf);
    }
    probe = std::min(probe, opts.max_probe_duration - t);
  }

  // Transient discard.
  {
    const double t_end = t + opts.transient_periods * rough_period;
    x = integrate_dense<4>(
        rhs, x, t, t_end, tol,
        [&](const auto& seg) {
          tracker.scan(seg, t_end, [](const CrossingTracker::Crossing&) {});
          return true;
        },
        kModule);
    t = t_end;
  }

  // Onset-to-onset period iteration.
  double period_estimate = rough_period;
  double last_onset = -1.0;
  double last_period = -1.0;
  double period = -1.0;
  double change = 0.0;
  State<4> onset_state{};
  std::size_t cycles = 0;
  bool converged = false;
  const double t_limit = t + static_cast<double>(opts.max_cycles) * 2.0 * rough_period;
  integrate_dense<4>(
      rhs, x, t, t_limit, tol,
      [&](const auto& seg) {
        tracker.scan(seg, t_limit, [&](const CrossingTracker::Crossing& c) {
          if (converged || c.quiescence < opts.quiescence_fraction * period_estimate) return;
          if (last_onset >= 0.0) {
            const double pk = c.time - last_onset;
            if (last_period > 0.0) {
              change = std::abs(pk - last_period) / pk;
              if (change <= opts.period_rtol) {
                converged = true;
                period = pk;
                onset_state = seg(c.time);
              }
            }
            last_period = pk;
            period_estimate = pk;
          }
          last_onset = c.time;
          ++cycles;
        });
        return !converged && cycles < opts.max_cycles;
      },
      kModule);
  if (!converged) {
    throw NumericalError(kModule, NumericalError::Reason::kNoConvergence,
                         "burst-onset period estimates did not settle (last relative change " +
                             std::to_string(change) + ")");
  }

  // Resample one period on a uniform grid anchored at the onset.
  LimitCycle lc;
  lc.params = p;
  lc.period = period;
  lc.period_change = change;
  const std::size_t n = opts.grid_size;
  lc.samples.resize(n);
  lc.derivatives.resize(n);
  lc.samples[0] = NeuronState::from_array(onset_state);
  std::size_t next = 1;
  const State<4> end = integrate_dense<4>(
      rhs, onset_state, 0.0, period, tol,
      [&](const auto& seg) {
        while (next < n) {
          const double tk = period * static_cast<double>(next) / static_cast<double>(n);
          if (tk > seg.t_end()) break;
          lc.samples[next++] = NeuronState::from_array(seg(tk));
        }
        return true;
      },
      kModule);
  if (next != n) {
    throw NumericalError(kModule, NumericalError::Reason::kNoConvergence, "orbit resampling incomplete");
  }
  for (std::size_t k = 0; k < n; ++k) {
    lc.derivatives[k] = vector_field(lc.samples[k], p);
    const auto& s = lc.samples[k];
    lc.gating_excursion = std::max({lc.gating_excursion, -s.m, s.m - 1.0, -s.w, s.w - 1.0});
  }
  for (int i = 0; i < 4; ++i) lc.closure_error = std::max(lc.closure_error, std::abs(end[i] - onset_state[i]));
  return lc;
}

std::vector<FrequencyRow> frequency_curve(const NeuronParams& p, const std::vector<double>& i_ext_grid,
                                          const LimitCycleOptions& opts) {
  std::vector<FrequencyRow> rows;
  rows.reserve(i_ext_grid.size());
  for (double i_ext : i_ext_grid) {
    FrequencyRow row;
    row.i_ext = i_ext;
    NeuronParams q = p;
    q.i_ext = i_ext;
    try {
      const LimitCycle lc = find_limit_cycle(q, opts);
      row.period = lc.period;
      row.frequency = lc.frequency();
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cpgait
