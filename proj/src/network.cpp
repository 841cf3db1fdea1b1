#include "cpgait/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpgait/csv.hpp"
#include "cpgait/detail/onset.hpp"
#include "cpgait/error.hpp"
#include "cpgait/periodic.hpp"

namespace cpgait {

namespace {
constexpr const char* kModule = "network";
}

void CouplingStrengths::validate() const {
  for (double v : c) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("coupling strengths must be finite and non-negative");
  }
}

double CouplingStrengths::balance_residual() const {
  const double s1 = c[0] + c[4];
  const double s2 = c[1] + c[3] + c[6];
  const double s3 = c[2] + c[5];
  return std::max({std::abs(s1 - s2), std::abs(s2 - s3), std::abs(s1 - s3)});
}

bool CouplingStrengths::balanced(double tol) const { return balance_residual() <= tol; }

CouplingStrengths CouplingStrengths::uniform(double value) {
  CouplingStrengths s;
  s.c.fill(value);
  return s;
}

CouplingStrengths CouplingStrengths::example_balanced() {
  CouplingStrengths s;
  s.c = {0.8147, 0.9058, 0.1270, 0.9134, 1.6368, 2.3245, 0.6324};
  return s;
}

CouplingStrengths CouplingStrengths::from_alpha(double alpha, double c_contra) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  CouplingStrengths s;
  s.c = {c_contra, c_contra, c_contra, 1.0, 1.0 / alpha, 1.0 / alpha, 1.0 / alpha - 1.0};
  return s;
}

double Drive::value(double t) const {
  if (!is_waveform()) return constant;
  const std::size_t n = waveform.size();
  const auto [k, u] = periodic_cell(t * frequency, n);
  return (1.0 - u) * waveform[k] + u * waveform[(k + 1) % n];
}

double Drive::mean() const {
  if (!is_waveform()) return constant;
  double s = 0.0;
  for (double v : waveform) s += v;
  return s / static_cast<double>(waveform.size());
}

double Drive::max_abs() const {
  if (!is_waveform()) return std::abs(constant);
  double m = 0.0;
  for (double v : waveform) m = std::max(m, std::abs(v));
  return m;
}

bool HeterodriveSpec::contralaterally_symmetric() const {
  for (int i = 1; i <= 3; ++i) {
    const Drive& a = leg(i);
    const Drive& b = leg(i + 3);
    if (a.is_waveform() != b.is_waveform()) return false;
    if (a.is_waveform()) {
      if (a.waveform != b.waveform || a.frequency != b.frequency) return false;
    } else if (a.constant != b.constant) {
      return false;
    }
  }
  return true;
}

bool HeterodriveSpec::magnitude_warning(double g_syn) const {
  for (const Drive& d : legs) {
    if (d.max_abs() > 10.0 * g_syn) return true;
  }
  return false;
}

HeterodriveSpec HeterodriveSpec::zero() { return {}; }

HeterodriveSpec HeterodriveSpec::constants(const std::array<double, 6>& values) {
  HeterodriveSpec s;
  for (std::size_t i = 0; i < 6; ++i) s.legs[i].constant = values[i];
  return s;
}

HeterodriveSpec HeterodriveSpec::forward_selection(double delta_i) {
  return constants({delta_i, delta_i, 0.0, delta_i, delta_i, 0.0});
}

HeterodriveSpec HeterodriveSpec::backward_selection(double delta_i) {
  return constants({0.0, delta_i, delta_i, 0.0, delta_i, delta_i});
}

const std::vector<Link>& network_inputs(int leg) {
  static const std::vector<Link> table[6] = {
      {{4, 1}, {2, 5}},          // right front
      {{5, 2}, {1, 4}, {3, 7}},  // right middle
      {{6, 3}, {2, 6}},          // right hind
      {{1, 1}, {5, 5}},          // left front
      {{2, 2}, {4, 4}, {6, 7}},  // left middle
      {{3, 3}, {5, 6}},          // left hind
  };
  if (leg < 1 || leg > 6) throw ConfigError("leg index must be 1..6");
  return table[leg - 1];
}

namespace {

void field_raw(const State<24>& x, State<24>& d, const NeuronParams& p, const CouplingStrengths& c,
               const HeterodriveSpec& drives, double t) {
  for (int leg = 1; leg <= 6; ++leg) {
    const std::size_t o = static_cast<std::size_t>(4 * (leg - 1));
    const double v = x[o];
    double extra = drives.leg(leg).value(t);
    for (const Link& l : network_inputs(leg)) {
      const double sj = x[static_cast<std::size_t>(4 * (l.from - 1) + 3)];
      extra -= c(l.coupling) * p.g_syn * sj * (v - p.e_syn_post);
    }
    const State<4> xi{x[o], x[o + 1], x[o + 2], x[o + 3]};
    State<4> di;
    vector_field_raw(xi, di, p, extra);
    for (std::size_t k = 0; k < 4; ++k) d[o + k] = di[k];
  }
}

State<24> pack(const NetworkState& s) {
  State<24> x;
  for (std::size_t i = 0; i < 6; ++i) {
    const State<4> a = s[i].as_array();
    for (std::size_t k = 0; k < 4; ++k) x[4 * i + k] = a[k];
  }
  return x;
}

NetworkState unpack(const State<24>& x) {
  NetworkState s;
  for (std::size_t i = 0; i < 6; ++i) s[i] = NeuronState{x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]};
  return s;
}

}  // namespace

NetworkState network_field(const NetworkState& x, const NeuronParams& p, const CouplingStrengths& c,
                           const HeterodriveSpec& drives, double t) {
  const State<24> a = pack(x);
  if (!detail::all_finite(a)) throw NumericalError(kModule, NumericalError::Reason::kBlowUp, "non-finite state");
  State<24> d;
  field_raw(a, d, p, c, drives, t);
  return unpack(d);
}

NetworkTrajectory simulate_network(const NetworkState& initial, const NeuronParams& p, const CouplingStrengths& c,
                                   const HeterodriveSpec& drives, double duration, const NetworkOptions& opts) {
  p.validate();
  c.validate();
  if (!(duration >= 0.0)) throw ConfigError("simulation duration must be non-negative");
  NetworkTrajectory traj;
  traj.duration = duration;
  const State<24> x0 = pack(initial);
  std::array<detail::CrossingTracker, 6> trackers;
  for (std::size_t i = 0; i < 6; ++i) {
    trackers[i] = detail::CrossingTracker{opts.v_threshold, 0.0, x0[4 * i] < opts.v_threshold, 4 * i};
  }
  const double min_quiet = opts.quiescence_fraction * opts.reference_period;
  const bool sampling = opts.sample_interval > 0.0;
  std::size_t next_sample = 0;
  auto sample_time = [&](std::size_t k) { return opts.sample_interval * static_cast<double>(k); };
  if (sampling) {
    traj.t.push_back(0.0);
    traj.x.push_back(initial);
    next_sample = 1;
  }
  auto rhs = [&](const State<24>& x, State<24>& d, double t) { field_raw(x, d, p, c, drives, t); };
  const State<24> end = integrate_dense<24>(
      rhs, x0, 0.0, duration, opts.tol,
      [&](const auto& seg) {
        for (std::size_t i = 0; i < 6; ++i) {
          trackers[i].scan(seg, duration, [&](const detail::CrossingTracker::Crossing& cr) {
            if (cr.quiescence >= min_quiet) traj.onsets[i].push_back(cr.time);
          });
        }
        while (sampling && sample_time(next_sample) <= std::min(seg.t_end(), duration)) {
          traj.t.push_back(sample_time(next_sample));
          traj.x.push_back(unpack(seg(sample_time(next_sample))));
          ++next_sample;
        }
        return true;
      },
      kModule);
  traj.final_state = unpack(end);
  return traj;
}

NetworkState network_on_cycle(const LimitCycle& lc, const std::array<double, 6>& phases) {
  NetworkState s;
  for (std::size_t i = 0; i < 6; ++i) s[i] = lc.state_at(wrap_unit(phases[i]));
  return s;
}

namespace {

struct CircularStats {
  double mean;
  double std;
};

CircularStats circular_stats(const std::vector<double>& x) {
  double sx = 0.0, cx = 0.0;
  for (double v : x) {
    sx += std::sin(2 * M_PI * v);
    cx += std::cos(2 * M_PI * v);
  }
  const double mean = wrap_unit(std::atan2(sx, cx) / (2 * M_PI));
  double var = 0.0;
  for (double v : x) {
    const double d = wrap_signed(v - mean);
    var += d * d;
  }
  return {mean, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace

LegPhases extract_leg_phases(const NetworkTrajectory& traj, const PhaseExtractionOptions& opts) {
  std::array<std::vector<double>, 6> on;
  for (std::size_t i = 0; i < 6; ++i) {
    for (double t : traj.onsets[i]) {
      if (t >= opts.transient) on[i].push_back(t);
    }
    if (on[i].size() < opts.min_cycles) {
      throw NumericalError(kModule, NumericalError::Reason::kInsufficientEvents,
                           "leg " + std::to_string(i + 1) + " has " + std::to_string(on[i].size()) +
                               " burst onsets after the transient, need " + std::to_string(opts.min_cycles));
    }
  }
  // Phase of each leg relative to leg 2 at leg 2's onsets, using leg 2's period.
  const auto& ref = on[1];
  std::array<std::vector<double>, 6> rel;
  double period_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = ref.size() - 1; k-- > 0 && used < opts.average_cycles;) {
    const double tk = ref[k];
    const double period = ref[k + 1] - tk;
    bool ok = true;
    std::array<double, 6> d{};
    for (std::size_t i = 0; i < 6; ++i) {
      const auto it = std::upper_bound(on[i].begin(), on[i].end(), tk);
      if (it == on[i].begin()) {
        ok = false;
        break;
      }
      d[i] = wrap_unit((tk - *(it - 1)) / period);
    }
    if (!ok) continue;
    for (std::size_t i = 0; i < 6; ++i) rel[i].push_back(d[i]);
    period_sum += period;
    ++used;
  }
  if (used == 0) {
    throw NumericalError(kModule, NumericalError::Reason::kInsufficientEvents, "no complete reference cycle");
  }
  LegPhases out;
  out.cycles_used = used;
  out.mean_period = period_sum / static_cast<double>(used);
  const auto s1 = circular_stats(rel[0]);
  const auto s3 = circular_stats(rel[2]);
  out.theta1 = s1.mean;
  out.theta1_std = s1.std;
  out.theta2 = s3.mean;
  out.theta2_std = s3.std;
  bool locked = s1.std < opts.lock_threshold && s3.std < opts.lock_threshold;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> psi(used);
    for (std::size_t k = 0; k < used; ++k) psi[k] = wrap_unit(rel[i + 3][k] - rel[i][k]);
    const auto s = circular_stats(psi);
    out.contralateral[i] = s.mean;
    out.contralateral_std[i] = s.std;
    locked = locked && s.std < opts.lock_threshold;
  }
  out.locked = locked;
  return out;
}

void write_network_csv(const NetworkTrajectory& traj, const std::string& path) {
  std::ostringstream out;
  out << "t,v1,v2,v3,v4,v5,v6,s1,s2,s3,s4,s5,s6\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out << csv::num(traj.t[k]);
    for (const auto& u : traj.x[k]) out << ',' << csv::num(u.v);
    for (const auto& u : traj.x[k]) out << ',' << csv::num(u.s);
    out << '\n';
  }
  csv::write_atomic(path, out.str());
}

void write_onsets_csv(const NetworkTrajectory& traj, const std::string& path) {
  std::ostringstream out;
  out << "leg,onset_time\n";
  for (std::size_t i = 0; i < 6; ++i) {
    for (double t : traj.onsets[i]) out << (i + 1) << ',' << csv::num(t) << '\n';
  }
  csv::write_atomic(path, out.str());
}

}  // namespace cpgait
