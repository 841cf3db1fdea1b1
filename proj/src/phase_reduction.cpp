#include "cpgait/phase_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "cpgait/csv.hpp"
#include "cpgait/detail/onset.hpp"
#include "cpgait/error.hpp"
#include "cpgait/parallel.hpp"
#include "cpgait/periodic.hpp"

namespace cpgait {

namespace {

constexpr const char* kModule = "phase-reduction";

using Vec4 = std::array<double, 4>;

double dot(const Vec4& a, const State<4>& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

Vec4 jt_times(const Eigen::Matrix4d& J, const Vec4& z) {
  Vec4 r{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) r[i] += J(j, i) * z[j];
  }
  return r;
}

}  // namespace

std::vector<double> IPRC::component(int index) const {
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k][static_cast<std::size_t>(index)];
  return out;
}

double IPRC::zv_at(double phase) const {
  const std::size_t n = z.size();
  const auto [k, u] = periodic_cell(phase, n);
  const std::size_t k1 = (k + 1) % n;
  const double h = 1.0 / static_cast<double>(n);
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * z[k][0] + (u3 - 2 * u2 + u) * h * dz[k][0] + (-2 * u3 + 3 * u2) * z[k1][0] +
         (u3 - u2) * h * dz[k1][0];
}

double IPRC::mean_zv_per_current(double capacitance) const {
  double sum = 0.0;
  for (const auto& zk : z) sum += zk[0];
  return sum / static_cast<double>(z.size()) / capacitance;
}

IPRC adjoint_iprc(const LimitCycle& lc, const AdjointOptions& opts) {
  const std::size_t n = lc.size();
  if (n < 8) throw NumericalError(kModule, NumericalError::Reason::kGridMismatch, "limit cycle grid too small");
  const double T = lc.period;
  const NeuronParams& p = lc.params;

  // Reversed time tau = -t turns the backward-stable adjoint into a forward problem:
  // dZ/dtau = J(Gamma(-tau))^T Z.
  auto rhs = [&](const State<4>& z, State<4>& dz, double tau) {
    const NeuronState x = lc.state_at(wrap_unit(-tau / T));
    const Eigen::Matrix4d J = jacobian(x, p);
    for (int i = 0; i < 4; ++i) {
      dz[i] = J(0, i) * z[0] + J(1, i) * z[1] + J(2, i) * z[2] + J(3, i) * z[3];
    }
  };

  const State<4> f0 = lc.derivatives[0].as_array();
  const double f0sq = f0[0] * f0[0] + f0[1] * f0[1] + f0[2] * f0[2] + f0[3] * f0[3];
  State<4> z;
  for (int i = 0; i < 4; ++i) z[i] = f0[i] / (T * f0sq);

  std::vector<Vec4> current(n), previous;
  IPRC out;
  out.period = T;
  double change = INFINITY;
  std::size_t pass = 0;
  while (pass < opts.max_passes) {
    // Rescale so Z(0).f(Gamma(0)) = 1/T at the start of every pass.
    const double scale = 1.0 / (T * dot({z[0], z[1], z[2], z[3]}, f0));
    for (double& zi : z) zi *= scale;
    current[0] = {z[0], z[1], z[2], z[3]};
    std::size_t next = 1;
    z = integrate_dense<4>(
        rhs, z, 0.0, T, opts.tol,
        [&](const auto& seg) {
          while (next < n) {
            const double tau = T * static_cast<double>(next) / static_cast<double>(n);
            if (tau > seg.t_end()) break;
            const State<4> zs = seg(tau);
            current[n - next] = {zs[0], zs[1], zs[2], zs[3]};  // tau = kT/N is phase (N-k)/N
            ++next;
          }
          return true;
        },
        kModule);
    ++pass;
    if (!previous.empty()) {
      double diff = 0.0, mag = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        for (int i = 0; i < 4; ++i) {
          diff = std::max(diff, std::abs(current[k][i] - previous[k][i]));
          mag = std::max(mag, std::abs(current[k][i]));
        }
      }
      change = diff / mag;
      if (pass >= opts.min_passes && change < opts.change_tol) break;
    }
    previous = current;
  }
  if (!(change < opts.change_tol)) {
    throw NumericalError(kModule, NumericalError::Reason::kNoConvergence,
                         "adjoint did not become periodic after " + std::to_string(pass) +
                             " passes (change " + std::to_string(change) + ")");
  }

  // Global rescale first; the pointwise correction that follows is then small
  // and its size is the drift diagnostic.
  double mean_norm = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean_norm += T * dot(current[k], lc.derivatives[k].as_array());
  mean_norm /= static_cast<double>(n);
  out.z.resize(n);
  out.dz.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vec4 zk = current[k];
    for (double& v : zk) v /= mean_norm;
    const double local = T * dot(zk, lc.derivatives[k].as_array());
    out.normalization_drift = std::max(out.normalization_drift, std::abs(local - 1.0));
    for (double& v : zk) v /= local;
    out.z[k] = zk;
    const Vec4 jz = jt_times(jacobian(lc.samples[k], p), zk);
    for (int i = 0; i < 4; ++i) out.dz[k][i] = -T * jz[i];
  }
  out.periodic_change = change;
  out.passes = pass;
  return out;
}

namespace {

/// Time of the burst onset closest to `target` (the latest one when target is
/// infinite), or NaN if none. Onsets in the first period are skipped: their
/// quiescence is measured from the start of the run, not from a real spike.
double onset_near(const NeuronParams& p, const State<4>& x0, double duration, double target, double period,
                  const Tolerances& tol) {
  auto rhs = [&p](const State<4>& x, State<4>& d, double) { vector_field_raw(x, d, p, 0.0); };
  detail::CrossingTracker tracker{-20.0, 0.0, x0[0] < -20.0, 0};
  double best = NAN;
  integrate_dense<4>(
      rhs, x0, 0.0, duration, tol,
      [&](const auto& seg) {
        tracker.scan(seg, duration, [&](const detail::CrossingTracker::Crossing& c) {
          if (c.time < period || c.quiescence < 0.25 * period) return;
          if (std::isinf(target)) {
            best = c.time;
          } else if (std::isnan(best) || std::abs(c.time - target) < std::abs(best - target)) {
            best = c.time;
          }
        });
        return true;
      },
      kModule);
  return best;
}

double last_onset(const NeuronParams& p, const State<4>& x0, double duration, double period,
                  const Tolerances& tol) {
  return onset_near(p, x0, duration, INFINITY, period, tol);
}

}  // namespace

DirectPrc direct_prc(const LimitCycle& lc, const DirectPrcOptions& opts) {
  if (opts.n_phases == 0) throw ConfigError("direct PRC needs at least one phase");
  const double T = lc.period;
  const double duration = opts.settle_periods * T;
  DirectPrc out;
  out.phase.resize(opts.n_phases);
  out.zv.resize(opts.n_phases);
  out.zv_half.resize(opts.n_phases);

  parallel_for(opts.n_phases, opts.threads, [&](std::size_t k) {
    const double phase = static_cast<double>(k) / static_cast<double>(opts.n_phases);
    out.phase[k] = phase;
    if (opts.kick == 0.0) {
      out.zv[k] = out.zv_half[k] = 0.0;
      return;
    }
    const State<4> x0 = lc.state_at(phase).as_array();
    const double t_ref = last_onset(lc.params, x0, duration, T, opts.tol);
    if (std::isnan(t_ref)) {
      throw NumericalError(kModule, NumericalError::Reason::kInsufficientEvents,
                           "reference run shows no burst onset");
    }
    auto shift = [&](double kick) {
      State<4> xk = x0;
      xk[0] += kick;
      const double t_kick = onset_near(lc.params, xk, duration + T, t_ref, T, opts.tol);
      return (t_ref - t_kick) / T / kick;
    };
    out.zv[k] = shift(opts.kick);
    out.zv_half[k] = shift(0.5 * opts.kick);
  });

  double peak = 0.0;
  std::size_t peak_index = 0;
  for (std::size_t k = 0; k < out.zv.size(); ++k) {
    if (std::abs(out.zv[k]) > peak) {
      peak = std::abs(out.zv[k]);
      peak_index = k;
    }
  }
  for (std::size_t k = 0; k < out.zv.size(); ++k) {
    if (std::abs(out.zv[k]) < opts.significance * peak) continue;
    const double d = std::abs(out.zv[k] - out.zv_half[k]) / std::abs(out.zv_half[k]);
    out.halving_discrepancy = std::max(out.halving_discrepancy, d);
    if (k == peak_index) out.halving_at_peak = d;
  }
  if (out.halving_discrepancy > opts.max_halving_discrepancy) {
    throw NumericalError(kModule, NumericalError::Reason::kKickTooLarge,
                         "halving the kick changed the response by " +
                             std::to_string(100 * out.halving_discrepancy) + "%");
  }
  return out;
}

double prc_rms_relative_deviation(const DirectPrc& direct, const IPRC& adjoint) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < direct.phase.size(); ++k) {
    const double a = adjoint.zv_at(direct.phase[k]);
    num += (direct.zv[k] - a) * (direct.zv[k] - a);
    den += a * a;
  }
  return std::sqrt(num / den);
}

CouplingTable::CouplingTable(std::vector<double> h, std::vector<double> dh, std::vector<double> d2h, double xi,
                             std::string params_hash)
    : h_(std::move(h)), dh_(std::move(dh)), d2h_(std::move(d2h)), xi_(xi), hash_(std::move(params_hash)) {
  if (h_.size() < 4 || dh_.size() != h_.size() || d2h_.size() != h_.size()) {
    throw NumericalError(kModule, NumericalError::Reason::kGridMismatch, "coupling table arrays disagree in size");
  }
}

CouplingTable CouplingTable::from_function(const std::function<double(double)>& f,
                                           const std::function<double(double)>& df,
                                           const std::function<double(double)>& d2f, std::size_t n, double xi) {
  std::vector<double> h(n), dh(n), d2h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double th = static_cast<double>(k) / static_cast<double>(n);
    h[k] = f(th);
    dh[k] = df(th);
    d2h[k] = d2f(th);
  }
  return CouplingTable(std::move(h), std::move(dh), std::move(d2h), xi, "synthetic");
}

Quintic CouplingTable::eval(double theta) const { return hermite5(h_, dh_, d2h_, theta); }
double CouplingTable::operator()(double theta) const { return eval(theta).value; }
double CouplingTable::derivative(double theta) const { return eval(theta).first; }
double CouplingTable::second_derivative(double theta) const { return eval(theta).second; }

double CouplingTable::sup_norm() const {
  double m = 0.0;
  for (double v : h_) m = std::max(m, std::abs(v));
  return m;
}

double CouplingTable::derivative_sup_norm() const {
  double m = 0.0;
  for (double v : dh_) m = std::max(m, std::abs(v));
  return m;
}

double CouplingTable::finite_difference_mismatch() const {
  const std::size_t n = h_.size();
  const double step = 1.0 / static_cast<double>(n);
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double fd = (h_[(k + 1) % n] - h_[(k + n - 1) % n]) / (2 * step);
    worst = std::max(worst, std::abs(fd - dh_[k]));
  }
  return worst;
}

CouplingTable coupling_function(const LimitCycle& lc, const IPRC& iprc) {
  const std::size_t n = lc.size();
  if (iprc.size() != n) {
    throw NumericalError(kModule, NumericalError::Reason::kGridMismatch,
                         "iPRC has " + std::to_string(iprc.size()) + " samples, orbit has " + std::to_string(n));
  }
  const NeuronParams& p = lc.params;
  const double T = lc.period;
  std::vector<double> a(n), s(n), sd(n), sdd(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = iprc.z[k][0] * (lc.samples[k].v - p.e_syn_post);
    s[k] = lc.samples[k].s;
    sd[k] = T * lc.derivatives[k].s;
    sdd[k] = T * T * syn_second_derivative(lc.samples[k], p);
  }
  const double scale = -p.g_syn / p.capacitance / static_cast<double>(n);
  std::vector<double> h(n), dh(n), d2h(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
    std::size_t idx = j;
    for (std::size_t k = 0; k < n; ++k) {
      acc0 += a[k] * s[idx];
      acc1 += a[k] * sd[idx];
      acc2 += a[k] * sdd[idx];
      if (++idx == n) idx = 0;
    }
    h[j] = scale * acc0;
    dh[j] = scale * acc1;
    d2h[j] = scale * acc2;
  }
  return CouplingTable(std::move(h), std::move(dh), std::move(d2h), p.i_ext, p.hash());
}

HeterogeneityShifts omega_tilde(const IPRC& iprc, double capacitance, const HeterodriveSpec& drives) {
  HeterogeneityShifts out;
  out.zbar = iprc.mean_zv_per_current(capacitance);
  const std::size_t n = iprc.size();
  for (int leg = 1; leg <= 6; ++leg) {
    const Drive& d = drives.leg(leg);
    double w = 0.0;
    if (!d.is_waveform()) {
      w = d.constant * out.zbar;
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        const double t = iprc.period * static_cast<double>(k) / static_cast<double>(n);
        w += iprc.z[k][0] * d.value(t);
      }
      w /= static_cast<double>(n) * capacitance;
    }
    out.omega[static_cast<std::size_t>(leg - 1)] = w;
  }
  return out;
}

EtaResult solve_eta(const CouplingTable& h, std::size_t scan_points, double tol) {
  auto D = [&h](double eta) { return h(2.0 / 3.0 - eta) - h(1.0 / 3.0 + eta); };
  const double upper = 1.0 / 6.0;
  // Values this small are roundoff around an exact root, e.g. at eta = 0 for
  // a table with H(1/3) = H(2/3) by construction.
  const double eps = 1e-13 * std::max(h.sup_norm(), 1e-300);
  auto sign = [eps](double d) { return std::abs(d) <= eps ? 0 : (d < 0.0 ? -1 : 1); };
  EtaResult out;
  std::vector<std::pair<double, double>> brackets;
  double prev_eta = 0.0;
  int prev = sign(D(0.0));
  bool in_zero_run = prev == 0;
  if (in_zero_run) out.grid_roots.push_back(0.0);
  int last_nonzero = prev;
  double last_nonzero_eta = 0.0;
  for (std::size_t i = 1; i < scan_points; ++i) {
    const double eta = upper * static_cast<double>(i) / static_cast<double>(scan_points);
    const int sg = sign(D(eta));
    if (sg == 0) {
      if (!in_zero_run) out.grid_roots.push_back(eta);
      in_zero_run = true;
    } else {
      if (!in_zero_run && last_nonzero != 0 && sg != last_nonzero) brackets.emplace_back(last_nonzero_eta, eta);
      in_zero_run = false;
      last_nonzero = sg;
      last_nonzero_eta = eta;
    }
    prev_eta = eta;
    prev = sg;
  }
  (void)prev_eta;
  (void)prev;
  for (const auto& [lo, hi] : brackets) {
    out.grid_roots.push_back(bisect_root(D, lo, hi, D(lo), tol));
  }
  std::sort(out.grid_roots.begin(), out.grid_roots.end());
  if (out.grid_roots.size() > 1) {
    std::ostringstream msg;
    msg << "H(2/3-eta) = H(1/3+eta) has " << out.grid_roots.size() << " roots on [0, 1/6):";
    for (double r : out.grid_roots) msg << ' ' << r;
    throw NumericalError(kModule, NumericalError::Reason::kAssumptionViolation, msg.str());
  }
  if (out.grid_roots.size() == 1) {
    out.eta = out.grid_roots.front();
    out.trivial = false;
  }
  return out;
}

AlphaBounds alpha_bounds(const CouplingTable& h) {
  const double d13 = h.derivative(1.0 / 3.0);
  const double d23 = h.derivative(2.0 / 3.0);
  const double denom = d13 - d23;
  if (std::abs(denom) < 1e-12) {
    throw NumericalError(kModule, NumericalError::Reason::kDegenerate, "H'(1/3) and H'(2/3) coincide");
  }
  AlphaBounds b;
  b.alpha_max = d13 / denom;
  b.alpha_min = d23 / (d23 - d13);
  return b;
}

void write_iprc_csv(const IPRC& iprc, double xi, const std::string& path) {
  std::ostringstream out;
  out << "# xi," << csv::num(xi) << "\n# period," << csv::num(iprc.period) << "\n# grid," << iprc.size() << "\n";
  out << "phase,Z_v,Z_m,Z_w,Z_s\n";
  for (std::size_t k = 0; k < iprc.size(); ++k) {
    out << csv::num(static_cast<double>(k) / static_cast<double>(iprc.size()));
    for (double v : iprc.z[k]) out << ',' << csv::num(v);
    out << '\n';
  }
  csv::write_atomic(path, out.str());
}

void write_coupling_csv(const CouplingTable& h, const std::string& path,
                        const std::vector<std::pair<std::string, double>>& extra_meta) {
  std::ostringstream out;
  out << "# xi," << csv::num(h.xi()) << "\n# grid," << h.size() << "\n# params_hash," << h.params_hash() << "\n";
  for (const auto& [key, value] : extra_meta) out << "# " << key << ',' << csv::num(value) << '\n';
  out << "theta,H,dH,d2H\n";
  for (std::size_t k = 0; k < h.size(); ++k) {
    out << csv::num(static_cast<double>(k) / static_cast<double>(h.size())) << ',' << csv::num(h.values()[k]) << ','
        << csv::num(h.derivatives()[k]) << ',' << csv::num(h.second_derivatives()[k]) << '\n';
  }
  csv::write_atomic(path, out.str());
}

CouplingTable read_coupling_csv(const std::string& path, std::vector<std::pair<std::string, double>>* meta) {
  std::istringstream in(csv::read_file(path));
  std::string line, hash;
  double xi = 0.0;
  std::vector<double> h, dh, d2h;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto fields = csv::split(line.substr(2));
      if (fields.size() != 2) continue;
      if (fields[0] == "xi") {
        xi = std::stod(fields[1]);
      } else if (fields[0] == "params_hash") {
        hash = fields[1];
      } else if (fields[0] != "grid" && meta) {
        meta->emplace_back(fields[0], std::stod(fields[1]));
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = csv::split(line);
    if (f.size() != 4) throw ConfigError("malformed coupling table row in " + path);
    h.push_back(std::stod(f[1]));
    dh.push_back(std::stod(f[2]));
    d2h.push_back(std::stod(f[3]));
  }
  return CouplingTable(std::move(h), std::move(dh), std::move(d2h), xi, hash);
}

Reduction reduce(const NeuronParams& p, const ReductionOptions& opts) {
  std::string dir;
  if (opts.cache_dir) {
    dir = *opts.cache_dir;
  } else if (const char* env = std::getenv("CPG_CACHE_DIR")) {
    dir = env;
  }
  const std::string hash = p.hash();
  std::string path;
  if (!dir.empty()) {
    path = (std::filesystem::path(dir) / ("coupling_" + hash + "_" + std::to_string(opts.cycle.grid_size) + ".csv"))
               .string();
    if (std::filesystem::exists(path)) {
      std::vector<std::pair<std::string, double>> meta;
      auto table = std::make_shared<CouplingTable>(read_coupling_csv(path, &meta));
      Reduction r;
      r.xi = table->xi();
      for (const auto& [k, v] : meta) {
        if (k == "period") r.period = v;
        if (k == "zbar") r.zbar = v;
      }
      if (table->params_hash() == hash && r.period > 0.0) {
        r.table = std::move(table);
        return r;
      }
    }
  }
  const LimitCycle lc = find_limit_cycle(p, opts.cycle);
  const IPRC z = adjoint_iprc(lc, opts.adjoint);
  Reduction r;
  r.xi = p.i_ext;
  r.period = lc.period;
  r.zbar = z.mean_zv_per_current(p.capacitance);
  r.table = std::make_shared<CouplingTable>(coupling_function(lc, z));
  if (!path.empty()) write_coupling_csv(*r.table, path, {{"period", r.period}, {"zbar", r.zbar}});
  return r;
}

}  // namespace cpgait
