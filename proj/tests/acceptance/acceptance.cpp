// Acceptance run: one PASS/FAIL line per criterion, plus info lines that show
// what the same checks give on inputs where the pipeline can run.

#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cpgait/bifurcation.hpp"
#include "cpgait/equivalence.hpp"
#include "cpgait/error.hpp"
#include "cpgait/gaits.hpp"
#include "cpgait/network.hpp"
#include "cpgait/parallel.hpp"
#include "cpgait/periodic.hpp"
#include "cpgait/phase_reduction.hpp"
#include "cpgait/pipeline.hpp"
#include "cpgait/torus.hpp"

using namespace cpgait;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  void fail(const std::string& why) {
    pass = false;
    notes.push_back(why);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

int failures = 0;
long euler_violations = 0;
std::size_t censuses_seen = 0;

void report(int n, const Verdict& v, double secs) {
  if (!v.pass) ++failures;
  std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " (" << fmt(secs, 3) << " s)";
  for (std::size_t i = 0; i < v.notes.size(); ++i) std::cout << (i ? "; " : ": ") << v.notes[i];
  std::cout << std::endl;
}

void info(const std::string& s) { std::cout << "  info: " << s << std::endl; }

void audit(const Census& c) {
  ++censuses_seen;
  if (c.euler() != 0) ++euler_violations;
}

void audit(const SweepResult& r) {
  for (const auto& c : r.censuses) audit(c);
}

NeuronParams at(double i_ext) {
  NeuronParams p;
  p.i_ext = i_ext;
  return p;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

// Stand-in H with a nontrivial eta, negative on the middle third.
FourierCoupling synthetic_h() {
  FourierCoupling f;
  f.mean = -1.0;
  f.cos = {-0.24, 0.13, 0.06};
  f.sin = {-0.31, -0.2, 0.0};
  f.zbar = 4.0;
  return f;
}

// Reduction at the lower end of the range, attempted once and shared.
struct Lower {
  std::optional<PhaseModel> model;
  std::string error;
};

const Lower& lower_end() {
  static const Lower l = [] {
    Lower x;
    RunConfig cfg;
    cfg.neuron = at(kIExtMin);
    try {
      x.model = phase_model(cfg);
    } catch (const NumericalError& e) {
      x.error = e.what();
    }
    return x;
  }();
  return l;
}

// ------------------------------------------------------------------ criterion 1

void criterion1() {
  const auto t0 = Clock::now();
  Verdict v;
  std::vector<double> freq;
  for (double i : {35.65, 36.0, 36.5, 37.0, 37.7}) {
    try {
      const LimitCycle lc = find_limit_cycle(at(i));
      freq.push_back(lc.frequency());
      // burst shape: local maxima above 0 mV in one cycle
      int spikes = 0;
      double vmax = -1e9;
      for (std::size_t k = 1; k + 1 < lc.size(); ++k) {
        const double a = lc.samples[k - 1].v, b = lc.samples[k].v, c = lc.samples[k + 1].v;
        vmax = std::max(vmax, b);
        spikes += b > 0.0 && b > a && b >= c;
      }
      info("I_ext=" + fmt(i) + ": T=" + fmt(lc.period, 5) + " ms, max v=" + fmt(vmax) + " mV, spikes above 0 mV per cycle=" +
           std::to_string(spikes));
    } catch (const NumericalError& e) {
      v.fail("no limit cycle at I_ext=" + fmt(i) + " (" + e.what() + ")");
    }
  }
  for (std::size_t k = 1; k < freq.size(); ++k) {
    if (freq[k] < freq[k - 1]) v.fail("frequency decreases");
  }
  const double secs = seconds_since(t0);
  if (secs > 60) v.fail("runtime " + fmt(secs) + " s over 60 s");
  if (v.pass) v.note("frequency nondecreasing over the five values");
  report(1, v, secs);
}

// ------------------------------------------------------------------ criterion 2

void criterion2() {
  const auto t0 = Clock::now();
  Verdict v;
  const LimitCycle lc = find_limit_cycle(at(35.9));
  const IPRC z = adjoint_iprc(lc);
  DirectPrcOptions o;
  o.threads = hardware_threads();
  const DirectPrc d = direct_prc(lc, o);
  const double rms = prc_rms_relative_deviation(d, z);
  if (rms > 0.02) v.fail("RMS deviation " + fmt(rms) + " > 2%");
  double worst = 0;
  for (std::size_t k = 0; k < lc.size(); ++k) {
    const auto& f = lc.derivatives[k];
    const auto& g = z.z[k];
    worst = std::max(worst, std::abs((g[0] * f.v + g[1] * f.m + g[2] * f.w + g[3] * f.s) - 1.0 / lc.period));
  }
  if (worst > 1e-6) v.fail("Z.f deviates from 1/T by " + fmt(worst));
  // mean voltage response over the operating range, where an orbit exists
  std::size_t positive = 0, missing = 0;
  const auto grid = linspace(kIExtMin, kIExtMax, 42);
  std::vector<double> zbar(grid.size(), std::nan(""));
  parallel_for(grid.size(), hardware_threads(), [&](std::size_t i) {
    try {
      const LimitCycle c = find_limit_cycle(at(grid[i]));
      zbar[i] = adjoint_iprc(c).mean_zv_per_current(c.params.capacitance);
    } catch (const NumericalError&) {
    }
  });
  for (double x : zbar) {
    if (std::isnan(x)) {
      ++missing;
    } else if (x > 0) {
      ++positive;
    } else {
      v.fail("zbar <= 0 at a sampled I_ext");
    }
  }
  v.note("RMS deviation " + fmt(rms * 100, 3) + "%");
  v.note("max |Z.f - 1/T| " + fmt(worst, 3));
  v.note("zbar > 0 at " + std::to_string(positive) + " sampled I_ext");
  if (missing) v.note(std::to_string(missing) + " of " + std::to_string(grid.size()) + " samples have no orbit");
  const double secs = seconds_since(t0);
  if (secs > 120) v.fail("runtime " + fmt(secs) + " s over 120 s");
  report(2, v, secs);
}

// ------------------------------------------------------------------ criterion 3

void criterion3() {
  const auto t0 = Clock::now();
  Verdict v;
  const LimitCycle lc = find_limit_cycle(at(35.9));
  const CouplingTable h = coupling_function(lc, adjoint_iprc(lc));
  double hmax = -1e300;
  for (int k = 0; k <= 1000; ++k) hmax = std::max(hmax, h(1.0 / 3.0 + k / 3000.0));
  if (!(hmax < 0)) v.fail("H reaches " + fmt(hmax) + " on [1/3, 2/3]");
  LimitCycleOptions o;
  o.grid_size = 2 * lc.size();
  const LimitCycle fine_lc = find_limit_cycle(at(35.9), o);
  const CouplingTable fine = coupling_function(fine_lc, adjoint_iprc(fine_lc));
  double gap = 0;
  for (int k = 0; k < 4096; ++k) gap = std::max(gap, std::abs(fine(k / 4096.0) - h(k / 4096.0)));
  if (gap >= 1e-5) v.fail("grid doubling changes H by " + fmt(gap));
  const AlphaBounds ab = alpha_bounds(h);
  const double sum_err = std::abs(ab.alpha_min + ab.alpha_max - 1.0);
  if (sum_err > 1e-10) v.fail("alpha_min + alpha_max - 1 = " + fmt(sum_err));
  v.note("max H on [1/3, 2/3] " + fmt(hmax));
  v.note("doubling gap " + fmt(gap, 3));
  v.note("alpha bounds " + fmt(ab.alpha_min) + ", " + fmt(ab.alpha_max));
  report(3, v, seconds_since(t0));
}

// ------------------------------------------------------------------ criterion 4

void criterion4() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto grid = linspace(kIExtMin, kIExtMax, 42);
  std::vector<std::optional<EtaResult>> eta(grid.size());
  std::vector<std::string> err(grid.size());
  parallel_for(grid.size(), hardware_threads(), [&](std::size_t i) {
    try {
      RunConfig cfg;
      eta[i] = phase_model(cfg, grid[i]).eta;
    } catch (const NumericalError& e) {
      err[i] = e.what();
    }
  });
  std::size_t missing = 0, trivial = 0;
  double prev = -1;
  bool monotone = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!eta[i]) {
      ++missing;
      continue;
    }
    if (eta[i]->trivial) ++trivial;
    if (eta[i]->eta < prev) monotone = false;
    prev = eta[i]->eta;
  }
  if (missing) v.fail(std::to_string(missing) + " of " + std::to_string(grid.size()) + " samples have no reduction");
  if (trivial) v.fail(std::to_string(trivial) + " samples have only the trivial eta = 1/6");
  if (!monotone) v.fail("eta decreases somewhere");
  if (!eta.front()) {
    v.fail("no eta at 35.65 (" + err.front() + ")");
  } else if (eta.front()->eta > 0.02) {
    v.fail("eta(35.65) = " + fmt(eta.front()->eta) + ", not near 0");
  }
  if (eta.back() && std::abs(eta.back()->eta - 1.0 / 6.0) > 0.02) {
    v.fail("eta(37.7) = " + fmt(eta.back()->eta) + ", not near 1/6");
  }
  for (std::size_t i = 0; i < grid.size(); i += 8) {
    if (eta[i]) info("eta(" + fmt(grid[i]) + ") = " + fmt(eta[i]->eta) + (eta[i]->trivial ? " (trivial)" : ""));
  }
  report(4, v, seconds_since(t0));
}

// ------------------------------------------------------------------ criterion 5

Verdict balanced_zeros(const std::shared_ptr<const CouplingTable>& h, double eta, std::uint64_t seed) {
  Verdict v;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.5);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    CouplingStrengths c;
    const double c2 = u(rng), c4 = u(rng), c7 = u(rng), sum = c2 + c4 + c7;
    std::uniform_real_distribution<double> part(0.02, sum - 0.02);
    const double c1 = part(rng), c3 = part(rng);
    c.c = {c1, c2, c3, c4, sum - c1, sum - c3, c7};
    const TorusField f = TorusField::general(h, c, 0, 0, eta);
    for (const auto& p : {std::array<double, 2>{2.0 / 3.0 - eta, 1.0 / 3.0 + eta}, {1.0 / 3.0 + eta, 2.0 / 3.0 - eta}}) {
      const auto r = torus_rhs(f, p[0], p[1]);
      worst = std::max({worst, std::abs(r[0]), std::abs(r[1])});
    }
    const auto r = torus_rhs(TorusField::general(h, c, 0, 0, 1.0 / 6.0), 0.5, 0.5);
    worst = std::max({worst, std::abs(r[0]), std::abs(r[1])});
  }
  if (worst > 1e-10) v.fail("largest residual " + fmt(worst));
  v.note("largest residual " + fmt(worst, 3) + " at eta " + fmt(eta));
  return v;
}

void criterion5() {
  const auto t0 = Clock::now();
  RunConfig cfg;
  const PhaseModel m = phase_model(cfg, 35.9);
  Verdict v = balanced_zeros(m.h, m.eta.eta, 1);
  v.notes.front() = "computed H at 35.9: " + v.notes.front();
  const auto syn = fourier_table(synthetic_h());
  const Verdict s = balanced_zeros(syn, solve_eta(*syn).eta, 2);
  if (!s.pass) v.fail("synthetic H: " + s.notes.front());
  v.note("synthetic H: " + s.notes.back());
  report(5, v, seconds_since(t0));
}

// ------------------------------------------------------------------ criterion 6

CensusCounts census_for(const PhaseModel& m, const std::function<void(RunConfig&)>& setup) {
  RunConfig cfg;
  setup(cfg);
  const Census c = find_fixed_points(torus_field(cfg, m, 0.0));
  audit(c);
  return CensusCounts::of(c);
}

struct CensusTargets {
  CensusCounts half, small, example;
};

CensusTargets census_targets(const PhaseModel& m) {
  return {census_for(m, [](RunConfig& c) { c.alpha = 0.5; }), census_for(m, [](RunConfig& c) { c.alpha = 0.03; }),
          census_for(m, [](RunConfig& c) { c.example_couplings = true; })};
}

void criterion6() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto& low = lower_end();
  if (!low.model) {
    v.fail("no phase model at 35.65 (" + low.error + ")");
  } else {
    const auto t = census_targets(*low.model);
    if (!(t.half == CensusCounts{3, 2, 5, 0})) v.fail("alpha 1/2: " + t.half.summary());
    if (!(t.small == CensusCounts{2, 2, 4, 0})) v.fail("alpha 0.03: " + t.small.summary());
    if (!(t.example == CensusCounts{3, 2, 5, 0})) v.fail("example couplings: " + t.example.summary());
  }
  RunConfig cfg;
  const PhaseModel m = phase_model(cfg, 35.9);
  const auto t = census_targets(m);
  info("computed H at 35.9: alpha 1/2 " + t.half.summary() + "; alpha 0.03 " + t.small.summary() + "; example " +
       t.example.summary());
  cfg.coupling_override = synthetic_h();
  const auto s = census_targets(phase_model(cfg));
  info("synthetic H: alpha 1/2 " + s.half.summary() + "; alpha 0.03 " + s.small.summary() + "; example " +
       s.example.summary());
  report(6, v, seconds_since(t0));
}

// ------------------------------------------------------------------ criterion 7

struct Sequence {
  int figure;
  std::function<void(RunConfig&)> setup;
  std::string parameter;
  double from, to;
  std::size_t points;
  std::vector<double> targets;
  std::string survivor_gait;  // empty: no survivor check
  std::optional<std::array<double, 2>> survivor_at;
};

std::vector<Sequence> sequences(const AlphaBounds& ab) {
  auto fwd = [](double a) {
    return [a](RunConfig& c) {
      c.alpha = a;
      c.hetero = HeteroMode::kForward;
    };
  };
  auto bwd = [](double a) {
    return [a](RunConfig& c) {
      c.alpha = a;
      c.hetero = HeteroMode::kBackward;
    };
  };
  auto example = [](RunConfig& c) {
    c.example_couplings = true;
    c.hetero = HeteroMode::kForward;
  };
  auto alpha_only = [](HeteroMode m) { return [m](RunConfig& c) { c.hetero = m; }; };
  return {
      {4, example, "delta_i", 0.0, 0.05, 101, {0.02, 0.032, 0.038}, "forward-tetrapod", std::array<double, 2>{0.71, 0.25}},
      {5, alpha_only(HeteroMode::kNone), "alpha", 0.5, 1.0 / 17.0, 101, {ab.alpha_min}, "", std::nullopt},
      {6, fwd(0.5), "delta_i", 0.0, 0.05, 101, {0.011, 0.025, 0.037}, "forward-tetrapod", std::nullopt},
      {7, fwd(0.03), "delta_i", 0.0, 0.05, 101, {0.030, 0.032}, "forward-tetrapod", std::array<double, 2>{0.69, 0.31}},
      {8, alpha_only(HeteroMode::kBackward), "alpha", 0.5, 1.0 / 1.06, 101, {ab.alpha_max}, "", std::nullopt},
      {9, bwd(1.0 / 3.0), "delta_i", 0.0, 0.07, 141, {0.015, 0.040, 0.056}, "backward-tetrapod",
       std::array<double, 2>{0.25, 0.70}},
      {10, bwd(0.95), "delta_i", 0.0, 0.02, 101, {0.0121, 0.013}, "backward-tetrapod", std::array<double, 2>{0.31, 0.69}},
  };
}

struct SequenceOutcome {
  bool numeric = true, structural = true;
  std::string text;
};

SequenceOutcome run_sequence(const Sequence& s, const RunConfig& base) {
  RunConfig cfg = base;
  s.setup(cfg);
  SweepOptions o;
  o.threads = hardware_threads();
  const SweepResult r = sweep(field_family(cfg, s.parameter), s.parameter, linspace(s.from, s.to, s.points), o);
  audit(r);
  SequenceOutcome out;
  std::ostringstream t;
  t << "fig " << s.figure << ": events";
  // the figure events are saddle-nodes; exchanges are reported beside them
  std::vector<const BifurcationEvent*> folds;
  std::size_t exchanges = 0;
  for (const auto& e : r.events) {
    if (e.exchange) {
      ++exchanges;
    } else {
      folds.push_back(&e);
      if (!e.fold) out.structural = false;
    }
  }
  for (const auto* e : folds) t << ' ' << fmt(e->value());
  if (folds.empty()) t << " none";
  t << " (targets";
  for (double x : s.targets) t << ' ' << fmt(x);
  t << ")";
  if (exchanges) t << ", " << exchanges << " stability exchanges";
  if (folds.size() != s.targets.size()) {
    out.structural = out.numeric = false;
    t << ", fold count " << folds.size() << " instead of " << s.targets.size();
  } else {
    for (std::size_t k = 0; k < s.targets.size(); ++k) {
      if (std::abs(folds[k]->value() - s.targets[k]) > 0.01) out.numeric = false;
    }
  }
  const Census& last = r.censuses.back();
  if (last.euler() != 0) out.structural = false;
  if (!s.survivor_gait.empty()) {
    std::vector<const FixedPointRecord*> sinks;
    for (const auto& p : last.points) {
      if (p.cls == PointClass::kSink) sinks.push_back(&p);
    }
    t << ", final " << CensusCounts::of(last).summary();
    if (sinks.size() != 1) {
      out.structural = out.numeric = false;
    } else {
      const auto& p = *sinks.front();
      t << ", survivor (" << fmt(p.theta1, 3) << ", " << fmt(p.theta2, 3) << ") " << p.gait;
      if (p.gait != s.survivor_gait) out.structural = false;
      if (s.survivor_at && torus_distance(p.theta1, p.theta2, (*s.survivor_at)[0], (*s.survivor_at)[1]) > 0.05) {
        out.numeric = false;
      }
    }
  }
  t << (out.numeric ? ", numeric match" : (out.structural ? ", structural match only" : ", no match"));
  out.text = t.str();
  return out;
}

void criterion7() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto& low = lower_end();
  if (!low.model) {
    v.fail("no phase model at 35.65 (" + low.error + ")");
  } else {
    RunConfig base;
    base.neuron = at(kIExtMin);
    for (const auto& s : sequences(alpha_bounds(*low.model->h))) {
      const auto t1 = Clock::now();
      const auto o = run_sequence(s, base);
      if (!o.structural) v.fail(o.text);
      if (seconds_since(t1) > 600) v.fail("fig " + std::to_string(s.figure) + " over 10 min");
    }
  }
  for (const std::string which : {"computed H at 35.9", "synthetic H"}) {
    RunConfig base;
    base.neuron = at(35.9);
    if (which == "synthetic H") base.coupling_override = synthetic_h();
    const PhaseModel m = phase_model(base);
    for (const auto& s : sequences(alpha_bounds(*m.h))) {
      try {
        info(which + ", " + run_sequence(s, base).text);
      } catch (const NumericalError& e) {
        info(which + ", fig " + std::to_string(s.figure) + ": " + e.what());
      }
    }
  }
  report(7, v, seconds_since(t0));
}

// ------------------------------------------------------------------ criterion 8

void criterion8() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto& low = lower_end();
  RunConfig cfg;
  cfg.example_couplings = true;
  cfg.hetero = HeteroMode::kForward;
  cfg.delta_i = 0.038;
  if (!low.model) {
    v.fail("no phase model at 35.65 (" + low.error + ")");
  } else {
    auto cache = std::make_shared<PhaseModelCache>(cfg);
    const auto fam = field_family(cfg, "i_ext", cache);
    const auto grid = linspace(kIExtMin, 37.5, 31);
    const Census start = find_fixed_points(fam(grid.front()));
    audit(start);
    if (start.sinks() != 1) {
      v.fail("start census " + CensusCounts::of(start).summary());
    } else {
      std::array<double, 2> seed{};
      for (const auto& p : start.points) {
        if (p.cls == PointClass::kSink) seed = {p.theta1, p.theta2};
      }
      const Branch b = trace_branch(fam, grid, seed);
      if (b.lost) v.fail(b.message);
      for (const auto& p : b.points) {
        if (p.point.cls != PointClass::kSink) v.fail("branch stops being a sink at " + fmt(p.value));
        const double e = cache->at(p.value)->eta.eta;
        if (torus_distance(p.point.theta1, p.point.theta2, 2.0 / 3.0 - e, 1.0 / 3.0 + e) > 0.08) {
          v.fail("branch leaves the transition curve at " + fmt(p.value));
          break;
        }
      }
      if (!b.points.empty() && torus_distance(b.points.back().point.theta1, b.points.back().point.theta2, 0.5, 0.5) > 0.05) {
        v.fail("branch ends away from the tripod");
      }
    }
  }
  // where the computed H exists, the start of the same scan
  const PhaseModel m = phase_model(cfg, 35.9);
  const Census c = find_fixed_points(torus_field(cfg, m, cfg.delta_i));
  audit(c);
  info("computed H at 35.9, example couplings, delta_i 0.038: " + CensusCounts::of(c).summary());
  report(8, v, seconds_since(t0));
}

// ------------------------------------------------------------------ criterion 9

void criterion9() {
  const auto t0 = Clock::now();
  Verdict v;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  double worst = 0;
  std::size_t used = 0;
  for (int k = 0; k < 1000; ++k) {
    CouplingStrengths c;
    for (auto& x : c.c) x = u(rng);
    // dense determinant of the wiring matrix built straight from the link table
    Matrix6d m = Matrix6d::Zero();
    for (int leg = 1; leg <= 6; ++leg) {
      for (const Link& l : network_inputs(leg)) m(leg - 1, l.from - 1) += c(l.coupling);
    }
    const double dense = m.determinant();
    if (std::abs(dense) < 1e-8) continue;
    ++used;
    worst = std::max(worst, std::abs(det_closed_form(c) - dense) / std::abs(dense));
  }
  if (worst >= 1e-10) v.fail("determinant relative error " + fmt(worst));
  v.note("determinant relative error " + fmt(worst, 3) + " over " + std::to_string(used) + " draws");

  RunConfig cfg;
  const PhaseModel m = phase_model(cfg, 35.9);
  const auto& h = m.h;
  const double eta = m.eta.eta;
  const auto c = CouplingStrengths::example_balanced();
  HeterogeneityShifts w;
  w.zbar = m.zbar;
  w.omega = {0.02 * m.zbar, 0.02 * m.zbar, 0.0, 0.02 * m.zbar, 0.02 * m.zbar, 0.0};
  const auto s = contralateral_shift(w, *h, eta);
  const TorusField a = TorusField::general(h, c, w.omega[0] - w.omega[1], w.omega[2] - w.omega[1], eta);
  const TorusField b = TorusField::general(h, shifted(c, s), 0, 0, eta);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double gap = 0;
  for (int k = 0; k < 100; ++k) {
    const double x = unit(rng), y = unit(rng);
    const auto ra = torus_rhs(a, x, y), rb = torus_rhs(b, x, y);
    gap = std::max({gap, std::abs(ra[0] - rb[0]), std::abs(ra[1] - rb[1])});
  }
  if (gap > 1e-10) v.fail("substituted field differs by " + fmt(gap));
  v.note("field gap " + fmt(gap, 3));

  // census invariance for alpha = 1/2 with forward selection at 0.02, on the
  // computed H and on the stand-in whose census is not empty there
  const auto ca = CouplingStrengths::from_alpha(0.5);
  const auto syn = fourier_table(synthetic_h());
  const double syn_eta = solve_eta(*syn).eta;
  for (const auto& [name, table, e, zbar] :
       {std::tuple{std::string("computed H"), h, eta, m.zbar}, std::tuple{std::string("synthetic H"), syn, syn_eta, 4.0}}) {
    HeterogeneityShifts ws;
    ws.zbar = zbar;
    ws.omega = {0.02 * zbar, 0.02 * zbar, 0.0, 0.02 * zbar, 0.02 * zbar, 0.0};
    const auto sa = contralateral_shift(ws, *table, e);
    const Census ea =
        find_fixed_points(TorusField::general(table, ca, ws.omega[0] - ws.omega[1], ws.omega[2] - ws.omega[1], e));
    const Census eb = find_fixed_points(TorusField::general(table, shifted(ca, sa), 0, 0, e));
    audit(ea);
    audit(eb);
    bool same = CensusCounts::of(ea) == CensusCounts::of(eb) && ea.points.size() == eb.points.size();
    for (std::size_t i = 0; same && i < ea.points.size(); ++i) {
      same = ea.points[i].cls == eb.points[i].cls &&
             torus_distance(ea.points[i].theta1, ea.points[i].theta2, eb.points[i].theta1, eb.points[i].theta2) < 1e-8;
    }
    if (!same) v.fail(name + ": census changes under substitution");
    v.note(name + " census " + CensusCounts::of(ea).summary() + " on both sides");
  }
  report(9, v, seconds_since(t0));
}

// ------------------------------------------------------------------ criterion 10

void criterion10() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto& low = lower_end();
  if (!low.model) {
    v.fail("no uncoupled orbit at 35.65 to start the network from (" + low.error + ")");
  } else {
    RunConfig cfg;
    cfg.example_couplings = true;
    cfg.hetero = HeteroMode::kForward;
    cfg.delta_i = 0.045;
    const Census c = find_fixed_points(torus_field(cfg, *low.model, cfg.delta_i));
    audit(c);
    const FixedPointRecord* sink = nullptr;
    for (const auto& p : c.points) {
      if (p.cls == PointClass::kSink) sink = &p;
    }
    if (c.sinks() != 1 || !sink) {
      v.fail("torus model has " + std::to_string(c.sinks()) + " sinks past the last fold");
    } else {
      const LimitCycle lc = find_limit_cycle(at(kIExtMin));
      NetworkOptions o;
      o.sample_interval = 0;
      o.reference_period = lc.period;
      const auto g = GaitTemplate::make(GaitKind::kTripod);
      const auto tr = simulate_network(network_on_cycle(lc, g.leg_phases()), at(kIExtMin),
                                       CouplingStrengths::example_balanced(),
                                       HeterodriveSpec::forward_selection(cfg.delta_i), 400 * lc.period, o);
      PhaseExtractionOptions e;
      e.transient = 300 * lc.period;
      const LegPhases ph = extract_leg_phases(tr, e);
      if (torus_distance(ph.theta1, ph.theta2, sink->theta1, sink->theta2) > 0.05) v.fail("locked away from the sink");
      const auto& ps = ph.contralateral;
      if (std::max({circle_distance(ps[0], ps[1]), circle_distance(ps[1], ps[2]), circle_distance(ps[0], ps[2])}) > 0.02) {
        v.fail("contralateral differences unequal");
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs > 300) v.fail("runtime over 5 min");
  report(10, v, secs);
}

}  // namespace


int main() {
  std::cout << std::unitbuf;
  const std::vector<std::function<void()>> all = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                  criterion6, criterion7, criterion8, criterion9, criterion10};
  for (std::size_t i = 0; i < all.size(); ++i) {
    try {
      all[i]();
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "criterion " << i + 1 << ": FAIL: unexpected error: " << e.what() << std::endl;
    }
  }
  std::cout << "euler index zero on " << censuses_seen - static_cast<std::size_t>(euler_violations) << " of "
            << censuses_seen << " censuses" << std::endl;
  if (euler_violations) ++failures;
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
