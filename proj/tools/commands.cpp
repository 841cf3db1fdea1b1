#include <cmath>
#include <iostream>
#include <sstream>

#include "common.hpp"
#include "cpgait/csv.hpp"
#include "cpgait/equivalence.hpp"
#include "cpgait/error.hpp"
#include "cpgait/gaits.hpp"
#include "cpgait/network.hpp"
#include "cpgait/parallel.hpp"
#include "cpgait/phase_reduction.hpp"
#include "cpgait/pipeline.hpp"
#include "cpgait/svg.hpp"

namespace cli {

using namespace cpgait;
using nlohmann::json;

std::string Context::file(const std::string& name) {
  outputs.push_back(name);
  return (out / name).string();
}

void Context::warn(const std::string& msg) {
  warnings.push_back(msg);
  std::cerr << "warning: " << msg << '\n';
}

namespace {

LimitCycleOptions cycle_options(const RunConfig& cfg) { return reduction_options(cfg).cycle; }

const char* color_of(PointClass c) {
  switch (c) {
    case PointClass::kSink: return kSinkColor;
    case PointClass::kSource: return kSourceColor;
    case PointClass::kSaddle: return kSaddleColor;
    default: return "#888888";
  }
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

json point_json(const FixedPointRecord& p) {
  return {{"theta1", p.theta1},
          {"theta2", p.theta2},
          {"class", to_string(p.cls)},
          {"lambda1_re", p.eigenvalues[0].real()},
          {"lambda2_re", p.eigenvalues[1].real()},
          {"gait", p.gait}};
}

void check_hetero_magnitude(Context& ctx) {
  HeterodriveSpec d;
  switch (ctx.cfg.hetero) {
    case HeteroMode::kForward: d = HeterodriveSpec::forward_selection(ctx.cfg.delta_i); break;
    case HeteroMode::kBackward: d = HeterodriveSpec::backward_selection(ctx.cfg.delta_i); break;
    case HeteroMode::kCurrents: d = HeterodriveSpec::constants(ctx.cfg.currents); break;
    default: return;
  }
  if (d.magnitude_warning(ctx.cfg.neuron.g_syn)) ctx.warn("heterogeneous currents exceed 10 g_syn");
  if (!d.contralaterally_symmetric()) ctx.warn("currents differ between contralateral partners");
}

}  // namespace

json census_json(const Census& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(point_json(p));
  return {{"sinks", c.sinks()},   {"sources", c.sources()},          {"saddles", c.saddles()},
          {"euler", c.euler()},   {"nonhyperbolic", c.nonhyperbolic()}, {"grid", c.grid},
          {"points", pts}};
}

json sweep_json(const SweepResult& r) {
  json ev = json::array();
  for (const auto& e : r.events) {
    json j = {{"value", e.value()},
              {"lo", e.lo},
              {"hi", e.hi},
              {"ambiguous", e.ambiguous},
              {"before", e.before.summary()},
              {"after", e.after.summary()}};
    if (e.fold) {
      j["type"] = e.fold->degenerate ? "degenerate" : "saddle-node";
      j["pair"] = to_string(e.fold->first) + "+" + to_string(e.fold->second);
      j["locus"] = {e.fold->locus[0], e.fold->locus[1]};
      j["det_normalized"] = e.fold->det_normalized;
      j["trace_normalized"] = e.fold->trace_normalized;
    } else if (e.exchange) {
      j["type"] = "exchange";
      j["pair"] = to_string(e.exchange->from) + ">" + to_string(e.exchange->to);
      j["locus"] = {e.exchange->locus[0], e.exchange->locus[1]};
      j["det_normalized"] = e.exchange->det_normalized;
      j["trace_normalized"] = e.exchange->trace_normalized;
    } else {
      j["type"] = e.ambiguous ? "ambiguous" : "unresolved";
    }
    if (!e.note.empty()) j["note"] = e.note;
    ev.push_back(j);
  }
  json out = {{"parameter", r.parameter}, {"events", ev}, {"folds", r.folds()}, {"exchanges", r.exchanges()}};
  if (!r.censuses.empty()) out["final_census"] = census_json(r.censuses.back());
  return out;
}

void write_events_jsonl(Context& ctx, const SweepResult& r, const std::string& name) {
  std::string text;
  for (const auto& e : sweep_json(r)["events"]) text += e.dump() + "\n";
  csv::write_atomic(ctx.file(name), text);
}

void nullcline_plot(Context& ctx, const TorusField& f, const Census& c, const std::string& title,
                    const std::string& name) {
  if (!ctx.cfg.svg) return;
  SvgPlot plot(0.0, 1.0, 0.0, 1.0, title, "theta1", "theta2");
  const NullclineSet n = cpgait::nullclines(f, ctx.cfg.nullcline_grid);
  for (const auto& l : n.theta1_zero) plot.polyline(l.points, kTheta1Nullcline);
  for (const auto& l : n.theta2_zero) plot.polyline(l.points, kTheta2Nullcline);
  for (const auto& p : c.points) plot.marker(p.theta1, p.theta2, color_of(p.cls));
  plot.note(std::to_string(c.sinks()) + " sinks, " + std::to_string(c.sources()) + " sources, " +
            std::to_string(c.saddles()) + " saddles");
  plot.save(ctx.file(name), ctx.deterministic);
}

void sweep_plot(Context& ctx, const SweepResult& r, const std::string& title, const std::string& name) {
  if (!ctx.cfg.svg || r.grid.empty()) return;
  double lo = std::min(r.grid.front(), r.grid.back()), hi = std::max(r.grid.front(), r.grid.back());
  std::size_t top = 1;
  for (const auto& c : r.censuses) top = std::max(top, c.points.size());
  SvgPlot plot(lo, hi, 0.0, static_cast<double>(top), title, r.parameter, "count");
  std::vector<std::array<double, 2>> sinks, sources, saddles;
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    sinks.push_back({r.grid[i], static_cast<double>(r.censuses[i].sinks())});
    sources.push_back({r.grid[i], static_cast<double>(r.censuses[i].sources())});
    saddles.push_back({r.grid[i], static_cast<double>(r.censuses[i].saddles())});
  }
  plot.polyline(sinks, kSinkColor);
  plot.polyline(sources, kSourceColor);
  plot.polyline(saddles, kSaddleColor);
  for (const auto& e : r.events) plot.polyline({{e.value(), 0.0}, {e.value(), static_cast<double>(top)}}, "#555555", 1.0, true);
  std::string events;
  for (const auto& e : r.events) events += (events.empty() ? "" : ", ") + fmt(e.value());
  plot.note(events.empty() ? "no events" : "events at " + events);
  plot.save(ctx.file(name), ctx.deterministic);
}

int limit_cycle(Context& ctx) {
  const LimitCycle lc = find_limit_cycle(ctx.cfg.neuron, cycle_options(ctx.cfg));
  std::ostringstream s;
  s << "phase,t,v,m,w,s\n";
  for (std::size_t k = 0; k < lc.size(); ++k) {
    const double ph = static_cast<double>(k) * lc.dphase();
    const auto& x = lc.samples[k];
    s << csv::num(ph) << ',' << csv::num(ph * lc.period) << ',' << csv::num(x.v) << ',' << csv::num(x.m) << ','
      << csv::num(x.w) << ',' << csv::num(x.s) << '\n';
  }
  csv::write_atomic(ctx.file("limit_cycle.csv"), s.str());
  if (ctx.cfg.svg) {
    std::vector<std::array<double, 2>> v;
    double vmin = 1e9, vmax = -1e9;
    for (std::size_t k = 0; k < lc.size(); ++k) {
      v.push_back({static_cast<double>(k) * lc.dphase() * lc.period, lc.samples[k].v});
      vmin = std::min(vmin, lc.samples[k].v), vmax = std::max(vmax, lc.samples[k].v);
    }
    SvgPlot plot(0.0, lc.period, vmin - 5, vmax + 5, "Limit cycle at I_ext = " + fmt(lc.params.i_ext, 6), "t (ms)",
                 "v (mV)");
    plot.polyline(v, "#222222", 1.0);
    plot.note("T = " + fmt(lc.period, 6) + " ms");
    plot.save(ctx.file("limit_cycle.svg"), ctx.deterministic);
  }
  ctx.summary = {{"i_ext", lc.params.i_ext},
                 {"period_ms", lc.period},
                 {"frequency_per_ms", lc.frequency()},
                 {"closure_error", lc.closure_error},
                 {"period_change", lc.period_change},
                 {"gating_excursion", lc.gating_excursion}};
  return 0;
}

int prc(Context& ctx) {
  const LimitCycle lc = find_limit_cycle(ctx.cfg.neuron, cycle_options(ctx.cfg));
  const IPRC z = adjoint_iprc(lc, reduction_options(ctx.cfg).adjoint);
  write_iprc_csv(z, lc.params.i_ext, ctx.file("iprc.csv"));
  DirectPrcOptions d;
  d.kick = ctx.cfg.prc_kick;
  d.n_phases = ctx.cfg.prc_phases;
  d.threads = ctx.threads;
  const DirectPrc dp = direct_prc(lc, d);
  std::ostringstream s;
  s << "phase,Z_v_direct,Z_v_direct_half,Z_v_adjoint\n";
  for (std::size_t k = 0; k < dp.phase.size(); ++k) {
    s << csv::num(dp.phase[k]) << ',' << csv::num(dp.zv[k]) << ',' << csv::num(dp.zv_half[k]) << ','
      << csv::num(z.zv_at(dp.phase[k])) << '\n';
  }
  csv::write_atomic(ctx.file("prc_direct.csv"), s.str());
  const double rms = prc_rms_relative_deviation(dp, z);
  if (ctx.cfg.svg) {
    std::vector<std::array<double, 2>> a, b;
    const auto zv = z.component(0);
    double lo = 0, hi = 0;
    for (std::size_t k = 0; k < zv.size(); ++k) {
      a.push_back({static_cast<double>(k) / static_cast<double>(zv.size()), zv[k]});
      lo = std::min(lo, zv[k]), hi = std::max(hi, zv[k]);
    }
    SvgPlot plot(0.0, 1.0, lo, hi * 1.05, "Voltage iPRC at I_ext = " + fmt(lc.params.i_ext, 6), "phase", "Z_v");
    plot.polyline(a, "#222222");
    for (std::size_t k = 0; k < dp.phase.size(); ++k) plot.marker(dp.phase[k], dp.zv[k], kSourceColor, "circle", 2.5);
    plot.note("direct kicks (dots), RMS relative deviation " + fmt(rms, 3));
    plot.save(ctx.file("iprc.svg"), ctx.deterministic);
  }
  ctx.summary = {{"i_ext", lc.params.i_ext},
                 {"period_ms", lc.period},
                 {"zbar", z.mean_zv_per_current(lc.params.capacitance)},
                 {"normalization_drift", z.normalization_drift},
                 {"passes", z.passes},
                 {"rms_relative_deviation", rms},
                 {"halving_discrepancy", dp.halving_discrepancy}};
  return 0;
}

int coupling_fn(Context& ctx) {
  const PhaseModel m = phase_model(ctx.cfg);
  write_coupling_csv(*m.h, ctx.file("coupling.csv"), {{"period", m.period}, {"zbar", m.zbar}});
  const AlphaBounds ab = alpha_bounds(*m.h);
  if (ctx.cfg.svg) {
    std::vector<std::array<double, 2>> pts;
    double lo = 0, hi = 0;
    for (std::size_t k = 0; k <= 400; ++k) {
      const double th = static_cast<double>(k) / 400.0;
      pts.push_back({th, (*m.h)(th)});
      lo = std::min(lo, (*m.h)(th)), hi = std::max(hi, (*m.h)(th));
    }
    SvgPlot plot(0.0, 1.0, lo * 1.05, hi + 0.05 * (hi - lo), "Coupling function at I_ext = " + fmt(m.i_ext, 6),
                 "theta", "H");
    plot.polyline(pts, "#222222");
    plot.polyline({{1.0 / 3, lo * 1.05}, {1.0 / 3, hi}}, "#999999", 1.0, true);
    plot.polyline({{2.0 / 3, lo * 1.05}, {2.0 / 3, hi}}, "#999999", 1.0, true);
    plot.save(ctx.file("coupling.svg"), ctx.deterministic);
  }
  ctx.summary = {{"i_ext", m.i_ext},          {"synthetic", m.synthetic},   {"period_ms", m.period},
                 {"zbar", m.zbar},            {"sup_norm", m.h->sup_norm()}, {"eta", m.eta.eta},
                 {"eta_trivial", m.eta.trivial}, {"alpha_min", ab.alpha_min}, {"alpha_max", ab.alpha_max}};
  return 0;
}

int eta(Context& ctx) {
  std::vector<double> grid = {ctx.cfg.neuron.i_ext};
  if (ctx.cfg.scan_given && ctx.cfg.scan.parameter == "i_ext") grid = ctx.cfg.scan.grid();
  struct Row {
    std::optional<PhaseModel> m;
    std::optional<AlphaBounds> ab;
    std::string error;
  };
  std::vector<Row> rows(grid.size());
  parallel_for(grid.size(), ctx.threads, [&](std::size_t i) {
    try {
      rows[i].m = phase_model(ctx.cfg, grid[i]);
      rows[i].ab = alpha_bounds(*rows[i].m->h);
    } catch (const NumericalError& e) {
      rows[i].error = e.what();
    }
  });
  std::ostringstream s;
  s << "i_ext,eta,trivial,roots,alpha_min,alpha_max,error\n";
  json list = json::array();
  bool failed = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = rows[i];
    s << csv::num(grid[i]) << ',';
    if (r.m) {
      s << csv::num(r.m->eta.eta) << ',' << (r.m->eta.trivial ? 1 : 0) << ',' << r.m->eta.grid_roots.size() << ','
        << csv::num(r.ab->alpha_min) << ',' << csv::num(r.ab->alpha_max) << ",\n";
      list.push_back({{"i_ext", grid[i]},
                      {"eta", r.m->eta.eta},
                      {"trivial", r.m->eta.trivial},
                      {"alpha_min", r.ab->alpha_min},
                      {"alpha_max", r.ab->alpha_max}});
    } else {
      failed = true;
      s << ",,,,," << '"' << r.error << '"' << '\n';
      list.push_back({{"i_ext", grid[i]}, {"error", r.error}});
      ctx.warn(r.error);
    }
  }
  csv::write_atomic(ctx.file("eta.csv"), s.str());
  ctx.summary = {{"rows", list}};
  return failed ? 3 : 0;
}

int torus_census(Context& ctx) {
  check_hetero_magnitude(ctx);
  const PhaseModel m = phase_model(ctx.cfg);
  const TorusField f = torus_field(ctx.cfg, m, ctx.cfg.delta_i);
  CensusOptions o;
  o.grid = ctx.cfg.census_grid;
  const Census c = find_fixed_points(f, o);
  write_census_csv(c, ctx.file("census.csv"));
  nullcline_plot(ctx, f, c, "Phase plane, delta_i = " + fmt(ctx.cfg.delta_i), "census.svg");
  ctx.summary = census_json(c);
  ctx.summary["eta"] = m.eta.eta;
  if (c.euler() != 0) ctx.warn("census breaks the index sum; some fixed point was missed");
  return 0;
}

int nullclines(Context& ctx) {
  const PhaseModel m = phase_model(ctx.cfg);
  const TorusField f = torus_field(ctx.cfg, m, ctx.cfg.delta_i);
  const NullclineSet n = cpgait::nullclines(f, ctx.cfg.nullcline_grid);
  write_nullclines_csv(n, ctx.file("nullclines.csv"));
  CensusOptions o;
  o.grid = ctx.cfg.census_grid;
  nullcline_plot(ctx, f, find_fixed_points(f, o), "Nullclines, delta_i = " + fmt(ctx.cfg.delta_i), "nullclines.svg");
  ctx.summary = {{"theta1_polylines", n.theta1_zero.size()}, {"theta2_polylines", n.theta2_zero.size()}};
  return 0;
}

int sweep(Context& ctx) {
  const FieldFamily family = field_family(ctx.cfg, ctx.cfg.scan.parameter);
  SweepOptions o;
  o.census.grid = ctx.cfg.census_grid;
  o.threads = ctx.threads;
  const SweepResult r = cpgait::sweep(family, ctx.cfg.scan.parameter, ctx.cfg.scan.grid(), o);
  write_sweep_csv(r, ctx.file("sweep.csv"));
  write_events_csv(r, ctx.file("events.csv"));
  write_events_jsonl(ctx, r, "events.jsonl");
  sweep_plot(ctx, r, "Census along " + r.parameter, "sweep.svg");
  ctx.summary = sweep_json(r);
  for (const auto& c : r.censuses) {
    if (c.euler() != 0) {
      ctx.warn("a census along the sweep breaks the index sum");
      break;
    }
  }
  return 0;
}

int branch(Context& ctx) {
  const FieldFamily family = field_family(ctx.cfg, ctx.cfg.scan.parameter);
  const auto grid = ctx.cfg.scan.grid();
  std::array<double, 2> seed{};
  if (ctx.cfg.seed_point) {
    seed = *ctx.cfg.seed_point;
  } else {
    CensusOptions o;
    o.grid = ctx.cfg.census_grid;
    const Census c = find_fixed_points(family(grid.front()), o);
    if (c.sinks() != 1) {
      throw ConfigError("branch start has " + std::to_string(c.sinks()) + " sinks; give seed_point");
    }
    for (const auto& p : c.points) {
      if (p.cls == PointClass::kSink) seed = {p.theta1, p.theta2};
    }
  }
  BranchOptions bo;
  bo.census.grid = ctx.cfg.census_grid;
  const Branch b = trace_branch(family, grid, seed, bo);
  write_branch_csv(b, ctx.cfg.scan.parameter, ctx.file("branch.csv"));
  if (ctx.cfg.svg) {
    std::vector<std::array<double, 2>> t1, t2;
    for (const auto& p : b.points) {
      t1.push_back({p.value, p.point.theta1});
      t2.push_back({p.value, p.point.theta2});
    }
    SvgPlot plot(std::min(grid.front(), grid.back()), std::max(grid.front(), grid.back()), 0.0, 1.0,
                 "Branch along " + ctx.cfg.scan.parameter, ctx.cfg.scan.parameter, "theta");
    plot.polyline(t1, kTheta1Nullcline);
    plot.polyline(t2, kTheta2Nullcline);
    plot.note("theta1 blue, theta2 red");
    plot.save(ctx.file("branch.svg"), ctx.deterministic);
  }
  json pts = json::array();
  for (const auto& p : b.points) {
    pts.push_back({{"value", p.value}, {"point", point_json(p.point)}, {"class_changed", p.class_changed}});
  }
  ctx.summary = {{"points", pts}, {"lost", b.lost}};
  if (b.lost) {
    ctx.summary["message"] = b.message;
    std::cerr << "error: " << b.message << '\n';
    return 3;
  }
  return 0;
}

int simulate_network(Context& ctx) {
  check_hetero_magnitude(ctx);
  const auto& cfg = ctx.cfg;
  const LimitCycle lc = find_limit_cycle(cfg.neuron, cycle_options(cfg));
  const GaitKind kind = parse_gait_kind(cfg.initial_gait);
  double gait_eta = 1.0 / 6.0;
  if (kind == GaitKind::kTransitionFR || kind == GaitKind::kTransitionFL || kind == GaitKind::kTransitionBR ||
      kind == GaitKind::kTransitionBL) {
    gait_eta = phase_model(cfg).eta.eta;
  }
  const auto phases = GaitTemplate::make(kind, gait_eta).leg_phases();
  const NetworkState x0 = network_on_cycle(lc, phases);
  HeterodriveSpec drives;
  switch (cfg.hetero) {
    case HeteroMode::kForward: drives = HeterodriveSpec::forward_selection(cfg.delta_i); break;
    case HeteroMode::kBackward: drives = HeterodriveSpec::backward_selection(cfg.delta_i); break;
    case HeteroMode::kCurrents: drives = HeterodriveSpec::constants(cfg.currents); break;
    default: drives = HeterodriveSpec::zero(); break;
  }
  NetworkOptions no;
  no.reference_period = lc.period;
  no.sample_interval = std::max(0.5, lc.period / 40.0);
  const NetworkTrajectory tr = cpgait::simulate_network(x0, cfg.neuron, cfg.couplings(), drives,
                                                        cfg.simulate_duration, no);
  write_network_csv(tr, ctx.file("network.csv"));
  write_onsets_csv(tr, ctx.file("onsets.csv"));
  PhaseExtractionOptions po;
  po.transient = cfg.simulate_transient;
  const LegPhases ph = extract_leg_phases(tr, po);
  ctx.summary = {{"theta1", ph.theta1},
                 {"theta2", ph.theta2},
                 {"contralateral", ph.contralateral},
                 {"theta1_std", ph.theta1_std},
                 {"theta2_std", ph.theta2_std},
                 {"cycles_used", ph.cycles_used},
                 {"locked", ph.locked},
                 {"mean_period_ms", ph.mean_period},
                 {"gait", label_gait(ph.theta1, ph.theta2, gait_eta)}};
  if (!ph.locked) ctx.warn("legs did not lock within the simulated time");
  return 0;
}

int equivalence(Context& ctx) {
  const CouplingStrengths c = ctx.cfg.couplings();
  std::array<double, 6> currents{};
  const auto& cfg = ctx.cfg;
  if (cfg.hetero == HeteroMode::kCurrents) {
    currents = cfg.currents;
  } else if (cfg.hetero != HeteroMode::kNone) {
    const auto w = frequency_shifts(cfg, cfg.delta_i, 1.0).omega;
    currents = w;
  }
  json j = {{"couplings", c.c},
            {"currents", currents},
            {"det_closed_form", det_closed_form(c)},
            {"det_dense", det_dense(c)},
            {"singularity_factor", singularity_factor(c)}};
  try {
    const CouplingShifts s = solve_dI(c, currents);
    j["singular"] = false;
    j["dI"] = s.dI;
    j["residual"] = s.residual;
  } catch (const NumericalError& e) {
    if (e.reason() != NumericalError::Reason::kSingular) throw;
    j["singular"] = true;
    j["dI"] = nullptr;
    ctx.warn(e.what());
  }
  int code = 0;
  try {
    const PhaseModel m = phase_model(cfg);
    const HeterogeneityShifts w = frequency_shifts(cfg, cfg.delta_i, m.zbar);
    const ContralateralShift d = contralateral_shift(w, *m.h, m.eta.eta);
    j["delta"] = d.delta;
    j["h_contra"] = d.h_contra;
    j["delta_large"] = d.large;
    j["transport_mismatch"] = transport_mismatch(*m.h, c, w, m.eta.eta);
    if (d.large) ctx.warn("contralateral shifts exceed 0.1");
  } catch (const NumericalError& e) {
    j["delta"] = nullptr;
    j["delta_error"] = e.what();
    std::cerr << "error: " << e.what() << '\n';
    code = 3;
  }
  csv::write_atomic(ctx.file("equivalence.json"), j.dump(2) + "\n");
  ctx.summary = j;
  return code;
}

}  // namespace cli
