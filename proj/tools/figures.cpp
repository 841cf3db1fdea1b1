#include <cmath>
#include <iostream>
#include <sstream>

#include "common.hpp"
#include "cpgait/csv.hpp"
#include "cpgait/error.hpp"
#include "cpgait/neuron.hpp"
#include "cpgait/parallel.hpp"
#include "cpgait/phase_reduction.hpp"
#include "cpgait/pipeline.hpp"
#include "cpgait/svg.hpp"

namespace cli {

using namespace cpgait;
using nlohmann::json;

namespace {

std::string tag(int fig) { return "fig" + std::to_string(fig); }

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

// Scenario of one phase-plane figure; a scan section in the config replaces the range.
struct Scenario {
  enum Couplings { kExample, kAlpha } couplings;
  double alpha = 0.5;
  HeteroMode mode = HeteroMode::kForward;
  std::string parameter = "delta_i";
  double from = 0.0, to = 0.05;
  std::size_t points = 101;
};

Scenario scenario(int fig) {
  switch (fig) {
    case 4: return {Scenario::kExample, 0.5, HeteroMode::kForward, "delta_i", 0.0, 0.05, 101};
    case 5: return {Scenario::kAlpha, 0.5, HeteroMode::kNone, "alpha", 0.5, 1.0 / 17.0, 101};
    case 6: return {Scenario::kAlpha, 0.5, HeteroMode::kForward, "delta_i", 0.0, 0.05, 101};
    case 7: return {Scenario::kAlpha, 0.03, HeteroMode::kForward, "delta_i", 0.0, 0.05, 101};
    case 8: return {Scenario::kAlpha, 0.5, HeteroMode::kBackward, "alpha", 0.5, 1.0 / 1.06, 101};
    case 9: return {Scenario::kAlpha, 1.0 / 3.0, HeteroMode::kBackward, "delta_i", 0.0, 0.07, 141};
    case 10: return {Scenario::kAlpha, 0.95, HeteroMode::kBackward, "delta_i", 0.0, 0.02, 101};
    default: throw ConfigError("no phase-plane scenario for figure " + std::to_string(fig));
  }
}

RunConfig apply(const RunConfig& base, const Scenario& s) {
  RunConfig cfg = base;
  cfg.c.reset();
  cfg.alpha.reset();
  cfg.example_couplings = false;
  if (s.couplings == Scenario::kExample) {
    cfg.example_couplings = true;
  } else {
    cfg.alpha = s.alpha;
  }
  cfg.hetero = s.mode;
  cfg.delta_i = 0.0;
  if (!base.scan_given) {
    cfg.scan.parameter = s.parameter;
    cfg.scan.from = s.from;
    cfg.scan.to = s.to;
    cfg.scan.points = s.points;
  }
  return cfg;
}

int figure1(Context& ctx) {
  std::vector<double> grid;
  if (ctx.cfg.scan_given && ctx.cfg.scan.parameter == "i_ext") {
    grid = ctx.cfg.scan.grid();
  } else {
    for (int i = 0; i <= 41; ++i) grid.push_back(kIExtMin + (kIExtMax - kIExtMin) * i / 41.0);
  }
  auto opts = reduction_options(ctx.cfg).cycle;
  std::vector<FrequencyRow> rows(grid.size());
  parallel_for(grid.size(), ctx.threads, [&](std::size_t i) {
    rows[i] = frequency_curve(ctx.cfg.neuron, {grid[i]}, opts).front();
  });
  std::ostringstream s;
  s << "i_ext,frequency_per_ms,frequency_hz,period_ms,error\n";
  std::vector<std::array<double, 2>> pts;
  double top = 0.0;
  std::size_t failures = 0;
  std::optional<double> first_bursting;
  for (const auto& r : rows) {
    s << csv::num(r.i_ext) << ',';
    if (r.frequency) {
      s << csv::num(*r.frequency) << ',' << csv::num(*r.frequency * 1000.0) << ',' << csv::num(*r.period) << ",\n";
      pts.push_back({r.i_ext, *r.frequency * 1000.0});
      top = std::max(top, *r.frequency * 1000.0);
      if (!first_bursting) first_bursting = r.i_ext;
    } else {
      s << ",,," << '"' << r.error << '"' << '\n';
      ++failures;
    }
  }
  csv::write_atomic(ctx.file("fig1_frequency.csv"), s.str());
  if (ctx.cfg.svg) {
    SvgPlot plot(grid.front(), grid.back(), 0.0, top > 0 ? top * 1.1 : 1.0, "Frequency against I_ext", "I_ext",
                 "frequency (Hz)");
    plot.polyline(pts, "#222222");
    for (const auto& p : pts) plot.marker(p[0], p[1], "#222222", "circle", 2.0);
    if (failures) plot.note(std::to_string(failures) + " values without sustained bursting");
    plot.save(ctx.file("fig1_frequency.svg"), ctx.deterministic);
  }
  ctx.summary["bursting_values"] = pts.size();
  ctx.summary["non_bursting_values"] = failures;
  if (first_bursting) ctx.summary["first_bursting_i_ext"] = *first_bursting;
  if (failures) ctx.warn(std::to_string(failures) + " I_ext values show no sustained bursting");
  // Voltage trace at the configured current, as in the left panel.
  Context sub = ctx;
  sub.outputs.clear();
  sub.summary = json::object();
  try {
    limit_cycle(sub);
    for (const auto& o : sub.outputs) ctx.outputs.push_back(o);
    ctx.summary["trace"] = sub.summary;
  } catch (const NumericalError& e) {
    ctx.warn(std::string("no trace at the configured I_ext: ") + e.what());
  }
  return pts.empty() ? 3 : 0;
}

int figure3(Context& ctx) {
  Context a = ctx;
  a.outputs.clear();
  prc(a);
  Context b = ctx;
  b.outputs.clear();
  coupling_fn(b);
  ctx.outputs.insert(ctx.outputs.end(), a.outputs.begin(), a.outputs.end());
  ctx.outputs.insert(ctx.outputs.end(), b.outputs.begin(), b.outputs.end());
  ctx.summary = {{"prc", a.summary}, {"coupling", b.summary}};
  return 0;
}

int phase_plane_figure(Context& ctx, int fig) {
  const Scenario sc = scenario(fig);
  const RunConfig cfg = apply(ctx.cfg, sc);
  const FieldFamily family = field_family(cfg, cfg.scan.parameter);
  SweepOptions o;
  o.census.grid = cfg.census_grid;
  o.threads = ctx.threads;
  const auto grid = cfg.scan.grid();
  const SweepResult r = cpgait::sweep(family, cfg.scan.parameter, grid, o);
  write_sweep_csv(r, ctx.file(tag(fig) + "_sweep.csv"));
  write_events_csv(r, ctx.file(tag(fig) + "_events.csv"));
  write_events_jsonl(ctx, r, tag(fig) + "_events.jsonl");
  sweep_plot(ctx, r, "Figure " + std::to_string(fig) + ": census along " + r.parameter, tag(fig) + "_sweep.svg");

  // Panels at the start and just past every event, halfway to the next one.
  std::vector<double> panels = {grid.front()};
  for (std::size_t k = 0; k < r.events.size(); ++k) {
    const double next = k + 1 < r.events.size() ? r.events[k + 1].value() : grid.back();
    panels.push_back(0.5 * (r.events[k].value() + next));
  }
  json panel_list = json::array();
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const TorusField f = family(panels[k]);
    const Census c = find_fixed_points(f, o.census);
    const std::string name = tag(fig) + "_panel" + std::to_string(k);
    write_census_csv(c, ctx.file(name + "_census.csv"));
    nullcline_plot(ctx, f, c, "Figure " + std::to_string(fig) + ", " + r.parameter + " = " + fmt(panels[k]),
                   name + ".svg");
    panel_list.push_back({{"value", panels[k]}, {"census", census_json(c)}});
  }
  ctx.summary = sweep_json(r);
  ctx.summary["panels"] = panel_list;
  return 0;
}

int figure11(Context& ctx) {
  RunConfig cfg = ctx.cfg;
  cfg.c.reset();
  cfg.alpha.reset();
  cfg.example_couplings = true;
  cfg.hetero = HeteroMode::kForward;
  if (cfg.delta_i == 0.0) cfg.delta_i = 0.038;
  if (!cfg.scan_given) {
    cfg.scan.parameter = "i_ext";
    cfg.scan.from = kIExtMin;
    cfg.scan.to = 37.5;
    cfg.scan.points = 31;
  }
  auto cache = std::make_shared<PhaseModelCache>(cfg);
  const FieldFamily family = field_family(cfg, cfg.scan.parameter, cache);
  const auto grid = cfg.scan.grid();
  CensusOptions co;
  co.grid = cfg.census_grid;
  const Census start = find_fixed_points(family(grid.front()), co);
  std::array<double, 2> seed{};
  if (cfg.seed_point) {
    seed = *cfg.seed_point;
  } else {
    if (start.sinks() != 1) {
      throw NumericalError("cli", NumericalError::Reason::kAssumptionViolation,
                           "branch start has " + std::to_string(start.sinks()) + " sinks instead of one");
    }
    for (const auto& p : start.points) {
      if (p.cls == PointClass::kSink) seed = {p.theta1, p.theta2};
    }
  }
  BranchOptions bo;
  bo.census = co;
  const Branch b = trace_branch(family, grid, seed, bo);
  write_branch_csv(b, cfg.scan.parameter, ctx.file("fig11_branch.csv"));
  json pts = json::array();
  for (const auto& p : b.points) {
    const double e = cfg.scan.parameter == "i_ext" ? cache->at(p.value)->eta.eta : std::nan("");
    pts.push_back({{"value", p.value},
                   {"theta1", p.point.theta1},
                   {"theta2", p.point.theta2},
                   {"class", to_string(p.point.cls)},
                   {"eta", e}});
  }
  for (std::size_t k : {std::size_t{0}, b.points.size() - 1}) {
    const double v = b.points[k].value;
    const TorusField f = family(v);
    nullcline_plot(ctx, f, find_fixed_points(f, co), "Figure 11, " + cfg.scan.parameter + " = " + fmt(v),
                   "fig11_panel" + std::to_string(k == 0 ? 0 : 1) + ".svg");
  }
  ctx.summary = {{"points", pts}, {"lost", b.lost}};
  if (b.lost) {
    ctx.summary["message"] = b.message;
    std::cerr << "error: " << b.message << '\n';
    return 3;
  }
  return 0;
}

}  // namespace

int reproduce_figure(Context& ctx, int figure) {
  switch (figure) {
    case 1: return figure1(ctx);
    case 3: return figure3(ctx);
    case 11: return figure11(ctx);
    case 4: case 5: case 6: case 7: case 8: case 9: case 10: return phase_plane_figure(ctx, figure);
    case 2: throw ConfigError("figure 2 is a schematic of the network; nothing to compute");
    default: throw ConfigError("figures 1 and 3 to 11 can be reproduced, not " + std::to_string(figure));
  }
}

}  // namespace cli
