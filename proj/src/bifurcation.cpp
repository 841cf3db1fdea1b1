#include "cpgait/bifurcation.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpgait/csv.hpp"
#include "cpgait/error.hpp"
#include "cpgait/parallel.hpp"
#include "cpgait/periodic.hpp"

namespace cpgait {

namespace {
constexpr const char* kModule = "bifurcation";

bool one_pair_apart(const CensusCounts& a, const CensusCounts& b) {
  if (a.nonhyperbolic || b.nonhyperbolic || a.euler() != 0 || b.euler() != 0) return false;
  const auto& big = a.total() > b.total() ? a : b;
  const auto& small = a.total() > b.total() ? b : a;
  if (big.total() != small.total() + 2) return false;
  if (big.saddles != small.saddles + 1) return false;
  return big.sinks >= small.sinks && big.sources >= small.sources;
}

// Closest pair among the points whose classes vanish between the counts.
std::array<std::size_t, 2> merging_pair(const Census& with, const CensusCounts& without) {
  const CensusCounts w = CensusCounts::of(with);
  const PointClass partner = w.sinks > without.sinks ? PointClass::kSink : PointClass::kSource;
  std::array<std::size_t, 2> best{0, 0};
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < with.points.size(); ++i) {
    if (with.points[i].cls != PointClass::kSaddle) continue;
    for (std::size_t j = 0; j < with.points.size(); ++j) {
      if (with.points[j].cls != partner) continue;
      const double d =
          torus_distance(with.points[i].theta1, with.points[i].theta2, with.points[j].theta1, with.points[j].theta2);
      if (d < best_d) {
        best_d = d;
        best = {i, j};
      }
    }
  }
  if (!std::isfinite(best_d)) {
    throw NumericalError(kModule, NumericalError::Reason::kInsufficientEvents, "no saddle/partner pair to follow");
  }
  return best;
}

struct Refiner {
  const FieldFamily& family;
  const SweepOptions& opts;

  Census census(double p) const { return find_fixed_points(family(p), opts.census); }

  void run(double lo, const Census& clo, double hi, const Census& chi, std::vector<BifurcationEvent>& out) const {
    const CensusCounts a = CensusCounts::of(clo), b = CensusCounts::of(chi);
    if (a == b) return;
    const double width = std::abs(hi - lo);
    if (width <= opts.event_width && one_pair_apart(a, b)) {
      BifurcationEvent e;
      e.lo = lo, e.hi = hi, e.before = a, e.after = b;
      try {
        e.fold = locate_saddle_node(family, lo, hi, opts);
        if (e.fold->degenerate) e.note = "trace vanishes with the determinant";
      } catch (const NumericalError& err) {
        e.note = err.what();
      }
      out.push_back(e);
      return;
    }
    if (width <= opts.ambiguous_width) {
      BifurcationEvent e;
      e.lo = lo, e.hi = hi, e.before = a, e.after = b;
      e.ambiguous = true;
      e.note = "census changes by more than one pair within " + csv::num(width);
      out.push_back(e);
      return;
    }
    const double mid = 0.5 * (lo + hi);
    const Census cm = census(mid);
    run(lo, clo, mid, cm, out);
    run(mid, cm, hi, chi, out);
  }
};

// Greedy one-to-one matching by torus distance; returns index pairs (a, b)
// whose classes differ.
std::vector<std::array<std::size_t, 2>> class_changes(const Census& a, const Census& b, double reach) {
  struct Cand {
    double d;
    std::size_t i, j;
  };
  std::vector<Cand> all;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    for (std::size_t j = 0; j < b.points.size(); ++j) {
      const double d = torus_distance(a.points[i].theta1, a.points[i].theta2, b.points[j].theta1, b.points[j].theta2);
      if (d < reach) all.push_back({d, i, j});
    }
  }
  std::sort(all.begin(), all.end(), [](const Cand& x, const Cand& y) { return x.d < y.d; });
  std::vector<bool> used_a(a.points.size()), used_b(b.points.size());
  std::vector<std::array<std::size_t, 2>> out;
  for (const auto& c : all) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    if (a.points[c.i].cls != b.points[c.j].cls) out.push_back({c.i, c.j});
  }
  return out;
}

// Both branches of a crossing report the same exchange; keep one.
void merge_exchanges(std::vector<BifurcationEvent>& list) {
  std::vector<BifurcationEvent> kept;
  for (auto& e : list) {
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const BifurcationEvent& k) {
      return std::abs(k.exchange->value - e.exchange->value) < 1e-6 * std::max(1.0, std::abs(e.exchange->value)) &&
             torus_distance(k.exchange->locus[0], k.exchange->locus[1], e.exchange->locus[0], e.exchange->locus[1]) <
                 1e-3;
    });
    if (!dup) kept.push_back(std::move(e));
  }
  std::sort(kept.begin(), kept.end(), [](const BifurcationEvent& x, const BifurcationEvent& y) {
    return std::abs(x.value() - x.lo) < std::abs(y.value() - y.lo);
  });
  list = std::move(kept);
}

}  // namespace

CensusCounts CensusCounts::of(const Census& c) {
  return {c.sinks(), c.sources(), c.saddles(), c.nonhyperbolic()};
}

std::string CensusCounts::summary() const {
  std::ostringstream s;
  s << sinks << " sinks, " << sources << " sources, " << saddles << " saddles";
  if (nonhyperbolic) s << ", " << nonhyperbolic << " nonhyperbolic";
  return s.str();
}

std::size_t SweepResult::exchanges() const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [](const BifurcationEvent& e) { return e.exchange.has_value(); }));
}

std::size_t SweepResult::folds() const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const BifurcationEvent& e) {
    return !e.ambiguous && e.fold && !e.fold->degenerate;
  }));
}

SweepResult sweep(const FieldFamily& family, const std::string& parameter, const std::vector<double>& grid,
                  const SweepOptions& opts) {
  if (grid.size() < 2) throw ConfigError("sweep grid needs at least two values");
  const bool up = grid[1] > grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!((grid[i] > grid[i - 1]) == up) || grid[i] == grid[i - 1]) {
      throw ConfigError("sweep grid for '" + parameter + "' is not strictly monotone");
    }
  }
  SweepResult r;
  r.parameter = parameter;
  r.grid = grid;
  r.censuses.resize(grid.size());
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    r.censuses[i] = find_fixed_points(family(grid[i]), opts.census);
  });
  std::vector<std::size_t> changes;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool counts = !(CensusCounts::of(r.censuses[i - 1]) == CensusCounts::of(r.censuses[i]));
    if (counts || !class_changes(r.censuses[i - 1], r.censuses[i], opts.match_reach).empty()) changes.push_back(i);
  }
  std::vector<std::vector<BifurcationEvent>> found(changes.size());
  const Refiner refiner{family, opts};
  parallel_for(changes.size(), opts.threads, [&](std::size_t k) {
    const std::size_t i = changes[k];
    const Census &a = r.censuses[i - 1], &b = r.censuses[i];
    if (!(CensusCounts::of(a) == CensusCounts::of(b))) {
      refiner.run(grid[i - 1], a, grid[i], b, found[k]);
      return;
    }
    for (const auto& m : class_changes(a, b, opts.match_reach)) {
      BifurcationEvent e;
      e.lo = grid[i - 1], e.hi = grid[i];
      e.before = e.after = CensusCounts::of(a);
      try {
        e.exchange = locate_exchange(family, grid[i - 1], grid[i], {a.points[m[0]].theta1, a.points[m[0]].theta2}, opts);
      } catch (const NumericalError& err) {
        e.note = err.what();
        found[k].push_back(e);
        continue;
      }
      found[k].push_back(e);
    }
    std::vector<BifurcationEvent> ex, rest;
    for (auto& e : found[k]) (e.exchange ? ex : rest).push_back(std::move(e));
    merge_exchanges(ex);
    // the partner branch of a resolved crossing often cannot be followed alone
    found[k] = ex.empty() ? std::move(rest) : std::move(ex);
  });
  for (auto& list : found) {
    for (auto& e : list) r.events.push_back(std::move(e));
  }
  return r;
}

StabilityExchange locate_exchange(const FieldFamily& family, double from, double to, std::array<double, 2> locus,
                                  const SweepOptions& opts) {
  double t1 = locus[0], t2 = locus[1];
  if (!refine_fixed_point(family(from), t1, t2, opts.census.newton_tol, 200)) {
    throw NumericalError(kModule, NumericalError::Reason::kNoConvergence, "exchange seed does not converge");
  }
  const PointClass start = classify(family(from), t1, t2, opts.census).cls;
  // the class at `to` along the continued point
  auto follow = [&](double x, double& q1, double& q2) {
    q1 = t1, q2 = t2;
    if (!refine_fixed_point(family(x), q1, q2, opts.census.newton_tol, 200) ||
        torus_distance(q1, q2, t1, t2) > opts.match_reach) {
      throw NumericalError(kModule, NumericalError::Reason::kNoConvergence,
                           "point lost while following it to " + csv::num(x));
    }
    return classify(family(x), q1, q2, opts.census).cls;
  };
  double lo = from, hi = to, q1 = 0, q2 = 0;
  PointClass end = follow(hi, q1, q2);
  if (end == start) {
    throw NumericalError(kModule, NumericalError::Reason::kInsufficientEvents,
                         "class does not change along the followed point");
  }
  const double stop = opts.pair_width * std::max(1.0, std::abs(lo));
  while (std::abs(hi - lo) > stop) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const PointClass c = follow(mid, q1, q2);
    if (c == start) {
      lo = mid, t1 = q1, t2 = q2;
    } else {
      hi = mid;
      // right at the crossing the class reads nonhyperbolic; keep the far side's
      if (c != PointClass::kNonhyperbolic) end = c;
    }
  }
  const TorusField f = family(lo);
  const Eigen::Matrix2d J = torus_jacobian(f, t1, t2);
  const double scale = f.scale();
  StabilityExchange out;
  out.value = 0.5 * (lo + hi);
  out.width = std::abs(hi - lo);
  out.locus = {t1, t2};
  out.from = start;
  out.to = end;
  out.det_normalized = J.determinant() / (scale * scale);
  out.trace_normalized = J.trace() / scale;
  return out;
}

SaddleNode locate_saddle_node(const FieldFamily& family, double from, double to, const SweepOptions& opts) {
  Census cf = find_fixed_points(family(from), opts.census);
  Census ct = find_fixed_points(family(to), opts.census);
  CensusCounts a = CensusCounts::of(cf), b = CensusCounts::of(ct);
  if (!one_pair_apart(a, b)) {
    throw NumericalError(kModule, NumericalError::Reason::kInsufficientEvents,
                         "bracket ends differ by more than one pair (" + a.summary() + " vs " + b.summary() + ")");
  }
  // Orient so that `with` holds the pair.
  double with = from, without = to;
  Census cw = std::move(cf);
  CensusCounts cwo = b;
  if (b.total() > a.total()) {
    with = to, without = from;
    cw = std::move(ct);
    cwo = a;
  }
  const auto idx = merging_pair(cw, cwo);
  double p1[2] = {cw.points[idx[0]].theta1, cw.points[idx[0]].theta2};
  double p2[2] = {cw.points[idx[1]].theta1, cw.points[idx[1]].theta2};
  SaddleNode out;
  out.first = cw.points[idx[0]].cls;
  out.second = cw.points[idx[1]].cls;

  // Newton continuation of the pair; true moves p1, p2 to parameter x.
  auto pair_at = [&](double x) {
    const TorusField f = family(x);
    double q1[2] = {p1[0], p1[1]}, q2[2] = {p2[0], p2[1]};
    const double sep = torus_distance(p1[0], p1[1], p2[0], p2[1]);
    if (!refine_fixed_point(f, q1[0], q1[1], opts.census.newton_tol, 200) ||
        !refine_fixed_point(f, q2[0], q2[1], opts.census.newton_tol, 200)) {
      return false;
    }
    const double reach = 4.0 * sep + 1e-6;
    if (!(torus_distance(q1[0], q1[1], q2[0], q2[1]) > 1e-10 && torus_distance(q1[0], q1[1], p1[0], p1[1]) < reach &&
          torus_distance(q2[0], q2[1], p2[0], p2[1]) < reach)) {
      return false;
    }
    // Both can land near the same root when the pair is gone; a saddle and
    // its partner keep opposite determinant signs.
    const double d1 = torus_jacobian(f, q1[0], q1[1]).determinant();
    const double d2 = torus_jacobian(f, q2[0], q2[1]).determinant();
    if ((d1 < 0.0) == (d2 < 0.0)) return false;
    p1[0] = q1[0], p1[1] = q1[1], p2[0] = q2[0], p2[1] = q2[1];
    return true;
  };

  // A pair closer than a grid cell can slip between census seeds, so the
  // census may drop it early. Walk on while Newton still finds it.
  double step = without - with;
  for (int k = 0; k < 60 && pair_at(without); ++k) {
    with = without;
    without += step;
    step *= 2.0;
  }
  const double stop = opts.pair_width * std::max(1.0, std::abs(with));
  while (std::abs(with - without) > stop) {
    const double mid = 0.5 * (with + without);
    if (mid == with || mid == without) break;
    if (pair_at(mid)) {
      with = mid;
    } else {
      without = mid;
    }
  }
  const TorusField f = family(with);
  // Midpoint across the wrap.
  const double m1 = wrap_unit(p1[0] + 0.5 * wrap_signed(p2[0] - p1[0]));
  const double m2 = wrap_unit(p1[1] + 0.5 * wrap_signed(p2[1] - p1[1]));
  const Eigen::Matrix2d J = torus_jacobian(f, m1, m2);
  const double scale = f.scale();
  out.value = 0.5 * (with + without);
  out.width = std::abs(with - without);
  out.locus = {m1, m2};
  out.separation = torus_distance(p1[0], p1[1], p2[0], p2[1]);
  out.det_normalized = J.determinant() / (scale * scale);
  out.trace_normalized = J.trace() / scale;
  out.degenerate = std::abs(out.trace_normalized) < opts.trace_floor;
  if (std::abs(out.det_normalized) > opts.det_tol) {
    throw NumericalError(kModule, NumericalError::Reason::kDegenerate,
                         "determinant stays at " + csv::num(out.det_normalized) + " where the pair merges");
  }
  return out;
}

Branch trace_branch(const FieldFamily& family, const std::vector<double>& grid, std::array<double, 2> seed,
                    const BranchOptions& opts) {
  if (grid.empty()) throw ConfigError("branch grid is empty");
  Branch b;
  double t1 = seed[0], t2 = seed[1];
  if (!refine_fixed_point(family(grid[0]), t1, t2, opts.census.newton_tol, opts.census.newton_max_iter)) {
    throw NumericalError(kModule, NumericalError::Reason::kNoConvergence, "seed does not converge to a fixed point");
  }
  b.points.push_back({grid[0], classify(family(grid[0]), t1, t2, opts.census), false});
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double p = grid[i - 1];
    const double target = grid[i];
    double step = target - p;
    std::size_t halvings = 0;
    while (p != target) {
      const double next = std::abs(step) >= std::abs(target - p) ? target : p + step;
      double q1 = t1, q2 = t2;
      const bool ok = refine_fixed_point(family(next), q1, q2, opts.census.newton_tol, opts.census.newton_max_iter) &&
                      torus_distance(q1, q2, t1, t2) < opts.max_jump;
      if (ok) {
        p = next, t1 = q1, t2 = q2;
        step *= 2.0;
        continue;
      }
      if (++halvings > opts.max_halvings) {
        b.lost = true;
        b.lost_at = next;
        b.message = "branch lost near " + csv::num(next) + " after " + std::to_string(opts.max_halvings) +
                    " step halvings";
        return b;
      }
      step *= 0.5;
    }
    BranchPoint bp{target, classify(family(target), t1, t2, opts.census), false};
    bp.class_changed = bp.point.cls != b.points.back().point.cls;
    b.points.push_back(bp);
  }
  return b;
}

void write_sweep_csv(const SweepResult& r, const std::string& path) {
  std::ostringstream out;
  out << r.parameter << ",n_sink,n_source,n_saddle,n_nonhyperbolic\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const auto c = CensusCounts::of(r.censuses[i]);
    out << csv::num(r.grid[i]) << ',' << c.sinks << ',' << c.sources << ',' << c.saddles << ',' << c.nonhyperbolic
        << '\n';
  }
  csv::write_atomic(path, out.str());
}

void write_events_csv(const SweepResult& r, const std::string& path) {
  std::ostringstream out;
  out << "value,lo,hi,type,pair,theta1,theta2,det_normalized,trace_normalized,before,after\n";
  for (const auto& e : r.events) {
    std::string type = e.ambiguous   ? "ambiguous"
                       : e.exchange ? "exchange"
                       : !e.fold    ? "unresolved"
                       : e.fold->degenerate ? "degenerate"
                                            : "saddle-node";
    out << csv::num(e.value()) << ',' << csv::num(e.lo) << ',' << csv::num(e.hi) << ',' << type << ',';
    if (e.fold) {
      out << to_string(e.fold->first) << '+' << to_string(e.fold->second) << ',' << csv::num(e.fold->locus[0]) << ','
          << csv::num(e.fold->locus[1]) << ',' << csv::num(e.fold->det_normalized) << ','
          << csv::num(e.fold->trace_normalized);
    } else if (e.exchange) {
      out << to_string(e.exchange->from) << '>' << to_string(e.exchange->to) << ',' << csv::num(e.exchange->locus[0])
          << ',' << csv::num(e.exchange->locus[1]) << ',' << csv::num(e.exchange->det_normalized) << ','
          << csv::num(e.exchange->trace_normalized);
    } else {
      out << ",,,,";
    }
    out << ',' << e.before.sinks << '/' << e.before.sources << '/' << e.before.saddles << ',' << e.after.sinks << '/'
        << e.after.sources << '/' << e.after.saddles << '\n';
  }
  csv::write_atomic(path, out.str());
}

void write_branch_csv(const Branch& b, const std::string& parameter, const std::string& path) {
  std::ostringstream out;
  out << parameter << ",theta1,theta2,class,gait\n";
  for (const auto& p : b.points) {
    out << csv::num(p.value) << ',' << csv::num(p.point.theta1) << ',' << csv::num(p.point.theta2) << ','
        << to_string(p.point.cls) << ',' << p.point.gait << '\n';
  }
  if (b.lost) out << "# " << b.message << '\n';
  csv::write_atomic(path, out.str());
}

}  // namespace cpgait
