#include "cpgait/torus.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "cpgait/csv.hpp"
#include "cpgait/error.hpp"
#include "cpgait/periodic.hpp"

namespace cpgait {

namespace {
constexpr const char* kModule = "torus-model";
}

TorusField TorusField::general(std::shared_ptr<const CouplingTable> h, const CouplingStrengths& c, double dw1,
                               double dw3, double eta) {
  if (!h) throw ConfigError("torus field needs a coupling table");
  c.validate();
  if (!(eta >= 0.0 && eta <= 1.0 / 6.0 + 1e-15)) throw ConfigError("eta must lie in [0, 1/6]");
  TorusField f;
  f.variant = TorusVariant::kGeneral;
  f.eta = eta;
  const double h_contra = (*h)(2.0 / 3.0 - eta);
  f.p4 = c(4), f.p5 = c(5), f.p6 = c(6), f.p7 = c(7);
  f.b1 = dw1 + (c(1) - c(2)) * h_contra;
  f.b2 = dw3 + (c(3) - c(2)) * h_contra;
  f.h = std::move(h);
  return f;
}

namespace {

TorusField alpha_form(std::shared_ptr<const CouplingTable> h, double alpha, double delta_i, double zbar, double eta,
                      TorusVariant variant) {
  if (!h) throw ConfigError("torus field needs a coupling table");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(zbar > 0.0)) throw ConfigError("alpha forms need a positive mean iPRC");
  TorusField f;
  f.variant = variant;
  f.h = std::move(h);
  f.alpha = alpha;
  f.heterogeneity = delta_i;
  f.eta = eta;
  f.p4 = alpha, f.p5 = 1.0, f.p6 = 1.0, f.p7 = 1.0 - alpha;
  const double shift = -alpha * delta_i * zbar;
  if (variant == TorusVariant::kAlphaForward) {
    f.b2 = shift;
  } else {
    f.b1 = shift;
  }
  return f;
}

}  // namespace

TorusField TorusField::alpha_forward(std::shared_ptr<const CouplingTable> h, double alpha, double delta_i,
                                     double zbar, double eta) {
  return alpha_form(std::move(h), alpha, delta_i, zbar, eta, TorusVariant::kAlphaForward);
}

TorusField TorusField::alpha_backward(std::shared_ptr<const CouplingTable> h, double alpha, double delta_i,
                                      double zbar, double eta) {
  return alpha_form(std::move(h), alpha, delta_i, zbar, eta, TorusVariant::kAlphaBackward);
}

double TorusField::scale() const {
  const double s = h->derivative_sup_norm() * (p4 + std::max(p5, p6) + p7);
  return s > 0.0 ? s : 1.0;
}

std::array<double, 2> torus_rhs(const TorusField& f, double t1, double t2) {
  const CouplingTable& h = *f.h;
  const double common = f.p4 * h(t1) + f.p7 * h(t2);
  return {f.b1 + f.p5 * h(-t1) - common, f.b2 + f.p6 * h(-t2) - common};
}

Eigen::Matrix2d torus_jacobian(const TorusField& f, double t1, double t2) {
  const CouplingTable& h = *f.h;
  const double d1 = h.derivative(t1), d2 = h.derivative(t2);
  Eigen::Matrix2d J;
  J << -f.p5 * h.derivative(-t1) - f.p4 * d1, -f.p7 * d2,
      -f.p4 * d1, -f.p6 * h.derivative(-t2) - f.p7 * d2;
  return J;
}

Eigen::Matrix2d torus_jacobian_fd(const TorusField& f, double t1, double t2, double step) {
  Eigen::Matrix2d J;
  const auto a = torus_rhs(f, t1 + step, t2), b = torus_rhs(f, t1 - step, t2);
  const auto c = torus_rhs(f, t1, t2 + step), d = torus_rhs(f, t1, t2 - step);
  J << (a[0] - b[0]) / (2 * step), (c[0] - d[0]) / (2 * step),
      (a[1] - b[1]) / (2 * step), (c[1] - d[1]) / (2 * step);
  return J;
}

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::kSink: return "sink";
    case PointClass::kSource: return "source";
    case PointClass::kSaddle: return "saddle";
    case PointClass::kNonhyperbolic: return "nonhyperbolic";
  }
  return "unknown";
}

namespace {

std::array<std::complex<double>, 2> eigenvalues(const Eigen::Matrix2d& J) {
  const double tr = J.trace(), det = J.determinant();
  const double disc = tr * tr - 4 * det;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    // Stable form for the smaller root.
    const double big = 0.5 * (tr + std::copysign(r, tr));
    const double small = big != 0.0 ? det / big : 0.0;
    return {std::complex<double>(std::max(big, small)), std::complex<double>(std::min(big, small))};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
}

PointClass class_of(const std::array<std::complex<double>, 2>& ev, double tol) {
  const double a = ev[0].real(), b = ev[1].real();
  if (std::abs(a) < tol || std::abs(b) < tol) return PointClass::kNonhyperbolic;
  if (a < 0 && b < 0) return PointClass::kSink;
  if (a > 0 && b > 0) return PointClass::kSource;
  return PointClass::kSaddle;
}

}  // namespace

std::string label_gait(double t1, double t2, double eta, double radius) {
  const std::pair<const char*, std::array<double, 2>> canon[] = {
      {"forward-tetrapod", {2.0 / 3.0, 1.0 / 3.0}},
      {"backward-tetrapod", {1.0 / 3.0, 2.0 / 3.0}},
      {"tripod", {0.5, 0.5}},
      {"forward-transition", {2.0 / 3.0 - eta, 1.0 / 3.0 + eta}},
      {"backward-transition", {1.0 / 3.0 + eta, 2.0 / 3.0 - eta}},
  };
  const char* best = nullptr;
  double best_d = radius;
  for (const auto& [name, p] : canon) {
    const double d = torus_distance(t1, t2, p[0], p[1]);
    if (d <= radius && (best == nullptr || d < best_d - 1e-12)) {
      best = name;
      best_d = d;
    }
  }
  return best ? best : "unclassified";
}

FixedPointRecord classify(const TorusField& f, double t1, double t2, const CensusOptions& opts) {
  FixedPointRecord r;
  r.theta1 = wrap_unit(t1);
  r.theta2 = wrap_unit(t2);
  r.jacobian = torus_jacobian(f, r.theta1, r.theta2);
  r.eigenvalues = eigenvalues(r.jacobian);
  r.cls = class_of(r.eigenvalues, opts.hyperbolic_tol);
  const auto fd = eigenvalues(torus_jacobian_fd(f, r.theta1, r.theta2));
  r.fd_agrees = class_of(fd, opts.hyperbolic_tol) == r.cls;
  r.gait = label_gait(r.theta1, r.theta2, f.eta, opts.label_radius);
  return r;
}

bool refine_fixed_point(const TorusField& f, double& t1, double& t2, double tol, std::size_t max_iter) {
  const double scale = f.scale();
  for (std::size_t it = 0; it < max_iter; ++it) {
    const auto F = torus_rhs(f, t1, t2);
    const Eigen::Matrix2d J = torus_jacobian(f, t1, t2);
    const double det = J.determinant();
    if (!(std::abs(det) > 1e-300)) return false;
    double s1 = (J(1, 1) * F[0] - J(0, 1) * F[1]) / det;
    double s2 = (-J(1, 0) * F[0] + J(0, 0) * F[1]) / det;
    const double len = std::max(std::abs(s1), std::abs(s2));
    if (len > 0.05) {  // damp long jumps so a seed stays in its basin
      s1 *= 0.05 / len;
      s2 *= 0.05 / len;
    }
    t1 -= s1;
    t2 -= s2;
    if (len < tol) {
      const auto G = torus_rhs(f, t1, t2);
      if (std::max(std::abs(G[0]), std::abs(G[1])) > 1e-9 * scale) return false;
      t1 = wrap_unit(t1);
      t2 = wrap_unit(t2);
      return true;
    }
  }
  const auto G = torus_rhs(f, t1, t2);
  if (std::max(std::abs(G[0]), std::abs(G[1])) < 1e-12 * scale) {
    t1 = wrap_unit(t1);
    t2 = wrap_unit(t2);
    return true;
  }
  return false;
}

std::size_t Census::count(PointClass c) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [c](const FixedPointRecord& r) { return r.cls == c; }));
}

long Census::euler() const {
  return static_cast<long>(sinks()) + static_cast<long>(sources()) - static_cast<long>(saddles());
}

std::string Census::summary() const {
  std::ostringstream s;
  s << sinks() << " sinks, " << sources() << " sources, " << saddles() << " saddles";
  if (nonhyperbolic() > 0) s << ", " << nonhyperbolic() << " nonhyperbolic";
  return s.str();
}

namespace {

/// Field components on the n x n grid, built from H tabulated at k/n.
struct GridValues {
  std::size_t n;
  std::vector<double> f1, f2;  // index j * n + i for (theta1, theta2) = (i, j) / n
};

GridValues grid_values(const TorusField& f, std::size_t n) {
  std::vector<double> hp(n), hm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = static_cast<double>(i) / static_cast<double>(n);
    hp[i] = (*f.h)(th);
    hm[i] = (*f.h)(-th);
  }
  GridValues g{n, std::vector<double>(n * n), std::vector<double>(n * n)};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double common = f.p4 * hp[i] + f.p7 * hp[j];
      g.f1[j * n + i] = f.b1 + f.p5 * hm[i] - common;
      g.f2[j * n + i] = f.b2 + f.p6 * hm[j] - common;
    }
  }
  return g;
}

/// Marching-squares segments of one component's zero level in cell (i, j).
/// Each segment endpoint is given as an edge id and a point in unwrapped
/// coordinates local to the cell.
struct EdgePoint {
  std::size_t edge;
  double x, y;
  double other;  // the other component interpolated at this point
};

struct Segment {
  EdgePoint a, b;
};

void cell_segments(const std::vector<double>& v, const std::vector<double>* other, std::size_t n, std::size_t i,
                   std::size_t j, std::vector<Segment>& out) {
  const std::size_t i1 = (i + 1) % n, j1 = (j + 1) % n;
  const double c[4] = {v[j * n + i], v[j * n + i1], v[j1 * n + i1], v[j1 * n + i]};  // 00, 10, 11, 01
  double o[4] = {0, 0, 0, 0};
  if (other) {
    o[0] = (*other)[j * n + i], o[1] = (*other)[j * n + i1], o[2] = (*other)[j1 * n + i1],
    o[3] = (*other)[j1 * n + i];
  }
  const double h = 1.0 / static_cast<double>(n);
  const double x0 = static_cast<double>(i) * h, y0 = static_cast<double>(j) * h;
  // Edges: 0 bottom (00-10), 1 right (10-11), 2 top (01-11), 3 left (00-01).
  const std::size_t ids[4] = {2 * (j * n + i), 2 * (j * n + i1) + 1, 2 * (j1 * n + i), 2 * (j * n + i) + 1};
  const int ends[4][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3}};
  const double ex[4][2][2] = {{{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}, {{0, 1}, {1, 1}}, {{0, 0}, {0, 1}}};
  auto pos = [](double a) { return a >= 0.0; };
  EdgePoint pts[4];
  bool has[4] = {false, false, false, false};
  for (int e = 0; e < 4; ++e) {
    const double va = c[ends[e][0]], vb = c[ends[e][1]];
    if (pos(va) == pos(vb)) continue;
    const double t = va / (va - vb);
    pts[e].edge = ids[e];
    pts[e].x = x0 + h * (ex[e][0][0] + t * (ex[e][1][0] - ex[e][0][0]));
    pts[e].y = y0 + h * (ex[e][0][1] + t * (ex[e][1][1] - ex[e][0][1]));
    pts[e].other = o[ends[e][0]] + t * (o[ends[e][1]] - o[ends[e][0]]);
    has[e] = true;
  }
  const int k = has[0] + has[1] + has[2] + has[3];
  if (k == 2) {
    int a = -1, b = -1;
    for (int e = 0; e < 4; ++e) {
      if (has[e]) (a < 0 ? a : b) = e;
    }
    out.push_back({pts[a], pts[b]});
  } else if (k == 4) {
    // Saddle cell: decide the pairing from the centre value.
    const bool centre_pos = pos(0.25 * (c[0] + c[1] + c[2] + c[3]));
    if (centre_pos == pos(c[0])) {
      out.push_back({pts[0], pts[1]});
      out.push_back({pts[2], pts[3]});
    } else {
      out.push_back({pts[0], pts[3]});
      out.push_back({pts[1], pts[2]});
    }
  }
}

}  // namespace

namespace {

Census census_on_grid(const TorusField& f, const CensusOptions& opts, std::size_t n) {
  const GridValues g = grid_values(f, n);
  Census census;
  std::vector<std::array<double, 2>> found;
  std::vector<Segment> segs;
  auto try_seed = [&](double x, double y) {
    ++census.seeds;
    double t1 = x, t2 = y;
    if (!refine_fixed_point(f, t1, t2, opts.newton_tol, opts.newton_max_iter)) {
      ++census.newton_failures;
      return;
    }
    for (const auto& p : found) {
      if (torus_distance(p[0], p[1], t1, t2) < opts.dedup_distance) return;
    }
    found.push_back({t1, t2});
  };
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      segs.clear();
      cell_segments(g.f1, &g.f2, n, i, j, segs);
      for (const Segment& s : segs) {
        if ((s.a.other >= 0.0) != (s.b.other >= 0.0)) {
          const double t = s.a.other / (s.a.other - s.b.other);
          try_seed(s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y));
        }
      }
    }
  }
  std::sort(found.begin(), found.end());
  for (const auto& p : found) census.points.push_back(classify(f, p[0], p[1], opts));
  census.grid = n;
  return census;
}

}  // namespace

Census find_fixed_points(const TorusField& f, const CensusOptions& opts) {
  if (opts.grid < 64) throw ConfigError("census grid must have at least 64 points per axis");
  std::size_t n = opts.grid;
  Census c = census_on_grid(f, opts, n);
  // Two roots sharing a cell leave one unseeded and break the index sum.
  // Nonhyperbolic points legitimately do that, so only retry without them.
  while (c.euler() != 0 && c.nonhyperbolic() == 0 && n * 2 <= opts.max_grid) {
    n *= 2;
    c = census_on_grid(f, opts, n);
  }
  return c;
}

NullclineSet nullclines(const TorusField& f, std::size_t grid) {
  if (grid < 8) throw ConfigError("nullcline grid too small");
  const GridValues g = grid_values(f, grid);
  NullclineSet out;
  for (int comp = 0; comp < 2; ++comp) {
    const std::vector<double>& v = comp == 0 ? g.f1 : g.f2;
    std::vector<Segment> segs;
    for (std::size_t j = 0; j < grid; ++j) {
      for (std::size_t i = 0; i < grid; ++i) cell_segments(v, nullptr, grid, i, j, segs);
    }
    // Chain segments through shared edge ids.
    std::unordered_map<std::size_t, std::vector<std::size_t>> by_edge;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      by_edge[segs[s].a.edge].push_back(s);
      by_edge[segs[s].b.edge].push_back(s);
    }
    std::vector<bool> used(segs.size(), false);
    auto wrapped = [](const EdgePoint& p) { return std::array<double, 2>{wrap_unit(p.x), wrap_unit(p.y)}; };
    std::vector<Polyline>& lines = comp == 0 ? out.theta1_zero : out.theta2_zero;
    auto walk = [&](std::size_t start, std::size_t start_edge) {
      std::vector<std::array<double, 2>> chain;
      std::size_t s = start;
      std::size_t edge = start_edge;
      const EdgePoint& first = segs[s].a.edge == edge ? segs[s].a : segs[s].b;
      chain.push_back(wrapped(first));
      while (!used[s]) {
        used[s] = true;
        const EdgePoint& far = segs[s].a.edge == edge ? segs[s].b : segs[s].a;
        chain.push_back(wrapped(far));
        edge = far.edge;
        std::size_t next = s;
        for (std::size_t cand : by_edge[edge]) {
          if (!used[cand]) next = cand;
        }
        if (next == s) break;
        s = next;
      }
      // Split at the fundamental-domain boundary, inserting the crossing points.
      Polyline cur;
      cur.points.push_back(chain.front());
      for (std::size_t k = 1; k < chain.size(); ++k) {
        const auto p = cur.points.back();
        const auto q = chain[k];
        const double dx = wrap_signed(q[0] - p[0]), dy = wrap_signed(q[1] - p[1]);
        const std::array<double, 2> qu{p[0] + dx, p[1] + dy};
        if (qu[0] >= 0.0 && qu[0] < 1.0 && qu[1] >= 0.0 && qu[1] < 1.0) {
          cur.points.push_back(q);
          continue;
        }
        double s_exit = 1.0;
        if (qu[0] >= 1.0 && dx > 0) s_exit = std::min(s_exit, (1.0 - p[0]) / dx);
        if (qu[0] < 0.0 && dx < 0) s_exit = std::min(s_exit, -p[0] / dx);
        if (qu[1] >= 1.0 && dy > 0) s_exit = std::min(s_exit, (1.0 - p[1]) / dy);
        if (qu[1] < 0.0 && dy < 0) s_exit = std::min(s_exit, -p[1] / dy);
        const std::array<double, 2> exit{p[0] + s_exit * dx, p[1] + s_exit * dy};
        cur.points.push_back(exit);
        if (cur.points.size() >= 2) lines.push_back(cur);
        cur.points.clear();
        cur.points.push_back({exit[0] - (qu[0] - q[0]), exit[1] - (qu[1] - q[1])});
        cur.points.push_back(q);
      }
      if (cur.points.size() >= 2) lines.push_back(cur);
    };
    for (std::size_t s = 0; s < segs.size(); ++s) {
      if (used[s]) continue;
      // Prefer an open end so open chains come out in one piece.
      std::size_t start_edge = segs[s].a.edge;
      if (by_edge[segs[s].a.edge].size() != 1 && by_edge[segs[s].b.edge].size() == 1) start_edge = segs[s].b.edge;
      walk(s, start_edge);
    }
  }
  return out;
}

std::vector<FlowSample> flow(const TorusField& f, double theta1, double theta2, double duration,
                             double sample_interval, const Tolerances& tol) {
  if (!(sample_interval > 0.0)) throw ConfigError("flow sample interval must be positive");
  const double sign = duration < 0.0 ? -1.0 : 1.0;
  const double span = std::abs(duration);
  auto rhs = [&](const State<2>& x, State<2>& d, double) {
    const auto F = torus_rhs(f, x[0], x[1]);
    d[0] = sign * F[0];
    d[1] = sign * F[1];
  };
  std::vector<FlowSample> out;
  out.push_back({0.0, wrap_unit(theta1), wrap_unit(theta2)});
  std::size_t next = 1;
  const State<2> end = integrate_dense<2>(
      rhs, State<2>{theta1, theta2}, 0.0, span, tol,
      [&](const auto& seg) {
        while (true) {
          const double t = sample_interval * static_cast<double>(next);
          if (t > std::min(seg.t_end(), span)) break;
          const State<2> x = seg(t);
          out.push_back({sign * t, wrap_unit(x[0]), wrap_unit(x[1])});
          ++next;
        }
        return true;
      },
      kModule);
  if (out.back().t != sign * span) out.push_back({sign * span, wrap_unit(end[0]), wrap_unit(end[1])});
  return out;
}

void write_census_csv(const Census& c, const std::string& path) {
  std::ostringstream out;
  out << "theta1,theta2,class,lambda1_re,lambda2_re,gait\n";
  for (const auto& p : c.points) {
    out << csv::num(p.theta1) << ',' << csv::num(p.theta2) << ',' << to_string(p.cls) << ','
        << csv::num(p.eigenvalues[0].real()) << ',' << csv::num(p.eigenvalues[1].real()) << ',' << p.gait << '\n';
  }
  csv::write_atomic(path, out.str());
}

void write_nullclines_csv(const NullclineSet& n, const std::string& path) {
  std::ostringstream out;
  out << "component,polyline,theta1,theta2\n";
  auto emit = [&](const std::vector<Polyline>& lines, int comp) {
    for (std::size_t k = 0; k < lines.size(); ++k) {
      for (const auto& p : lines[k].points) {
        out << comp << ',' << k << ',' << csv::num(p[0]) << ',' << csv::num(p[1]) << '\n';
      }
    }
  };
  emit(n.theta1_zero, 1);
  emit(n.theta2_zero, 2);
  csv::write_atomic(path, out.str());
}

}  // namespace cpgait
