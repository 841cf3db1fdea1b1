#include "cpgait/pipeline.hpp"

#include <cmath>

#include "cpgait/error.hpp"

namespace cpgait {

std::shared_ptr<const CouplingTable> fourier_table(const FourierCoupling& f) {
  constexpr double tau = 2.0 * M_PI;
  const std::size_t n = std::max(f.cos.size(), f.sin.size());
  auto coef = [&](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; };
  auto eval = [&, n](double x, int order) {
    double s = order == 0 ? f.mean : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double w = tau * static_cast<double>(k + 1);
      const double a = coef(f.cos, k), b = coef(f.sin, k);
      const double c = std::cos(w * x), sn = std::sin(w * x);
      switch (order) {
        case 0: s += a * c + b * sn; break;
        case 1: s += w * (-a * sn + b * c); break;
        default: s += -w * w * (a * c + b * sn); break;
      }
    }
    return s;
  };
  return std::make_shared<CouplingTable>(CouplingTable::from_function(
      [&](double x) { return eval(x, 0); }, [&](double x) { return eval(x, 1); },
      [&](double x) { return eval(x, 2); }, f.points));
}

ReductionOptions reduction_options(const RunConfig& cfg) {
  ReductionOptions o;
  o.cycle.grid_size = cfg.orbit_grid;
  o.cycle.tol = Tolerances{cfg.rel_tol, cfg.abs_tol};
  o.adjoint.tol = Tolerances{cfg.rel_tol, cfg.abs_tol};
  return o;
}

PhaseModel phase_model(const RunConfig& cfg, std::optional<double> i_ext) {
  PhaseModel m;
  m.i_ext = i_ext.value_or(cfg.neuron.i_ext);
  if (cfg.coupling_override) {
    m.synthetic = true;
    m.h = fourier_table(*cfg.coupling_override);
    m.zbar = cfg.coupling_override->zbar;
  } else {
    NeuronParams p = cfg.neuron;
    p.i_ext = m.i_ext;
    const Reduction r = reduce(p, reduction_options(cfg));
    m.period = r.period;
    m.zbar = r.zbar;
    m.h = r.table;
  }
  m.eta = solve_eta(*m.h);
  return m;
}

HeterogeneityShifts frequency_shifts(const RunConfig& cfg, double delta_i, double zbar) {
  HeterogeneityShifts s;
  s.zbar = zbar;
  std::array<double, 6> current{};
  switch (cfg.hetero) {
    case HeteroMode::kNone: break;
    case HeteroMode::kForward: current = {delta_i, delta_i, 0.0, delta_i, delta_i, 0.0}; break;
    case HeteroMode::kBackward: current = {0.0, delta_i, delta_i, 0.0, delta_i, delta_i}; break;
    case HeteroMode::kCurrents: current = cfg.currents; break;
  }
  for (std::size_t i = 0; i < 6; ++i) s.omega[i] = current[i] * zbar;
  return s;
}

TorusField torus_field(const RunConfig& cfg, const PhaseModel& m, double delta_i, std::optional<double> alpha) {
  if (!alpha && cfg.alpha) alpha = cfg.alpha;
  if (alpha) {
    switch (cfg.hetero) {
      case HeteroMode::kNone: return TorusField::alpha_forward(m.h, *alpha, 0.0, m.zbar, m.eta.eta);
      case HeteroMode::kForward: return TorusField::alpha_forward(m.h, *alpha, delta_i, m.zbar, m.eta.eta);
      case HeteroMode::kBackward: return TorusField::alpha_backward(m.h, *alpha, delta_i, m.zbar, m.eta.eta);
      case HeteroMode::kCurrents:
        throw ConfigError("couplings.alpha takes heterogeneity mode none, forward or backward");
    }
  }
  const auto w = frequency_shifts(cfg, delta_i, m.zbar).omega;
  TorusField f = TorusField::general(m.h, cfg.couplings(), w[0] - w[1], w[2] - w[1], m.eta.eta);
  f.heterogeneity = delta_i;
  return f;
}

std::shared_ptr<const PhaseModel> PhaseModelCache::at(double i_ext) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = models_.find(i_ext);
    if (it != models_.end()) return it->second;
  }
  // Computed outside the lock; a duplicate computation is harmless.
  auto m = std::make_shared<const PhaseModel>(phase_model(cfg_, i_ext));
  std::lock_guard<std::mutex> lock(mu_);
  return models_.emplace(i_ext, std::move(m)).first->second;
}

FieldFamily field_family(const RunConfig& cfg, const std::string& parameter, std::shared_ptr<PhaseModelCache> cache) {
  if (parameter == "i_ext") {
    if (!cache) cache = std::make_shared<PhaseModelCache>(cfg);
    return [cfg, cache](double x) { return torus_field(cfg, *cache->at(x), cfg.delta_i); };
  }
  auto m = std::make_shared<const PhaseModel>(phase_model(cfg));
  if (parameter == "delta_i") {
    if (cfg.hetero == HeteroMode::kNone || cfg.hetero == HeteroMode::kCurrents) {
      throw ConfigError("a delta_i scan needs heterogeneity mode forward or backward");
    }
    return [cfg, m](double x) { return torus_field(cfg, *m, x); };
  }
  if (parameter == "alpha") {
    return [cfg, m](double x) { return torus_field(cfg, *m, cfg.delta_i, x); };
  }
  throw ConfigError("unknown scan parameter '" + parameter + "'");
}

}  // namespace cpgait
