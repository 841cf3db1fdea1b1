#include "cpgait/gaits.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "cpgait/error.hpp"
#include "cpgait/periodic.hpp"

namespace cpgait {

GaitTemplate GaitTemplate::make(GaitKind kind, double eta) {
  constexpr double third = 1.0 / 3.0, two_thirds = 2.0 / 3.0;
  if (!(eta >= 0.0 && eta <= 1.0 / 6.0 + 1e-15)) throw ConfigError("eta must lie in [0, 1/6]");
  GaitTemplate g;
  g.kind = kind;
  g.eta = eta;
  double e = 0.0;
  switch (kind) {
    case GaitKind::kTransitionFR:
    case GaitKind::kTransitionFL:
    case GaitKind::kTransitionBR:
    case GaitKind::kTransitionBL:
      e = eta;
      break;
    default:
      g.eta = 0.0;
      break;
  }
  const double hi = two_thirds - e;  // 2/3 - eta
  const double lo = third + e;       // 1/3 + eta
  switch (kind) {
    case GaitKind::kFR:
    case GaitKind::kTransitionFR:
      g.psi1 = hi, g.psi3 = lo, g.psi = hi;
      break;
    case GaitKind::kFL:
    case GaitKind::kTransitionFL:
      g.psi1 = hi, g.psi3 = lo, g.psi = lo;
      break;
    case GaitKind::kBR:
    case GaitKind::kTransitionBR:
      g.psi1 = lo, g.psi3 = hi, g.psi = lo;
      break;
    case GaitKind::kBL:
    case GaitKind::kTransitionBL:
      g.psi1 = lo, g.psi3 = hi, g.psi = hi;
      break;
    case GaitKind::kTripod:
      g.psi1 = 0.5, g.psi3 = 0.5, g.psi = 0.5;
      g.eta = 1.0 / 6.0;
      break;
  }
  g.psi2 = 0.0;
  return g;
}

std::array<double, 2> GaitTemplate::torus_point() const {
  return {wrap_unit(psi1 - psi2), wrap_unit(psi3 - psi2)};
}

std::array<double, 6> GaitTemplate::leg_phases() const {
  return {wrap_unit(psi1), wrap_unit(psi2), wrap_unit(psi3),
          wrap_unit(psi1 + psi), wrap_unit(psi2 + psi), wrap_unit(psi3 + psi)};
}

GaitKind parse_gait_kind(const std::string& name) {
  static const std::pair<const char*, GaitKind> names[] = {
      {"fr", GaitKind::kFR},
      {"fl", GaitKind::kFL},
      {"br", GaitKind::kBR},
      {"bl", GaitKind::kBL},
      {"tripod", GaitKind::kTripod},
      {"fr-eta", GaitKind::kTransitionFR},
      {"fl-eta", GaitKind::kTransitionFL},
      {"br-eta", GaitKind::kTransitionBR},
      {"bl-eta", GaitKind::kTransitionBL},
  };
  for (const auto& [n, k] : names) {
    if (name == n) return k;
  }
  throw ConfigError("unknown gait '" + name + "'");
}

std::string to_string(GaitKind kind) {
  switch (kind) {
    case GaitKind::kFR: return "fr";
    case GaitKind::kFL: return "fl";
    case GaitKind::kBR: return "br";
    case GaitKind::kBL: return "bl";
    case GaitKind::kTripod: return "tripod";
    case GaitKind::kTransitionFR: return "fr-eta";
    case GaitKind::kTransitionFL: return "fl-eta";
    case GaitKind::kTransitionBR: return "br-eta";
    case GaitKind::kTransitionBL: return "bl-eta";
  }
  return "unknown";
}

Eigen::Matrix3d build_L(const GaitTemplate& g, const CouplingTable& h, const CouplingStrengths& c) {
  const double d21 = h.derivative(g.psi2 - g.psi1);
  const double d12 = h.derivative(g.psi1 - g.psi2);
  const double d32 = h.derivative(g.psi3 - g.psi2);
  const double d23 = h.derivative(g.psi2 - g.psi3);
  Eigen::Matrix3d L;
  L << c(5) * d21, -c(5) * d21, 0.0,
      -c(4) * d12, c(4) * d12 + c(7) * d32, -c(7) * d32,
      0.0, -c(6) * d23, c(6) * d23;
  return L;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rcond) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rcond * s(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV().leftCols(s.size()) * inv.asDiagonal() * svd.matrixU().leftCols(s.size()).transpose();
}

PhasePerturbation delta_shifts(const Eigen::Matrix3d& L, const std::array<double, 3>& omega_tilde,
                               double validity_limit) {
  const Eigen::Vector3d w(omega_tilde[0], omega_tilde[1], omega_tilde[2]);
  const Eigen::Vector3d d = pseudo_inverse(L) * w;
  PhasePerturbation out;
  for (int i = 0; i < 3; ++i) {
    out.delta[static_cast<std::size_t>(i)] = d(i);
    if (std::abs(d(i)) >= validity_limit) out.valid = false;
  }
  out.residual = (L * d - w).norm();
  return out;
}

CoupledFrequency coupled_frequency(const GaitTemplate& g, const CouplingTable& h, const CouplingStrengths& c,
                                   double omega, double tol) {
  const double hpsi = h(g.psi);
  const double e1 = omega + c(1) * hpsi + c(5) * h(g.psi2 - g.psi1);
  const double e2 = omega + c(2) * hpsi + c(4) * h(g.psi1 - g.psi2) + c(7) * h(g.psi3 - g.psi2);
  const double e3 = omega + c(3) * hpsi + c(6) * h(g.psi2 - g.psi3);
  CoupledFrequency out;
  out.omega_hat = e1;
  out.discrepancy = std::max({std::abs(e1 - e2), std::abs(e2 - e3), std::abs(e1 - e3)});
  if (out.discrepancy > tol) {
    throw NumericalError("gaits", NumericalError::Reason::kInconsistency,
                         "coupled-frequency expressions disagree by " + std::to_string(out.discrepancy) +
                             " (balance condition or eta violated)");
  }
  return out;
}

}  // namespace cpgait
