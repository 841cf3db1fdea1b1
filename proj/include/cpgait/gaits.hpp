#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "cpgait/network.hpp"
#include "cpgait/phase_reduction.hpp"

namespace cpgait {

enum class GaitKind {
  kFR,
  kFL,
  kBR,
  kBL,
  kTripod,
  kTransitionFR,
  kTransitionFL,
  kTransitionBR,
  kTransitionBL,
};

/// Relative leg phases of a gait: right legs at psi1..psi3, left legs shifted by psi.
struct GaitTemplate {
  GaitKind kind = GaitKind::kTripod;
  double eta = 1.0 / 6.0;
  double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0, psi = 0.0;

  /// Builds the template; eta only matters for transition kinds.
  static GaitTemplate make(GaitKind kind, double eta = 1.0 / 6.0);
  /// Position on the torus, (psi1 - psi2, psi3 - psi2) wrapped to [0, 1).
  std::array<double, 2> torus_point() const;
  /// Six absolute leg phases at t = 0 (right front first).
  std::array<double, 6> leg_phases() const;
};

/// "fr", "fl", "br", "bl", "tripod", "fr-eta", "fl-eta", "br-eta", "bl-eta".
GaitKind parse_gait_kind(const std::string& name);
std::string to_string(GaitKind kind);

/// 3x3 matrix mapping phase perturbations to frequency shifts; its rows sum to zero.
Eigen::Matrix3d build_L(const GaitTemplate& g, const CouplingTable& h, const CouplingStrengths& c);

/// Moore-Penrose inverse by SVD, singular values below rcond * sigma_max dropped.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rcond = 1e-12);

struct PhasePerturbation {
  std::array<double, 3> delta{};
  /// |delta_i| < 0.05: the first-order expansion behind L is still credible.
  bool valid = true;
  double residual = 0.0;  // |L delta - omega_tilde|
};

PhasePerturbation delta_shifts(const Eigen::Matrix3d& L, const std::array<double, 3>& omega_tilde,
                               double validity_limit = 0.05);

struct CoupledFrequency {
  double omega_hat = 0.0;
  /// Largest gap among the three per-leg expressions.
  double discrepancy = 0.0;
};

/// Shared stepping frequency of the locked gait. Throws
/// NumericalError(kInconsistency) when the three expressions disagree by more than tol.
CoupledFrequency coupled_frequency(const GaitTemplate& g, const CouplingTable& h, const CouplingStrengths& c,
                                   double omega, double tol = 1e-6);

}  // namespace cpgait
