#pragma once

#include <array>

#include <Eigen/Core>

#include "cpgait/network.hpp"
#include "cpgait/phase_reduction.hpp"
#include "cpgait/torus.hpp"

namespace cpgait {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// [[A, B], [B, A]] with A the ipsilateral pattern {0 c5 0; c4 0 c7; 0 c6 0}
/// and B = diag(c1, c2, c3). Row i lists the links into unit i.
Matrix6d equivalence_matrix(const CouplingStrengths& c);

/// c1 c2 c3 - c1 c6 c7 - c3 c4 c5; the matrix is singular iff this vanishes.
double singularity_factor(const CouplingStrengths& c);
/// -(c1 c2 c3 - c1 c6 c7 - c3 c4 c5)^2.
double det_closed_form(const CouplingStrengths& c);
/// Determinant by dense LU, for cross-checks.
double det_dense(const CouplingStrengths& c);

struct CouplingShifts {
  std::array<double, 6> dI{};
  double residual = 0.0;  // |C dI - I|
};

/// Per-link shifts dI_j that reproduce per-unit currents I^1..I^6. Throws
/// NumericalError(kSingular) when |singularity_factor| <= 1e-10.
CouplingShifts solve_dI(const CouplingStrengths& c, const std::array<double, 6>& currents);

struct ContralateralShift {
  std::array<double, 3> delta{};
  double h_contra = 0.0;  // H(2/3 - eta)
  /// Some |delta_i| > 0.1, no longer small next to unit couplings.
  bool large = false;
};

/// delta_i = omega_i / H(2/3 - eta) for the right legs. Throws
/// NumericalError(kSingular) when |H(2/3 - eta)| < 1e-10.
ContralateralShift contralateral_shift(const HeterogeneityShifts& shifts, const CouplingTable& h, double eta);

/// c with c1..c3 raised by delta.
CouplingStrengths shifted(const CouplingStrengths& c, const ContralateralShift& s);

/// Largest pointwise gap on an n x n grid between the general field with the
/// frequency shifts and the one with shifted couplings and no shifts.
double transport_mismatch(const CouplingTable& h, const CouplingStrengths& c, const HeterogeneityShifts& shifts,
                          double eta, std::size_t n = 64);

}  // namespace cpgait
