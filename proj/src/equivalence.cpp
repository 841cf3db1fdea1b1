#include "cpgait/equivalence.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <memory>

#include "cpgait/csv.hpp"
#include "cpgait/error.hpp"

namespace cpgait {

namespace {
constexpr const char* kModule = "equivalence";
}

Matrix6d equivalence_matrix(const CouplingStrengths& c) {
  Eigen::Matrix3d a, b;
  a << 0.0, c(5), 0.0,
      c(4), 0.0, c(7),
      0.0, c(6), 0.0;
  b = Eigen::Vector3d(c(1), c(2), c(3)).asDiagonal();
  Matrix6d m;
  m << a, b, b, a;
  return m;
}

double singularity_factor(const CouplingStrengths& c) {
  return c(1) * c(2) * c(3) - c(1) * c(6) * c(7) - c(3) * c(4) * c(5);
}

double det_closed_form(const CouplingStrengths& c) {
  const double x = singularity_factor(c);
  return -x * x;
}

double det_dense(const CouplingStrengths& c) { return equivalence_matrix(c).partialPivLu().determinant(); }

CouplingShifts solve_dI(const CouplingStrengths& c, const std::array<double, 6>& currents) {
  c.validate();
  const double x = singularity_factor(c);
  if (!(std::abs(x) > 1e-10)) {
    throw NumericalError(kModule, NumericalError::Reason::kSingular,
                         "c1 c2 c3 - c1 c6 c7 - c3 c4 c5 = " + csv::num(x) + ", no unique coupling shifts");
  }
  const Matrix6d m = equivalence_matrix(c);
  const Vector6d rhs = Eigen::Map<const Vector6d>(currents.data());
  const Vector6d d = m.partialPivLu().solve(rhs);
  CouplingShifts out;
  for (int i = 0; i < 6; ++i) out.dI[static_cast<std::size_t>(i)] = d(i);
  out.residual = (m * d - rhs).norm();
  return out;
}

ContralateralShift contralateral_shift(const HeterogeneityShifts& shifts, const CouplingTable& h, double eta) {
  ContralateralShift out;
  out.h_contra = h(2.0 / 3.0 - eta);
  if (!(std::abs(out.h_contra) >= 1e-10)) {
    throw NumericalError(kModule, NumericalError::Reason::kSingular,
                         "H(2/3 - eta) = " + csv::num(out.h_contra) + " is too small to absorb the shifts");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    out.delta[i] = shifts.omega[i] / out.h_contra;
    if (std::abs(out.delta[i]) > 0.1) out.large = true;
  }
  return out;
}

CouplingStrengths shifted(const CouplingStrengths& c, const ContralateralShift& s) {
  CouplingStrengths out = c;
  for (int i = 1; i <= 3; ++i) out(i) += s.delta[static_cast<std::size_t>(i - 1)];
  return out;
}

double transport_mismatch(const CouplingTable& h, const CouplingStrengths& c, const HeterogeneityShifts& shifts,
                          double eta, std::size_t n) {
  // Non-owning handle; both fields die before this frame returns.
  const std::shared_ptr<const CouplingTable> hp(std::shared_ptr<const CouplingTable>{}, &h);
  const auto& w = shifts.omega;
  const TorusField a = TorusField::general(hp, c, w[0] - w[1], w[2] - w[1], eta);
  const TorusField b = TorusField::general(hp, shifted(c, contralateral_shift(shifts, h, eta)), 0.0, 0.0, eta);
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t1 = static_cast<double>(i) / static_cast<double>(n);
      const double t2 = static_cast<double>(j) / static_cast<double>(n);
      const auto fa = torus_rhs(a, t1, t2), fb = torus_rhs(b, t1, t2);
      worst = std::max({worst, std::abs(fa[0] - fb[0]), std::abs(fa[1] - fb[1])});
    }
  }
  return worst;
}

}  // namespace cpgait
