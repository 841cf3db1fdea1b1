#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cpgait/network.hpp"
#include "cpgait/phase_reduction.hpp"

namespace cpgait {

enum class TorusVariant { kGeneral, kAlphaForward, kAlphaBackward };

/// Phase-difference field on the torus in the shared form
///   d theta1/dt = b1 + p5 H(-theta1) - p4 H(theta1) - p7 H(theta2)
///   d theta2/dt = b2 + p6 H(-theta2) - p4 H(theta1) - p7 H(theta2).
/// The general variant uses p = c and b from the frequency shifts and the
/// contralateral terms; the alpha variants use p5 = p6 = 1, p4 = alpha,
/// p7 = 1 - alpha and place -alpha dI zbar in b2 (forward) or b1 (backward).
struct TorusField {
  TorusVariant variant = TorusVariant::kGeneral;
  std::shared_ptr<const CouplingTable> h;
  double p4 = 1.0, p5 = 1.0, p6 = 1.0, p7 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double eta = 1.0 / 6.0;  // used for labels and for the contralateral terms
  double alpha = 0.5;      // alpha variants only
  double heterogeneity = 0.0;

  /// Couplings c1..c7 with frequency-shift differences (w1 - w2, w3 - w2).
  static TorusField general(std::shared_ptr<const CouplingTable> h, const CouplingStrengths& c, double dw1,
                            double dw3, double eta);
  static TorusField alpha_forward(std::shared_ptr<const CouplingTable> h, double alpha, double delta_i,
                                  double zbar, double eta);
  static TorusField alpha_backward(std::shared_ptr<const CouplingTable> h, double alpha, double delta_i,
                                   double zbar, double eta);

  /// Typical magnitude of the field's Jacobian, used to scale tolerances.
  double scale() const;
};

std::array<double, 2> torus_rhs(const TorusField& f, double theta1, double theta2);
Eigen::Matrix2d torus_jacobian(const TorusField& f, double theta1, double theta2);
Eigen::Matrix2d torus_jacobian_fd(const TorusField& f, double theta1, double theta2, double step = 1e-6);

enum class PointClass { kSink, kSource, kSaddle, kNonhyperbolic };
std::string to_string(PointClass c);

struct FixedPointRecord {
  double theta1 = 0.0, theta2 = 0.0;
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
  std::array<std::complex<double>, 2> eigenvalues{};
  PointClass cls = PointClass::kNonhyperbolic;
  /// Classification from the finite-difference Jacobian agrees.
  bool fd_agrees = true;
  std::string gait = "unclassified";
};

struct CensusOptions {
  std::size_t grid = 256;
  double newton_tol = 1e-13;
  std::size_t newton_max_iter = 60;
  double dedup_distance = 1e-7;
  /// |Re lambda| below this is reported as nonhyperbolic.
  double hyperbolic_tol = 1e-8;
  double label_radius = 0.1;
  /// Grid is doubled up to this size while the index sum is off.
  std::size_t max_grid = 4096;
};

struct Census {
  std::vector<FixedPointRecord> points;  // sorted by (theta1, theta2)
  std::size_t seeds = 0;
  std::size_t newton_failures = 0;
  std::size_t grid = 0;  // grid the census finally used

  std::size_t count(PointClass c) const;
  std::size_t sinks() const { return count(PointClass::kSink); }
  std::size_t sources() const { return count(PointClass::kSource); }
  std::size_t saddles() const { return count(PointClass::kSaddle); }
  std::size_t nonhyperbolic() const { return count(PointClass::kNonhyperbolic); }
  /// sinks + sources - saddles; zero for a generic field on the torus.
  long euler() const;
  std::string summary() const;
};

Census find_fixed_points(const TorusField& f, const CensusOptions& opts = {});

/// Newton's method from a seed; returns false if it does not converge.
bool refine_fixed_point(const TorusField& f, double& theta1, double& theta2, double tol = 1e-13,
                        std::size_t max_iter = 60);

FixedPointRecord classify(const TorusField& f, double theta1, double theta2, const CensusOptions& opts = {});

/// Canonical gait nearest to the point within `radius` (torus distance), else
/// "unclassified". Tetrapod and tripod win ties against transition points.
std::string label_gait(double theta1, double theta2, double eta, double radius = 0.1);

struct Polyline {
  std::vector<std::array<double, 2>> points;
};

struct NullclineSet {
  std::vector<Polyline> theta1_zero;
  std::vector<Polyline> theta2_zero;
};

/// Zero contours of each field component by marching squares on the periodic
/// grid. Polylines are split where they cross the fundamental domain edge.
NullclineSet nullclines(const TorusField& f, std::size_t grid = 256);

struct FlowSample {
  double t, theta1, theta2;
};

/// Integrates the field from a seed; negative duration runs time backwards.
/// Coordinates are reported wrapped to [0, 1).
std::vector<FlowSample> flow(const TorusField& f, double theta1, double theta2, double duration,
                             double sample_interval, const Tolerances& tol = {});

void write_census_csv(const Census& c, const std::string& path);
void write_nullclines_csv(const NullclineSet& n, const std::string& path);

}  // namespace cpgait
