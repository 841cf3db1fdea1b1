#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "cpgait/bifurcation.hpp"
#include "cpgait/equivalence.hpp"
#include "cpgait/error.hpp"
#include "helpers.hpp"

using namespace cpgait;

namespace {

// 6x6 matrix assembled from the wiring table: row i collects c_k for each link into unit i.
Matrix6d from_wiring(const CouplingStrengths& c) {
  Matrix6d m = Matrix6d::Zero();
  for (int leg = 1; leg <= 6; ++leg) {
    for (const Link& l : network_inputs(leg)) m(leg - 1, l.from - 1) += c(l.coupling);
  }
  return m;
}

CouplingStrengths random_couplings(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  CouplingStrengths c;
  for (auto& x : c.c) x = u(rng);
  return c;
}

}  // namespace

TEST_CASE("matrix follows the network wiring") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const auto c = random_couplings(rng);
    CHECK((equivalence_matrix(c) - from_wiring(c)).norm() == 0.0);
  }
}

TEST_CASE("closed-form determinant against dense factorization") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto c = random_couplings(rng);
    const double dense = from_wiring(c).determinant();
    const double closed = det_closed_form(c);
    // skip draws so close to singular that the relative error is meaningless
    if (std::abs(dense) < 1e-8) continue;
    worst = std::max(worst, std::abs(closed - dense) / std::abs(dense));
    // block identity det C = det(A - B) det(A + B)
    const Eigen::Matrix3d A = from_wiring(c).topLeftCorner<3, 3>(), B = from_wiring(c).topRightCorner<3, 3>();
    CHECK((A - B).determinant() * (A + B).determinant() == doctest::Approx(dense).epsilon(1e-10));
  }
  CHECK(worst < 1e-10);
  CHECK(det_dense(CouplingStrengths::example_balanced()) ==
        doctest::Approx(det_closed_form(CouplingStrengths::example_balanced())).epsilon(1e-12));
}

TEST_CASE("example couplings") {
  const auto c = CouplingStrengths::example_balanced();
  const double x = c(1) * c(2) * c(3) - c(1) * c(6) * c(7) - c(3) * c(4) * c(5);
  CHECK(singularity_factor(c) == doctest::Approx(x));
  CHECK(x == doctest::Approx(-1.294).epsilon(1e-3));
  CHECK(det_dense(c) == doctest::Approx(-1.674).epsilon(1e-3));
}

TEST_CASE("constructed singular configuration") {
  CouplingStrengths c;
  c.c = {1, 1, 1, 1, 0.5, std::sqrt(0.5), std::sqrt(0.5)};
  CHECK(std::abs(singularity_factor(c)) < 1e-14);
  CHECK(std::abs(det_dense(c)) < 1e-12);
  try {
    solve_dI(c, {0.1, 0, 0, 0.1, 0, 0});
    FAIL("expected a singular configuration");
  } catch (const NumericalError& e) {
    CHECK(e.reason() == NumericalError::Reason::kSingular);
  }
}

TEST_CASE("solve_dI") {
  const auto c = CouplingStrengths::example_balanced();
  SUBCASE("zero currents") {
    const auto s = solve_dI(c, {});
    for (double d : s.dI) CHECK(d == 0.0);
  }
  SUBCASE("unit 1 is rebuilt from its two inputs") {
    const std::array<double, 6> I{0.02, 0.01, -0.03, 0.015, 0.0, 0.04};
    const auto s = solve_dI(c, I);
    CHECK(c(5) * s.dI[1] + c(1) * s.dI[3] == doctest::Approx(I[0]).epsilon(1e-12));
  }
  SUBCASE("round trip on random draws") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    int done = 0;
    while (done < 200) {
      const auto cc = random_couplings(rng);
      if (std::abs(singularity_factor(cc)) < 1e-3) continue;
      std::array<double, 6> I;
      for (auto& x : I) x = u(rng);
      const auto s = solve_dI(cc, I);
      Vector6d dv, iv;
      for (int k = 0; k < 6; ++k) dv(k) = s.dI[static_cast<std::size_t>(k)], iv(k) = I[static_cast<std::size_t>(k)];
      CHECK((from_wiring(cc) * dv - iv).norm() < 1e-10 * iv.norm());
      CHECK(s.residual < 1e-10 * iv.norm());
      ++done;
    }
  }
}

TEST_CASE("contralateral shift") {
  const testing::Fourier fh;
  const auto h = testing::fourier_table(fh);
  const double eta = testing::fourier_eta(fh);
  const auto c = CouplingStrengths::example_balanced();
  SUBCASE("no shifts, no change") {
    const auto s = contralateral_shift(HeterogeneityShifts{}, *h, eta);
    for (double d : s.delta) CHECK(d == 0.0);
  }
  SUBCASE("fields agree pointwise") {
    HeterogeneityShifts w;
    w.omega = {0.0, 0.0, -0.02, 0.0, 0.0, -0.02};
    w.zbar = 1.0;
    const auto s = contralateral_shift(w, *h, eta);
    CHECK(s.delta[2] == doctest::Approx(-0.02 / fh(2.0 / 3.0 - eta)));
    const TorusField a = TorusField::general(h, c, w.omega[0] - w.omega[1], w.omega[2] - w.omega[1], eta);
    const TorusField b = TorusField::general(h, shifted(c, s), 0.0, 0.0, eta);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const double x = u(rng), y = u(rng);
      const auto ra = torus_rhs(a, x, y), rb = torus_rhs(b, x, y);
      CHECK(std::abs(ra[0] - rb[0]) < 1e-10);
      CHECK(std::abs(ra[1] - rb[1]) < 1e-10);
    }
    CHECK(transport_mismatch(*h, c, w, eta) < 1e-10);
  }
  SUBCASE("census is unchanged by the substitution") {
    // alpha = 1/2 couplings with forward selection
    const auto ca = CouplingStrengths::from_alpha(0.5);
    const double zbar = 1.0, dI = 0.02;
    HeterogeneityShifts w;
    w.zbar = zbar;
    w.omega = {dI * zbar, dI * zbar, 0.0, dI * zbar, dI * zbar, 0.0};
    const auto s = contralateral_shift(w, *h, eta);
    const Census a = find_fixed_points(TorusField::general(h, ca, w.omega[0] - w.omega[1], w.omega[2] - w.omega[1], eta));
    const Census b = find_fixed_points(TorusField::general(h, shifted(ca, s), 0.0, 0.0, eta));
    CHECK(CensusCounts::of(a) == CensusCounts::of(b));
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].cls == b.points[i].cls);
      CHECK(std::abs(a.points[i].theta1 - b.points[i].theta1) < 1e-9);
      CHECK(std::abs(a.points[i].theta2 - b.points[i].theta2) < 1e-9);
    }
  }
  SUBCASE("a vanishing contralateral value is guarded") {
    auto zero = std::make_shared<CouplingTable>(CouplingTable::from_function(
        [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, 64));
    HeterogeneityShifts w;
    w.omega[0] = 0.01;
    CHECK_THROWS_AS(contralateral_shift(w, *zero, 0.0), NumericalError);
  }
}
