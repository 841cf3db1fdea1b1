#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "cpgait/error.hpp"
#include "cpgait/parallel.hpp"
#include "cpgait/phase_reduction.hpp"
#include "helpers.hpp"

using namespace cpgait;

namespace {

NeuronParams at(double i_ext) {
  NeuronParams p;
  p.i_ext = i_ext;
  return p;
}

struct Reduced {
  LimitCycle lc;
  IPRC z;
  CouplingTable h;
};

const Reduced& reduced_359() {
  static const Reduced r = [] {
    Reduced x;
    x.lc = find_limit_cycle(at(35.9));
    x.z = adjoint_iprc(x.lc);
    x.h = coupling_function(x.lc, x.z);
    return x;
  }();
  return r;
}

// H(theta) straight from the definition by the trapezoid rule on the orbit grid,
// with the 1/C that turns a current into a voltage rate.
double h_direct(const LimitCycle& lc, const IPRC& z, double theta) {
  const auto& p = lc.params;
  double s = 0.0;
  for (std::size_t k = 0; k < lc.size(); ++k) {
    const double phase = static_cast<double>(k) / static_cast<double>(lc.size());
    s += z.z[k][0] * (lc.samples[k].v - p.e_syn_post) * lc.state_at(phase + theta).s;
  }
  return -p.g_syn / p.capacitance * s / static_cast<double>(lc.size());
}

}  // namespace

TEST_CASE("iPRC normalization holds at every sample") {
  const auto& r = reduced_359();
  REQUIRE(r.z.size() == r.lc.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < r.lc.size(); ++k) {
    const auto& d = r.lc.derivatives[k];
    const auto& z = r.z.z[k];
    const double dot = z[0] * d.v + z[1] * d.m + z[2] * d.w + z[3] * d.s;
    worst = std::max(worst, std::abs(dot * r.lc.period - 1.0));
  }
  CHECK(worst < 1e-6);
  CHECK(r.z.normalization_drift < 1e-3);
}

TEST_CASE("adjoint iPRC agrees with direct kicks") {
  const auto& r = reduced_359();
  DirectPrcOptions o;
  o.threads = hardware_threads();
  const DirectPrc d = direct_prc(r.lc, o);
  CHECK(prc_rms_relative_deviation(d, r.z) <= 0.02);
  CHECK(d.halving_at_peak < 0.01);
  const double mean_direct = std::accumulate(d.zv.begin(), d.zv.end(), 0.0) / static_cast<double>(d.zv.size());
  CHECK(mean_direct > 0.0);
  // Z_v is mostly nonnegative
  const auto neg = std::count_if(r.z.z.begin(), r.z.z.end(), [](const auto& z) { return z[0] < 0; });
  CHECK(static_cast<double>(neg) < 0.2 * static_cast<double>(r.z.size()));
}

TEST_CASE("mean voltage response is positive across the bursting range") {
  for (double i : {35.9, 36.5, 37.7}) {
    const LimitCycle lc = find_limit_cycle(at(i));
    CHECK(adjoint_iprc(lc).mean_zv_per_current(lc.params.capacitance) > 0.0);
  }
}

TEST_CASE("coupling function") {
  const auto& r = reduced_359();
  SUBCASE("negative on the middle third") {
    for (int k = 0; k <= 200; ++k) CHECK(r.h(1.0 / 3.0 + k / 600.0) < 0.0);
  }
  SUBCASE("table agrees with the defining average") {
    for (double th : {0.0, 0.25, 0.5, 0.75, 0.137}) {
      CHECK(r.h(th) == doctest::Approx(h_direct(r.lc, r.z, th)).epsilon(1e-8).scale(r.h.sup_norm()));
    }
    CHECK(r.h.finite_difference_mismatch() < 1e-4 * r.h.derivative_sup_norm());
  }
  SUBCASE("vanishes without synaptic conductance") {
    NeuronParams p = r.lc.params;
    p.g_syn = 0.0;
    LimitCycle lc = r.lc;
    lc.params = p;
    const CouplingTable h0 = coupling_function(lc, r.z);
    CHECK(h0.sup_norm() == 0.0);
  }
  SUBCASE("alpha bounds add to one") {
    const AlphaBounds a = alpha_bounds(r.h);
    CHECK(std::abs(a.alpha_min + a.alpha_max - 1.0) < 1e-10);
  }
}

TEST_CASE("coupling function converges under grid doubling") {
  LimitCycleOptions o;
  const auto& base = reduced_359();
  o.grid_size = 2 * base.lc.size();
  const LimitCycle lc = find_limit_cycle(at(35.9), o);
  const CouplingTable fine = coupling_function(lc, adjoint_iprc(lc));
  double gap = 0.0;
  for (int k = 0; k < 997; ++k) gap = std::max(gap, std::abs(fine(k / 997.0) - base.h(k / 997.0)));
  CHECK(gap < 1e-5);
  // refined-quadrature oracle at 4x resolution on a few phases
  o.grid_size = 4 * base.lc.size();
  const LimitCycle lc4 = find_limit_cycle(at(35.9), o);
  const IPRC z4 = adjoint_iprc(lc4);
  for (double th : {0.0, 0.25, 0.5, 0.75}) {
    CHECK(std::abs(base.h(th) - h_direct(lc4, z4, th)) < 1e-5);
  }
}

TEST_CASE("frequency shifts from selection drives") {
  const auto& r = reduced_359();
  const double dI = 0.02;
  const double zbar = r.z.mean_zv_per_current(r.lc.params.capacitance);
  const auto f = omega_tilde(r.z, r.lc.params.capacitance, HeterodriveSpec::forward_selection(dI));
  CHECK(f.omega[0] - f.omega[1] == doctest::Approx(0.0));
  CHECK(f.omega[2] - f.omega[1] == doctest::Approx(-dI * zbar).epsilon(1e-12));
  const auto b = omega_tilde(r.z, r.lc.params.capacitance, HeterodriveSpec::backward_selection(dI));
  CHECK(b.omega[2] - b.omega[1] == doctest::Approx(0.0));
  CHECK(b.omega[0] - b.omega[1] == doctest::Approx(-dI * zbar).epsilon(1e-12));
  const auto z = omega_tilde(r.z, r.lc.params.capacitance, HeterodriveSpec::zero());
  for (double w : z.omega) CHECK(w == 0.0);
  // a sinusoidal drive at the orbit frequency averages against Z_v
  HeterodriveSpec s;
  s.leg(1).waveform.resize(256);
  for (std::size_t k = 0; k < 256; ++k) s.leg(1).waveform[k] = std::sin(2 * M_PI * k / 256.0);
  s.leg(1).frequency = 1.0 / r.lc.period;
  const auto w = omega_tilde(r.z, r.lc.params.capacitance, s);
  double ref = 0.0;
  for (std::size_t k = 0; k < r.z.size(); ++k) {
    ref += r.z.z[k][0] * std::sin(2 * M_PI * k / static_cast<double>(r.z.size()));
  }
  ref /= static_cast<double>(r.z.size()) * r.lc.params.capacitance;
  CHECK(w.omega[0] == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("eta") {
  SUBCASE("matches bisection on the analytic form") {
    testing::Fourier f;
    const EtaResult e = solve_eta(*testing::fourier_table(f));
    CHECK_FALSE(e.trivial);
    CHECK(e.eta == doctest::Approx(testing::fourier_eta(f)).epsilon(1e-9));
  }
  SUBCASE("constant solution always satisfies the relation") {
    const auto h = testing::fourier_table();
    CHECK((*h)(2.0 / 3.0 - 1.0 / 6.0) == doctest::Approx((*h)(1.0 / 3.0 + 1.0 / 6.0)));
  }
  SUBCASE("no interior root gives the trivial value") {
    testing::Fourier f;
    f.a[0] = f.a[1] = f.a[2] = 0;
    f.b[0] = 0.1;
    f.b[1] = f.b[2] = 0;
    const EtaResult e = solve_eta(*testing::fourier_table(f));
    CHECK(e.trivial);
    CHECK(e.eta == doctest::Approx(1.0 / 6.0));
  }
  SUBCASE("several interior roots are an assumption violation") {
    // high harmonic: the difference oscillates several times on (0, 1/6)
    auto h = std::make_shared<CouplingTable>(CouplingTable::from_function(
        [](double x) { return std::sin(2 * M_PI * 9 * x); },
        [](double x) { return 18 * M_PI * std::cos(2 * M_PI * 9 * x); },
        [](double x) { return -324 * M_PI * M_PI * std::sin(2 * M_PI * 9 * x); }, 2048));
    int changes = 0;
    auto g = [&](double e) { return (*h)(2.0 / 3.0 - e) - (*h)(1.0 / 3.0 + e); };
    for (int k = 1; k < 1000; ++k) changes += (g(k / 6000.0) > 0) != (g((k + 1) / 6000.0) > 0);
    REQUIRE(changes >= 2);
    try {
      solve_eta(*h);
      FAIL("expected several roots to be rejected");
    } catch (const NumericalError& e) {
      CHECK(e.reason() == NumericalError::Reason::kAssumptionViolation);
    }
  }
}

TEST_CASE("quintic table reproduces an analytic function") {
  testing::Fourier f;
  const auto h = testing::fourier_table(f);
  for (int k = 0; k < 500; ++k) {
    const double x = k / 500.0 + 1e-4;
    CHECK((*h)(x) == doctest::Approx(f(x)).epsilon(1e-11).scale(1.0));
    CHECK(h->derivative(x) == doctest::Approx(f.d1(x)).epsilon(1e-7).scale(1.0));
  }
  CHECK((*h)(0.3) == doctest::Approx((*h)(1.3)).epsilon(1e-15));
  CHECK((*h)(-0.2) == doctest::Approx((*h)(0.8)).epsilon(1e-15));
}

TEST_CASE("coupling table csv round trip") {
  const auto h = testing::fourier_table({}, 128);
  const auto path = (std::filesystem::temp_directory_path() / "cpgait_h_roundtrip.csv").string();
  write_coupling_csv(*h, path, {{"zbar", 0.5}});
  std::vector<std::pair<std::string, double>> meta;
  const CouplingTable back = read_coupling_csv(path, &meta);
  REQUIRE(back.size() == h->size());
  for (std::size_t k = 0; k < h->size(); ++k) CHECK(back.values()[k] == h->values()[k]);
  bool found = false;
  for (const auto& [k, v] : meta) found = found || (k == "zbar" && v == 0.5);
  CHECK(found);
  std::filesystem::remove(path);
}

TEST_CASE("reduce reuses the cache") {
  const auto dir = std::filesystem::temp_directory_path() / "cpgait_cache_test";
  std::filesystem::remove_all(dir);
  ReductionOptions o;
  o.cache_dir = dir.string();
  const Reduction a = reduce(at(36.5), o);
  const Reduction b = reduce(at(36.5), o);
  CHECK(a.period == doctest::Approx(b.period).epsilon(1e-12));
  CHECK(a.zbar == doctest::Approx(b.zbar).epsilon(1e-12));
  for (std::size_t k = 0; k < a.table->size(); k += 97) {
    CHECK(a.table->values()[k] == doctest::Approx(b.table->values()[k]).epsilon(1e-14));
  }
  CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) >= 1);
  std::filesystem::remove_all(dir);
}
