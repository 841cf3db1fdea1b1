#include <doctest.h>

#include <cmath>

#include "cpgait/error.hpp"
#include "cpgait/gaits.hpp"
#include "cpgait/network.hpp"
#include "cpgait/periodic.hpp"

using namespace cpgait;

namespace {

NetworkState sample_state() {
  NetworkState x;
  for (std::size_t i = 0; i < 6; ++i) {
    const double k = static_cast<double>(i);
    x[i] = {-55.0 + 9.0 * k, 0.05 + 0.1 * k, 0.3 + 0.02 * k, 0.01 + 0.15 * k};
  }
  return x;
}

NeuronParams at(double i_ext) {
  NeuronParams p;
  p.i_ext = i_ext;
  return p;
}

}  // namespace

TEST_CASE("wiring lists each contralateral and ipsilateral link once") {
  int count[8] = {};
  for (int leg = 1; leg <= 6; ++leg) {
    for (const Link& l : network_inputs(leg)) {
      ++count[l.coupling];
      // contralateral partner sits three legs away
      if (l.coupling <= 3) CHECK(std::abs(l.from - leg) == 3);
    }
  }
  // c1..c3 and c4..c7 each wire one link per side
  for (int k = 1; k <= 7; ++k) CHECK(count[k] == 2);
  CHECK_THROWS_AS(network_inputs(7), ConfigError);
}

TEST_CASE("zero coupling gives six copies of the single-cell field") {
  const NeuronParams p = at(35.9);
  CouplingStrengths c = CouplingStrengths::uniform(0.0);
  const NetworkState x = sample_state();
  const NetworkState f = network_field(x, p, c, HeterodriveSpec::zero(), 0.0);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto a = f[i].as_array(), b = vector_field(x[i], p).as_array();
    for (int k = 0; k < 4; ++k) CHECK(a[k] == b[k]);
  }
}

TEST_CASE("silent synapses contribute nothing") {
  const NeuronParams p = at(35.9);
  NetworkState x = sample_state();
  for (auto& s : x) s.s = 0.0;
  const NetworkState f = network_field(x, p, CouplingStrengths::example_balanced(), HeterodriveSpec::zero(), 0.0);
  for (std::size_t i = 0; i < 6; ++i) CHECK(f[i].v == vector_field(x[i], p).v);
}

TEST_CASE("synaptic current matches a hand sum") {
  const NeuronParams p = at(35.9);
  const auto c = CouplingStrengths::example_balanced();
  const NetworkState x = sample_state();
  const NetworkState f = network_field(x, p, c, HeterodriveSpec::zero(), 0.0);
  // leg 2 hears leg 5 through c2, leg 1 through c4 and leg 3 through c7
  const double syn = p.g_syn * (x[1].v - p.e_syn_post) * (c(2) * x[4].s + c(4) * x[0].s + c(7) * x[2].s);
  CHECK(f[1].v == doctest::Approx(vector_field(x[1], p).v - syn / p.capacitance).epsilon(1e-12));
}

TEST_CASE("left-right swap is a symmetry") {
  const NeuronParams p = at(35.9);
  const auto c = CouplingStrengths::example_balanced();
  const auto drives = HeterodriveSpec::forward_selection(0.02);
  const NetworkState x = sample_state();
  NetworkState y;
  for (std::size_t i = 0; i < 6; ++i) y[i] = x[(i + 3) % 6];
  const NetworkState fx = network_field(x, p, c, drives, 0.0);
  const NetworkState fy = network_field(y, p, c, drives, 0.0);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto a = fy[i].as_array(), b = fx[(i + 3) % 6].as_array();
    for (int k = 0; k < 4; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-14));
  }
}

TEST_CASE("drives") {
  CHECK(HeterodriveSpec::forward_selection(0.1).contralaterally_symmetric());
  CHECK(HeterodriveSpec::backward_selection(0.1).leg(1).constant == 0.0);
  CHECK(HeterodriveSpec::backward_selection(0.1).leg(6).constant == 0.1);
  auto s = HeterodriveSpec::constants({0.1, 0, 0, 0.2, 0, 0});
  CHECK_FALSE(s.contralaterally_symmetric());
  CHECK(HeterodriveSpec::constants({0.2, 0, 0, 0.2, 0, 0}).magnitude_warning(0.01));
  CHECK_FALSE(HeterodriveSpec::constants({0.05, 0, 0, 0.05, 0, 0}).magnitude_warning(0.01));
  Drive d;
  d.waveform = {0.0, 1.0, 0.0, -1.0};
  d.frequency = 0.5;
  CHECK(d.mean() == doctest::Approx(0.0).scale(1.0));
  CHECK(d.max_abs() == 1.0);
  CHECK(d.value(0.5) == doctest::Approx(1.0));
}

TEST_CASE("identical uncoupled cells stay identical and replay exactly") {
  const NeuronParams p = at(35.9);
  NetworkState x0;
  x0.fill({-30.0, 0.0, 0.3, 0.0});
  NetworkOptions o;
  o.sample_interval = 5.0;
  const auto a = simulate_network(x0, p, CouplingStrengths::uniform(0.0), HeterodriveSpec::zero(), 300.0, o);
  for (std::size_t i = 1; i < 6; ++i) {
    const auto u = a.final_state[i].as_array(), v = a.final_state[0].as_array();
    for (int k = 0; k < 4; ++k) CHECK(u[k] == v[k]);
  }
  const auto b = simulate_network(x0, p, CouplingStrengths::uniform(0.0), HeterodriveSpec::zero(), 300.0, o);
  REQUIRE(a.t.size() == b.t.size());
  for (std::size_t k = 0; k < a.x.size(); ++k) {
    for (std::size_t i = 0; i < 6; ++i) CHECK(a.x[k][i].v == b.x[k][i].v);
  }
}

TEST_CASE("phases placed on the orbit are read back from onsets") {
  NeuronParams p = at(35.9);
  p.g_syn = 0.0;  // no coupling, so the placed phases persist
  const LimitCycle lc = find_limit_cycle(p);
  for (GaitKind kind : {GaitKind::kFR, GaitKind::kBL, GaitKind::kTripod}) {
    const auto g = GaitTemplate::make(kind);
    NetworkOptions o;
    o.sample_interval = 0.0;
    o.reference_period = lc.period;
    o.tol = {1e-10, 1e-12};
    const auto tr = simulate_network(network_on_cycle(lc, g.leg_phases()), p, CouplingStrengths::example_balanced(),
                                     HeterodriveSpec::zero(), 8.2 * lc.period, o);
    PhaseExtractionOptions e;
    e.min_cycles = 5;
    e.average_cycles = 4;
    const LegPhases ph = extract_leg_phases(tr, e);
    const auto want = g.torus_point();
    CHECK(circle_distance(ph.theta1, want[0]) < 1e-3);
    CHECK(circle_distance(ph.theta2, want[1]) < 1e-3);
    for (double psi : ph.contralateral) CHECK(circle_distance(psi, g.psi) < 1e-3);
    CHECK(ph.locked);
    CHECK(ph.mean_period == doctest::Approx(lc.period).epsilon(1e-4));
  }
}

TEST_CASE("too few onsets are reported") {
  NetworkTrajectory tr;
  for (auto& o : tr.onsets) o = {1.0, 2.0};
  CHECK_THROWS_AS(extract_leg_phases(tr), NumericalError);
}
