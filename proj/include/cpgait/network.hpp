#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cpgait/neuron.hpp"

namespace cpgait {

/// Coupling multipliers c1..c7 of the six-cell network. c1..c3 are the
/// contralateral links (front, middle, hind), c4..c7 the ipsilateral ones.
struct CouplingStrengths {
  std::array<double, 7> c{1, 1, 1, 1, 1, 1, 1};

  double operator()(int i) const { return c.at(static_cast<std::size_t>(i - 1)); }  // 1-based
  double& operator()(int i) { return c.at(static_cast<std::size_t>(i - 1)); }

  /// Throws ConfigError on negative or non-finite entries.
  void validate() const;
  /// c1+c5 = c2+c4+c7 = c3+c6 within tol.
  bool balanced(double tol = 1e-9) const;
  /// Largest pairwise gap among the three balance sums.
  double balance_residual() const;

  static CouplingStrengths uniform(double value);
  /// The randomly drawn balanced example used throughout the analysis.
  static CouplingStrengths example_balanced();
  /// c4 = 1, c5 = c6 = 1/alpha, c7 = 1/alpha - 1 and c1 = c2 = c3 = c_contra.
  static CouplingStrengths from_alpha(double alpha, double c_contra = 1.0);
};

/// Extra current applied to one leg: a constant, or a 1-periodic waveform
/// sampled uniformly over one cycle and played back at `frequency` (1/ms).
struct Drive {
  double constant = 0.0;
  std::vector<double> waveform;
  double frequency = 0.0;

  bool is_waveform() const { return !waveform.empty(); }
  double value(double t) const;
  /// Time average over one cycle of the drive itself.
  double mean() const;
  double max_abs() const;
};

struct HeterodriveSpec {
  std::array<Drive, 6> legs{};

  const Drive& leg(int i) const { return legs.at(static_cast<std::size_t>(i - 1)); }
  Drive& leg(int i) { return legs.at(static_cast<std::size_t>(i - 1)); }

  /// I^i = I^{i+3} for i = 1, 2, 3 (same constant, or same waveform and frequency).
  bool contralaterally_symmetric() const;
  /// Raised when some |I^i| exceeds 10 g_syn, the scale weak coupling tolerates.
  bool magnitude_warning(double g_syn) const;

  static HeterodriveSpec zero();
  /// delta_i on legs 1, 2 and their contralateral partners 4, 5.
  static HeterodriveSpec forward_selection(double delta_i);
  /// delta_i on legs 2, 3 and their partners 5, 6.
  static HeterodriveSpec backward_selection(double delta_i);
  static HeterodriveSpec constants(const std::array<double, 6>& values);
};

using NetworkState = std::array<NeuronState, 6>;

/// Presynaptic neighbours of each leg with the coupling index used on that
/// link, e.g. leg 1 listens to leg 4 through c1 and to leg 2 through c5.
struct Link {
  int from;
  int coupling;
};
const std::vector<Link>& network_inputs(int leg);

/// Time derivative of the six coupled cells. Synaptic input reaches the
/// voltage equation only.
NetworkState network_field(const NetworkState& x, const NeuronParams& p, const CouplingStrengths& c,
                           const HeterodriveSpec& drives, double t);

struct NetworkOptions {
  Tolerances tol{1e-9, 1e-11};
  /// Spacing of stored samples; 0 stores nothing but the final state.
  double sample_interval = 1.0;
  double v_threshold = -20.0;
  /// Minimum quiescence before an onset, in units of `reference_period`.
  double quiescence_fraction = 0.25;
  double reference_period = 0.0;
};

struct NetworkTrajectory {
  std::vector<double> t;
  std::vector<NetworkState> x;
  NetworkState final_state{};
  double duration = 0.0;
  /// Burst-onset times per leg (index 0 is leg 1).
  std::array<std::vector<double>, 6> onsets;
};

NetworkTrajectory simulate_network(const NetworkState& initial, const NeuronParams& p,
                                   const CouplingStrengths& c, const HeterodriveSpec& drives,
                                   double duration, const NetworkOptions& opts = {});

/// Places leg i on the uncoupled orbit at phase phases[i].
NetworkState network_on_cycle(const LimitCycle& lc, const std::array<double, 6>& phases);

struct LegPhases {
  double theta1 = 0.0;  // phi1 - phi2
  double theta2 = 0.0;  // phi3 - phi2
  std::array<double, 3> contralateral{};  // phi_{i+3} - phi_i
  double theta1_std = 0.0;
  double theta2_std = 0.0;
  std::array<double, 3> contralateral_std{};
  std::size_t cycles_used = 0;
  bool locked = false;
  double mean_period = 0.0;
};

struct PhaseExtractionOptions {
  double transient = 0.0;
  std::size_t min_cycles = 10;
  std::size_t average_cycles = 5;
  double lock_threshold = 0.02;
};

/// Steady phase differences from burst onsets; the reference is leg 2.
/// Throws NumericalError(kInsufficientEvents) when too few cycles remain.
LegPhases extract_leg_phases(const NetworkTrajectory& traj, const PhaseExtractionOptions& opts = {});

void write_network_csv(const NetworkTrajectory& traj, const std::string& path);
void write_onsets_csv(const NetworkTrajectory& traj, const std::string& path);

}  // namespace cpgait
