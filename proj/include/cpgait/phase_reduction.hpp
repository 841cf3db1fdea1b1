#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpgait/network.hpp"
#include "cpgait/neuron.hpp"
#include "cpgait/periodic.hpp"

namespace cpgait {

/// Infinitesimal phase response curve sampled on the orbit's grid. Phases are
/// in cycles, so Z has units of cycles per unit state and Z . f = 1/T.
struct IPRC {
  double period = 0.0;
  std::vector<std::array<double, 4>> z;   // (Z_v, Z_m, Z_w, Z_s) at phase k/N
  std::vector<std::array<double, 4>> dz;  // d/dphase
  /// max |T Z.f - 1| after the single global rescale, before the pointwise one.
  double normalization_drift = 0.0;
  /// Sample-wise change between the last two backward passes (relative to max|Z|).
  double periodic_change = 0.0;
  std::size_t passes = 0;

  std::size_t size() const { return z.size(); }
  std::vector<double> component(int index) const;
  double zv_at(double phase) const;
  /// Phase advance per unit injected current, mean(Z_v) / C.
  double mean_zv_per_current(double capacitance) const;
};

struct AdjointOptions {
  Tolerances tol{1e-10, 1e-12};
  double change_tol = 1e-8;
  std::size_t min_passes = 3;
  std::size_t max_passes = 400;
};

IPRC adjoint_iprc(const LimitCycle& lc, const AdjointOptions& opts = {});

struct DirectPrcOptions {
  double kick = 1e-3;  // mV
  std::size_t n_phases = 64;
  /// Periods integrated after the kick before reading the asymptotic phase.
  double settle_periods = 10.0;
  Tolerances tol{1e-12, 1e-13};
  /// Halving-kick disagreement above this flags nonlinearity.
  double max_halving_discrepancy = 0.05;
  /// Samples with |Z_v| below this fraction of the maximum skip the check.
  double significance = 0.1;
  std::size_t threads = 1;
};

struct DirectPrc {
  std::vector<double> phase;
  std::vector<double> zv;       // full kick
  std::vector<double> zv_half;  // half kick
  /// Largest relative halving disagreement among significant samples.
  double halving_discrepancy = 0.0;
  /// Halving disagreement at the sample where |Z_v| peaks.
  double halving_at_peak = 0.0;
};

/// Kicks v at evenly spaced phases and reads the asymptotic phase shift per
/// unit kick. Throws NumericalError(kKickTooLarge) if the halving check fails.
DirectPrc direct_prc(const LimitCycle& lc, const DirectPrcOptions& opts = {});

/// RMS of (direct - adjoint) over RMS of adjoint at the direct sample phases.
double prc_rms_relative_deviation(const DirectPrc& direct, const IPRC& adjoint);

/// Sampled 1-periodic coupling function with its first two derivatives,
/// evaluated by quintic Hermite interpolation.
class CouplingTable {
 public:
  CouplingTable() = default;
  CouplingTable(std::vector<double> h, std::vector<double> dh, std::vector<double> d2h, double xi,
                std::string params_hash = {});

  /// Tabulates analytic f, f', f'' on n points; used for tests and what-if runs.
  static CouplingTable from_function(const std::function<double(double)>& f,
                                     const std::function<double(double)>& df,
                                     const std::function<double(double)>& d2f, std::size_t n, double xi = 0.0);

  double operator()(double theta) const;
  double derivative(double theta) const;
  double second_derivative(double theta) const;
  Quintic eval(double theta) const;

  std::size_t size() const { return h_.size(); }
  double xi() const { return xi_; }
  const std::string& params_hash() const { return hash_; }
  const std::vector<double>& values() const { return h_; }
  const std::vector<double>& derivatives() const { return dh_; }
  const std::vector<double>& second_derivatives() const { return d2h_; }
  double sup_norm() const;
  double derivative_sup_norm() const;
  /// Largest gap between stored H' and centred differences of stored H.
  double finite_difference_mismatch() const;

 private:
  std::vector<double> h_, dh_, d2h_;
  double xi_ = 0.0;
  std::string hash_;
};

/// H(theta) = -(g_syn / C) mean_t[ Z_v(t) (v(t) - E_post) s(t + theta T) ] on
/// the orbit's grid; H' and H'' move the derivative onto s.
CouplingTable coupling_function(const LimitCycle& lc, const IPRC& iprc);

struct HeterogeneityShifts {
  std::array<double, 6> omega{};  // 1/ms
  double zbar = 0.0;               // cycles per ms per unit current
};

/// Frequency shifts from per-leg drives: delta_I * zbar for constants,
/// a one-period quadrature for waveforms.
HeterogeneityShifts omega_tilde(const IPRC& iprc, double capacitance, const HeterodriveSpec& drives);

struct EtaResult {
  double eta = 1.0 / 6.0;
  bool trivial = true;
  std::vector<double> grid_roots;
};

/// Root of H(2/3 - eta) = H(1/3 + eta) on [0, 1/6); 1/6 when none.
/// Throws NumericalError(kAssumptionViolation) on several roots.
EtaResult solve_eta(const CouplingTable& h, std::size_t scan_points = 4000, double tol = 1e-12);

struct AlphaBounds {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
};

AlphaBounds alpha_bounds(const CouplingTable& h);

void write_iprc_csv(const IPRC& iprc, double xi, const std::string& path);
void write_coupling_csv(const CouplingTable& h, const std::string& path,
                        const std::vector<std::pair<std::string, double>>& extra_meta = {});
/// Reads a table written by write_coupling_csv; extra metadata lands in `meta`.
CouplingTable read_coupling_csv(const std::string& path,
                                std::vector<std::pair<std::string, double>>* meta = nullptr);

/// Everything the torus model needs at one speed.
struct Reduction {
  double xi = 0.0;
  double period = 0.0;
  double zbar = 0.0;
  std::shared_ptr<const CouplingTable> table;
};

struct ReductionOptions {
  LimitCycleOptions cycle{};
  AdjointOptions adjoint{};
  /// Directory for cached tables; empty uses $CPG_CACHE_DIR, unset disables.
  std::optional<std::string> cache_dir;
};

/// Limit cycle, adjoint iPRC and H at params.i_ext, reusing a cached table
/// keyed by (params hash, grid size) when available.
Reduction reduce(const NeuronParams& p, const ReductionOptions& opts = {});

}  // namespace cpgait
