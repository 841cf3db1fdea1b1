#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "cpgait/bifurcation.hpp"
#include "cpgait/config.hpp"
#include "cpgait/phase_reduction.hpp"
#include "cpgait/torus.hpp"

namespace cpgait {

/// Tabulates the analytic stand-in coupling function.
std::shared_ptr<const CouplingTable> fourier_table(const FourierCoupling& f);

/// Everything the torus model needs at one I_ext.
struct PhaseModel {
  double i_ext = 0.0;
  double period = 0.0;  // 0 for a stand-in table
  double zbar = 0.0;
  std::shared_ptr<const CouplingTable> h;
  EtaResult eta;
  bool synthetic = false;
};

ReductionOptions reduction_options(const RunConfig& cfg);

/// Reduction at cfg.neuron.i_ext (or the given value), or the stand-in table.
PhaseModel phase_model(const RunConfig& cfg, std::optional<double> i_ext = std::nullopt);

/// Per-leg frequency shifts for the configured heterogeneity mode with
/// delta_i replacing the configured magnitude.
HeterogeneityShifts frequency_shifts(const RunConfig& cfg, double delta_i, double zbar);

/// Torus field for the configured couplings. With couplings.alpha the
/// normalized alpha form is used, otherwise the general form.
TorusField torus_field(const RunConfig& cfg, const PhaseModel& m, double delta_i,
                       std::optional<double> alpha = std::nullopt);

/// Memoizes phase models across I_ext values; safe to share between threads.
class PhaseModelCache {
 public:
  explicit PhaseModelCache(RunConfig cfg) : cfg_(std::move(cfg)) {}
  std::shared_ptr<const PhaseModel> at(double i_ext);

 private:
  RunConfig cfg_;
  std::mutex mu_;
  std::map<double, std::shared_ptr<const PhaseModel>> models_;
};

/// Field family in the scan parameter ("delta_i", "alpha" or "i_ext").
FieldFamily field_family(const RunConfig& cfg, const std::string& parameter,
                         std::shared_ptr<PhaseModelCache> cache = nullptr);

}  // namespace cpgait
