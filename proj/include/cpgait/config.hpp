#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpgait/network.hpp"
#include "cpgait/neuron.hpp"

namespace cpgait {

enum class HeteroMode { kNone, kForward, kBackward, kCurrents };

/// Analytic stand-in for the computed H:
/// mean + sum_k cos[k] cos(2 pi (k+1) theta) + sin[k] sin(2 pi (k+1) theta).
struct FourierCoupling {
  double mean = -1.0;
  std::vector<double> cos, sin;
  double zbar = 1.0;
  std::size_t points = 1024;
};

struct ScanConfig {
  std::string parameter = "delta_i";  // delta_i | alpha | i_ext
  double from = 0.0, to = 0.05;
  std::size_t points = 101;

  std::vector<double> grid() const;
};

struct RunConfig {
  NeuronParams neuron;

  // Exactly one coupling description is used: explicit c, alpha, or the example.
  std::optional<std::array<double, 7>> c;
  std::optional<double> alpha;
  double c_contra = 1.0;
  bool example_couplings = false;

  HeteroMode hetero = HeteroMode::kNone;
  double delta_i = 0.0;
  std::array<double, 6> currents{};

  ScanConfig scan;
  bool scan_given = false;  // a scan section was present
  std::optional<std::array<double, 2>> seed_point;

  std::size_t orbit_grid = 4096;
  std::size_t census_grid = 256;
  std::size_t nullcline_grid = 256;
  std::size_t prc_phases = 64;
  double prc_kick = 1e-3;

  double rel_tol = 1e-10, abs_tol = 1e-12;

  double simulate_duration = 40000.0;
  double simulate_transient = 20000.0;
  std::string initial_gait = "tripod";
  std::uint64_t seed = 1;

  std::optional<FourierCoupling> coupling_override;

  std::string out_dir = "out";
  bool svg = true;

  /// Keys that were present but not recognised, as dotted paths.
  std::vector<std::string> unknown_keys;

  bool uses_alpha() const { return alpha.has_value(); }
  CouplingStrengths couplings() const;
};

/// Parses JSON text. Malformed values throw ConfigError; unknown keys are
/// collected and only rejected when `strict`.
RunConfig parse_config(const std::string& json_text, bool strict);
RunConfig load_config(const std::string& path, bool strict);

/// Fully resolved configuration as JSON, for the manifest.
std::string config_json(const RunConfig& cfg);

std::string to_string(HeteroMode m);

}  // namespace cpgait
