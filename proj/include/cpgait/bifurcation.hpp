#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cpgait/torus.hpp"

namespace cpgait {

/// One-parameter family of torus fields.
using FieldFamily = std::function<TorusField(double)>;

struct CensusCounts {
  std::size_t sinks = 0, sources = 0, saddles = 0, nonhyperbolic = 0;

  static CensusCounts of(const Census& c);
  std::size_t total() const { return sinks + sources + saddles + nonhyperbolic; }
  long euler() const { return static_cast<long>(sinks + sources) - static_cast<long>(saddles); }
  bool operator==(const CensusCounts&) const = default;
  std::string summary() const;
};

/// A fold located by bisection, with the Jacobian at the merging pair.
struct SaddleNode {
  double value = 0.0;
  /// Final bracket width in the parameter.
  double width = 0.0;
  std::array<double, 2> locus{};
  PointClass first = PointClass::kSaddle, second = PointClass::kSaddle;
  double separation = 0.0;  // of the pair at the last parameter where both exist
  /// det J / scale^2 and trace J / scale at the locus; a fold has the first
  /// near zero and the second not.
  double det_normalized = 0.0;
  double trace_normalized = 0.0;
  bool degenerate = false;
};

/// A fixed point that changes class without the counts changing, as when two
/// branches cross and swap stability, or a focus changes sides.
struct StabilityExchange {
  double value = 0.0;
  double width = 0.0;
  std::array<double, 2> locus{};
  PointClass from = PointClass::kSink, to = PointClass::kSaddle;
  double det_normalized = 0.0;
  double trace_normalized = 0.0;
};

struct BifurcationEvent {
  double lo = 0.0, hi = 0.0;  // refined bracket, in sweep order
  CensusCounts before, after;
  std::optional<SaddleNode> fold;
  std::optional<StabilityExchange> exchange;
  /// Census changed by more than one pair even at the finest bracket.
  bool ambiguous = false;
  std::string note;

  double value() const { return fold ? fold->value : exchange ? exchange->value : 0.5 * (lo + hi); }
};

struct SweepOptions {
  CensusOptions census;
  double event_width = 1e-4;
  double ambiguous_width = 1e-6;
  /// Pair bisection stops at this relative width.
  double pair_width = 1e-12;
  double det_tol = 1e-6;
  double trace_floor = 1e-3;
  /// Largest move of a point between neighbouring grid values still matched
  /// to itself.
  double match_reach = 0.05;
  std::size_t threads = 1;
};

struct SweepResult {
  std::string parameter;
  std::vector<double> grid;
  std::vector<Census> censuses;
  std::vector<BifurcationEvent> events;  // in sweep order
  /// Number of events that are clean folds.
  std::size_t folds() const;
  std::size_t exchanges() const;
};

/// Census at each grid value; every change between neighbours is bisected to
/// an event. With equal counts, points are matched by distance and a change of
/// class is bisected along the continued point. The grid must be strictly monotone, either direction.
SweepResult sweep(const FieldFamily& family, const std::string& parameter, const std::vector<double>& grid,
                  const SweepOptions& opts = {});

/// Bisects a bracket whose two ends differ by exactly one pair, first on the
/// census and then by continuing the merging pair with Newton. Throws
/// NumericalError(kInsufficientEvents) if the ends do not differ by one pair.
/// Continues the fixed point near `locus` at `from` towards `to` and bisects
/// where its class changes.
StabilityExchange locate_exchange(const FieldFamily& family, double from, double to, std::array<double, 2> locus,
                                  const SweepOptions& opts = {});

SaddleNode locate_saddle_node(const FieldFamily& family, double from, double to, const SweepOptions& opts = {});

struct BranchPoint {
  double value = 0.0;
  FixedPointRecord point;
  bool class_changed = false;
};

struct BranchOptions {
  std::size_t max_halvings = 12;
  /// A continuation step that moves the point further than this is rejected.
  double max_jump = 0.02;
  CensusOptions census;
};

struct Branch {
  std::vector<BranchPoint> points;  // one per grid value reached
  bool lost = false;
  double lost_at = 0.0;  // parameter of the failed step
  std::string message;
};

/// Natural-parameter continuation of the fixed point near `seed` at grid[0].
/// Steps are halved when Newton fails or jumps; after max_halvings the branch
/// is reported lost with the points traced so far.
Branch trace_branch(const FieldFamily& family, const std::vector<double>& grid, std::array<double, 2> seed,
                    const BranchOptions& opts = {});

void write_sweep_csv(const SweepResult& r, const std::string& path);
void write_events_csv(const SweepResult& r, const std::string& path);
void write_branch_csv(const Branch& b, const std::string& parameter, const std::string& path);

}  // namespace cpgait
