#pragma once

#include <algorithm>
#include <cstddef>

#include "cpgait/ode.hpp"

namespace cpgait::detail {

/// Follows one voltage component across dense integrator steps and reports
/// upward threshold crossings with the time spent below threshold before each.
struct CrossingTracker {
  double threshold;
  double last_down;  // time v last fell below threshold
  bool below;
  std::size_t index = 0;

  struct Crossing {
    double time;
    double quiescence;
  };

  template <class Seg, class OnUp>
  void scan(const Seg& seg, double t_limit, OnUp&& on_up) {
    const double t1 = std::min(seg.t_end(), t_limit);
    if (!(t1 > seg.t_begin())) return;
    const double v0 = seg.begin_state()[index];
    const double v1 = t1 == seg.t_end() ? seg.end_state()[index] : seg(t1)[index];
    auto g = [&](double t) { return seg(t)[index] - threshold; };
    if (below && v1 >= threshold) {
      const double tc = bisect_root(g, seg.t_begin(), t1, v0 - threshold, 1e-15);
      below = false;
      on_up(Crossing{tc, tc - last_down});
    } else if (!below && v1 < threshold) {
      last_down = bisect_root(g, seg.t_begin(), t1, v0 - threshold, 1e-15);
      below = true;
    }
  }
};

}  // namespace cpgait::detail
