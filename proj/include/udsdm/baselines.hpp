#pragma once

#include <cstddef>
#include <stdexcept>

#include "udsdm/synopsis.hpp"

namespace udsdm {

// BM: ship on any change.
inline bool bm_decide(const UpdateQuantum& e) { return e.value > 0.0; }

// Holt double exponential smoothing over normalized quanta.
struct HoltState {
  double level = 0.0;
  double trend = 0.0;
  double alpha = 0.5;
  double beta = 0.5;
  std::size_t observations_seen = 0;

  HoltState() = default;
  HoltState(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("holt: alpha and beta must lie in (0,1)");
    }
  }

  bool forecast_ready() const { return observations_seen >= 2; }
  double forecast() const { return level + trend; }
  void reset() {
    level = trend = 0.0;
    observations_seen = 0;
  }
};

// The first two observations initialize level = first, trend = second - first.
inline HoltState holt_update(HoltState s, double e) {
  if (s.observations_seen == 0) {
    s.level = e;
  } else if (s.observations_seen == 1) {
    s.trend = e - s.level;
  } else {
    const double level = s.alpha * e + (1.0 - s.alpha) * (s.level + s.trend);
    s.trend = s.beta * (level - s.level) + (1.0 - s.beta) * s.trend;
    s.level = level;
  }
  ++s.observations_seen;
  return s;
}

// PM: ship when the one-step Holt forecast exceeds theta, after W warm-up
// observations.
inline bool pm_decide(const HoltState& s, double theta, std::size_t window) {
  if (s.observations_seen < window || !s.forecast_ready()) return false;
  return s.forecast() > theta;
}

}  // namespace udsdm
