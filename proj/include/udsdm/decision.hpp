#pragma once

// Per-node dissemination policy: fuzzy degree of distribution over the past
// and forecast quanta triples, geometric-mean fusion, threshold gate, and the
// epoch deadline that forces a delivery when the policy stays silent.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udsdm/lstm.hpp"
#include "udsdm/synopsis.hpp"
#include "udsdm/t2fls.hpp"

namespace udsdm {

inline double fuse(double dod_p, double dod_f) {
  if (!(dod_p >= 0.0 && dod_p <= 1.0 && dod_f >= 0.0 && dod_f <= 1.0)) {
    throw std::invalid_argument("fuse: degrees of distribution must lie in [0,1]");
  }
  return std::sqrt(dod_p * dod_f);
}

enum class Decision { hold, disseminate, forced };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::hold: return "hold";
    case Decision::disseminate: return "disseminate";
    case Decision::forced: return "forced";
  }
  return "?";
}

struct DecisionPolicy {
  double theta = 0.6;
  std::int64_t epoch_length = 100;
  std::int64_t phase_offset = 0;

  void validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0,1]");
    if (epoch_length <= 0) throw std::invalid_argument("epoch length T must be > 0");
    if (phase_offset < 0) throw std::invalid_argument("phase offset must be >= 0");
  }
};

// Stagger of node i among n: floor(i * T / n).
inline std::int64_t phase_offset_for(std::size_t node, std::size_t n_nodes, std::int64_t epoch_length) {
  return static_cast<std::int64_t>(node) * epoch_length / static_cast<std::int64_t>(n_nodes);
}

// Delivery deadline. The first deadline sits on the node's staggered grid
// (phase_offset, or T when the offset is 0); every dissemination, voluntary
// or forced, opens a new epoch ending T steps later.
class EpochClock {
 public:
  EpochClock() = default;
  EpochClock(std::int64_t epoch_length, std::int64_t phase_offset, std::int64_t start_step = 0)
      : length_(epoch_length),
        last_(start_step),
        deadline_(start_step + (phase_offset > 0 ? phase_offset : epoch_length)) {
    if (epoch_length <= 0) throw std::invalid_argument("epoch length T must be > 0");
  }

  bool due(std::int64_t step) const { return step >= deadline_; }
  void on_dissemination(std::int64_t step) {
    last_ = step;
    deadline_ = step + length_;
  }
  std::int64_t last_dissemination() const { return last_; }
  std::int64_t deadline() const { return deadline_; }
  std::int64_t epoch_length() const { return length_; }

 private:
  std::int64_t length_ = 1;
  std::int64_t last_ = 0;
  std::int64_t deadline_ = 1;
};

struct DecisionTrace {
  std::int64_t step = 0;
  double e_raw = 0.0;
  double e_norm = 0.0;
  std::optional<std::array<double, 3>> past_triple;
  std::optional<std::array<double, 3>> forecast_triple;
  std::optional<double> dod_p;
  std::optional<double> dod_f;
  std::optional<double> fused;
  Decision decision = Decision::hold;
};

// Everything a UDSDM node needs besides its own state.
struct UdsdmModel {
  LstmCell lstm;
  FuzzySystem fls;
  NormalizationCalibration calibration;
};

// Gate evaluation for the current step. quanta holds the raw quanta since the
// last dissemination; fewer than three of them means warm-up (hold). The
// deadline overrides a hold with a forced delivery.
inline DecisionTrace decide(const DecisionPolicy& policy, const EpochClock& clock, std::int64_t step,
                            const QuantaSeries& quanta, const UdsdmModel& model) {
  DecisionTrace trace;
  trace.step = step;
  if (!quanta.empty()) {
    trace.e_raw = quanta.back().value;
    trace.e_norm = normalize_quantum(quanta.back(), model.calibration);
  }
  if (quanta.size() >= 3) {
    const std::size_t n = quanta.size();
    std::array<double, 3> past{};
    for (std::size_t k = 0; k < 3; ++k) past[k] = normalize_quantum(quanta[n - 3 + k], model.calibration);
    const auto future = forecast3(model.lstm, past);
    const double dod_p = model.fls.infer(past);
    const double dod_f = model.fls.infer(future);
    const double g = fuse(dod_p, dod_f);
    trace.past_triple = past;
    trace.forecast_triple = future;
    trace.dod_p = dod_p;
    trace.dod_f = dod_f;
    trace.fused = g;
    if (g > policy.theta) trace.decision = Decision::disseminate;
  }
  if (trace.decision == Decision::hold && clock.due(step)) trace.decision = Decision::forced;
  return trace;
}

struct MessageEntry {
  std::size_t node_id = 0;
  std::int64_t step = 0;
  std::int64_t t_star = 0;  // steps since the epoch opened
  std::size_t payload_length = 0;
  Decision kind = Decision::forced;
  double drift = 0.0;  // L1 distance between delivered and previously delivered synopsis

  bool operator==(const MessageEntry&) const = default;
};

struct MessageLog {
  std::vector<MessageEntry> entries;

  std::size_t count(Decision kind) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.kind == kind;
    return n;
  }
  bool operator==(const MessageLog&) const = default;
};

// Mutable per-node state shared by every policy.
struct NodeState {
  std::size_t node_id = 0;
  Synopsis current;
  Synopsis last_sent;
  Synopsis previous;
  QuantaSeries quanta;
  EpochClock clock;
  QuantumBaseline baseline = QuantumBaseline::since_last_sent;

  NodeState() = default;
  NodeState(std::size_t id, const Synopsis& start, EpochClock c,
            QuantumBaseline b = QuantumBaseline::since_last_sent)
      : node_id(id), current(start), last_sent(start), previous(start), clock(c), baseline(b) {}

  // Absorbs a vector and records the resulting quantum.
  UpdateQuantum observe(std::span<const double> x, std::int64_t step) {
    previous = current;
    current.add(x);
    const auto& ref = baseline == QuantumBaseline::since_last_sent ? last_sent : previous;
    UpdateQuantum e{l1_distance(current.values, ref.values), step};
    quanta.push(e);
    return e;
  }
};

// Ships the current synopsis: appends to the log, resets the baseline, clears
// the quanta and opens a new epoch.
inline void on_disseminate(NodeState& node, std::int64_t step, Decision kind, MessageLog& log) {
  if (kind == Decision::hold) throw std::logic_error("on_disseminate called for a hold decision");
  MessageEntry m;
  m.node_id = node.node_id;
  m.step = step;
  m.t_star = step - node.clock.last_dissemination();
  m.payload_length = node.current.values.size();
  m.kind = kind;
  m.drift = l1_distance(node.current.values, node.last_sent.values);
  log.entries.push_back(m);
  node.last_sent = node.current;
  node.quanta.clear();
  node.clock.on_dissemination(step);
}

}  // namespace udsdm
