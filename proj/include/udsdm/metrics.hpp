#pragma once

// Evaluation metrics over dissemination logs:
//   phi   - mean fraction of the epoch elapsed before delivery (t*/T)
//   delta - mean L1 drift between delivered and previously delivered synopsis
//   psi   - T divided by the number of deliveries in a T-long window,
//           averaged over the complete windows of the run

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "udsdm/decision.hpp"
#include "udsdm/synopsis.hpp"

namespace udsdm {

// Per-experiment lists of t* (steps since the epoch opened, each in [1, T]);
// averaged within each experiment, then across experiments.
inline double compute_phi(std::span<const std::vector<std::int64_t>> stops, std::int64_t epoch_length) {
  if (epoch_length <= 0) throw std::invalid_argument("compute_phi: T must be > 0");
  if (stops.empty()) throw std::invalid_argument("compute_phi: no experiments");
  double total = 0.0;
  for (const auto& exp : stops) {
    if (exp.empty()) throw std::invalid_argument("compute_phi: experiment without stops");
    double sum = 0.0;
    for (auto t : exp) {
      if (t < 1 || t > epoch_length) {
        throw std::invalid_argument("compute_phi: t* = " + std::to_string(t) + " outside [1, T]");
      }
      sum += static_cast<double>(t) / static_cast<double>(epoch_length);
    }
    total += sum / static_cast<double>(exp.size());
  }
  return total / static_cast<double>(stops.size());
}

inline double compute_phi(const std::vector<std::int64_t>& stops, std::int64_t epoch_length) {
  return compute_phi(std::span<const std::vector<std::int64_t>>(&stops, 1), epoch_length);
}

// Per-experiment lists of drift magnitudes at the delivery instants.
inline double compute_delta(std::span<const std::vector<double>> distances) {
  if (distances.empty()) throw std::invalid_argument("compute_delta: no experiments");
  double total = 0.0;
  for (const auto& exp : distances) {
    if (exp.empty()) throw std::invalid_argument("compute_delta: experiment without stops");
    double sum = 0.0;
    for (double d : exp) sum += d;
    total += sum / static_cast<double>(exp.size());
  }
  return total / static_cast<double>(distances.size());
}

inline double compute_delta(const std::vector<double>& distances) {
  return compute_delta(std::span<const std::vector<double>>(&distances, 1));
}

struct StopPair {
  std::vector<double> at_stop;
  std::vector<double> last_sent;
};

inline double compute_delta(std::span<const std::vector<StopPair>> pairs) {
  std::vector<std::vector<double>> distances;
  distances.reserve(pairs.size());
  for (const auto& exp : pairs) {
    auto& d = distances.emplace_back();
    for (const auto& p : exp) d.push_back(l1_distance(p.at_stop, p.last_sent));
  }
  return compute_delta(distances);
}

inline double compute_psi(std::int64_t epoch_length, std::int64_t stop_count) {
  if (epoch_length <= 0) throw std::invalid_argument("compute_psi: T must be > 0");
  if (stop_count < 1) throw std::invalid_argument("compute_psi: window without stops");
  return static_cast<double>(epoch_length) / static_cast<double>(stop_count);
}

struct NodeWindowInfo {
  std::size_t node_id = 0;
  std::int64_t phase_offset = 0;
  std::int64_t active_steps = 0;  // evaluation steps the node consumed data on
};

// What a stored run needs for metric computation.
struct RunRecord {
  std::int64_t epoch_length = 0;
  std::vector<NodeWindowInfo> nodes;
  MessageLog log;
};

struct EpochDetail {
  std::size_t experiment = 0;
  std::size_t node_id = 0;
  std::int64_t window_start = 0;  // exclusive
  std::int64_t window_end = 0;    // inclusive
  std::int64_t stops = 0;
  double psi = 0.0;
};

struct MetricsReport {
  double phi = 0.0;
  double delta = 0.0;
  double psi = 0.0;
  std::size_t messages_voluntary = 0;
  std::size_t messages_forced = 0;
  std::size_t experiments = 0;
  std::vector<EpochDetail> epochs;
};

// Complete windows (start + kT, start + (k+1)T] inside [1, active_steps],
// start being the node's phase offset.
inline std::vector<EpochDetail> window_stop_counts(const RunRecord& run, std::size_t experiment = 0) {
  std::vector<EpochDetail> out;
  const std::int64_t T = run.epoch_length;
  for (const auto& node : run.nodes) {
    std::vector<std::int64_t> steps;
    for (const auto& m : run.log.entries) {
      if (m.node_id == node.node_id) steps.push_back(m.step);
    }
    std::size_t cursor = 0;
    for (std::int64_t start = node.phase_offset; start + T <= node.active_steps; start += T) {
      EpochDetail d{experiment, node.node_id, start, start + T, 0, 0.0};
      while (cursor < steps.size() && steps[cursor] <= start) ++cursor;
      std::size_t j = cursor;
      while (j < steps.size() && steps[j] <= start + T) ++j;
      d.stops = static_cast<std::int64_t>(j - cursor);
      if (d.stops > 0) d.psi = compute_psi(T, d.stops);
      out.push_back(d);
    }
  }
  return out;
}

inline MetricsReport compute_metrics(std::span<const RunRecord> runs) {
  if (runs.empty()) throw std::invalid_argument("compute_metrics: no runs");
  MetricsReport report;
  report.experiments = runs.size();
  const std::int64_t T = runs.front().epoch_length;
  std::vector<std::vector<std::int64_t>> stops;
  std::vector<std::vector<double>> drifts;
  double psi_total = 0.0;
  for (std::size_t e = 0; e < runs.size(); ++e) {
    const auto& run = runs[e];
    if (run.epoch_length != T) throw std::invalid_argument("compute_metrics: runs disagree on T");
    auto& s = stops.emplace_back();
    auto& d = drifts.emplace_back();
    for (const auto& m : run.log.entries) {
      s.push_back(m.t_star);
      d.push_back(m.drift);
      (m.kind == Decision::forced ? report.messages_forced : report.messages_voluntary)++;
    }
    auto windows = window_stop_counts(run, e);
    if (windows.empty()) throw std::invalid_argument("compute_metrics: run shorter than one epoch");
    double psi_sum = 0.0;
    for (const auto& w : windows) {
      if (w.stops < 1) throw std::invalid_argument("compute_metrics: epoch window without a delivery");
      psi_sum += w.psi;
    }
    psi_total += psi_sum / static_cast<double>(windows.size());
    report.epochs.insert(report.epochs.end(), windows.begin(), windows.end());
  }
  report.phi = compute_phi(stops, T);
  report.delta = compute_delta(drifts);
  report.psi = psi_total / static_cast<double>(runs.size());
  return report;
}

}  // namespace udsdm
