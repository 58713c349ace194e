#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace udsdm {

using ContextVector = std::vector<double>;

// Per-dimension running mean followed by per-dimension population standard
// deviation, so values.size() == 2 * dims(). m2 carries the Welford sums of
// squared deviations that the standard deviations are derived from.
struct Synopsis {
  std::vector<double> values;
  std::vector<double> m2;
  std::int64_t step = 0;
  std::int64_t count = 0;

  static Synopsis empty(std::size_t dims) {
    Synopsis s;
    s.values.assign(2 * dims, 0.0);
    s.m2.assign(dims, 0.0);
    return s;
  }

  std::size_t dims() const { return m2.size(); }
  std::span<const double> means() const { return {values.data(), dims()}; }
  std::span<const double> stddevs() const { return {values.data() + dims(), dims()}; }

  // Welford update; throws on dimension mismatch or non-finite input.
  void add(std::span<const double> x) {
    const std::size_t d = dims();
    if (x.size() != d) {
      throw std::invalid_argument("synopsis: vector has " + std::to_string(x.size()) +
                                  " components, expected " + std::to_string(d));
    }
    for (double v : x) {
      if (!std::isfinite(v)) throw std::invalid_argument("synopsis: non-finite component");
    }
    ++count;
    ++step;
    const double n = static_cast<double>(count);
    for (std::size_t j = 0; j < d; ++j) {
      const double mean = values[j];
      const double next = mean + (x[j] - mean) / n;
      m2[j] += (x[j] - mean) * (x[j] - next);
      if (m2[j] < 0.0) m2[j] = 0.0;
      values[j] = next;
      values[d + j] = std::sqrt(m2[j] / n);
    }
  }
};

inline Synopsis update_synopsis(const Synopsis& current, std::span<const double> x) {
  Synopsis next = current;
  next.add(x);
  return next;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("l1_distance: length mismatch " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += std::abs(a[j] - b[j]);
  return sum;
}

struct UpdateQuantum {
  double value = 0.0;
  std::int64_t step = 0;
};

inline UpdateQuantum update_quantum(const Synopsis& current, const Synopsis& last_sent) {
  return {l1_distance(current.values, last_sent.values), current.step};
}

// Which synopsis the quantum is measured against. since_last_sent is the
// default; previous_step is kept for sensitivity runs.
enum class QuantumBaseline { since_last_sent, previous_step };

struct NormalizationCalibration {
  double min = 0.0;
  double max = 1.0;

  void validate() const {
    if (!std::isfinite(min) || !std::isfinite(max) || !(max > min)) {
      throw std::invalid_argument("normalization: need finite min < max");
    }
  }

  static NormalizationCalibration from_quanta(std::span<const double> raw) {
    if (raw.empty()) throw std::invalid_argument("normalization: no quanta to calibrate on");
    auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    NormalizationCalibration cal{*lo, *hi};
    // A flat training series still needs a usable scale.
    if (!(cal.max > cal.min)) cal.max = cal.min + 1.0;
    cal.validate();
    return cal;
  }
};

inline double normalize_quantum(double raw, const NormalizationCalibration& cal) {
  if (!std::isfinite(raw)) throw std::invalid_argument("normalize_quantum: non-finite quantum");
  return std::clamp((raw - cal.min) / (cal.max - cal.min), 0.0, 1.0);
}

inline double normalize_quantum(const UpdateQuantum& e, const NormalizationCalibration& cal) {
  return normalize_quantum(e.value, cal);
}

// Quanta observed since the last dissemination.
class QuantaSeries {
 public:
  void push(const UpdateQuantum& e) {
    if (!quanta_.empty() && e.step <= quanta_.back().step) {
      throw std::invalid_argument("quanta series: steps must be strictly increasing");
    }
    if (!(e.value >= 0.0) || !std::isfinite(e.value)) {
      throw std::invalid_argument("quanta series: quantum must be finite and non-negative");
    }
    quanta_.push_back(e);
  }

  void clear() { quanta_.clear(); }
  std::size_t size() const { return quanta_.size(); }
  bool empty() const { return quanta_.empty(); }
  const UpdateQuantum& back() const { return quanta_.back(); }
  const UpdateQuantum& operator[](std::size_t i) const { return quanta_[i]; }
  const std::vector<UpdateQuantum>& entries() const { return quanta_; }

 private:
  std::vector<UpdateQuantum> quanta_;
};

}  // namespace udsdm
