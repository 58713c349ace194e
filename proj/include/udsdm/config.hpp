#pragma once

// Line-oriented key-value overrides for the model and simulator defaults.
//
//   # comment
//   fuzzy.low = 0, 0, 0.5            upper triangle (left, apex, right)
//   fuzzy.medium = 0.1, 0.5, 0.9
//   fuzzy.high = 0.5, 1, 1
//   fuzzy.lower_scale = 0.8
//   fuzzy.centroid.low = 0.15, 0.25  consequent centroid interval
//   lstm.hidden = 32                 also learning_rate, epochs, window,
//                                    activation, clip, init_scale, max_windows
//   holt.alpha = 0.5                 also beta, window
//   sim.calibration_period = 10      also calibration_burn_in, train_split,
//                                    max_steps, quantum_baseline
//
// Unknown keys and malformed values are errors that name the line.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "udsdm/simulator.hpp"

namespace udsdm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Values separated by commas and/or whitespace.
inline std::vector<double> parse_reals(std::string_view text, std::size_t expected, const std::string& where) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    pos = text.find_first_not_of(" \t,", pos);
    if (pos == std::string_view::npos) break;
    auto end = text.find_first_of(" \t,", pos);
    if (end == std::string_view::npos) end = text.size();
    const auto item = text.substr(pos, end - pos);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(where + ": '" + std::string(item) + "' is not a number");
    }
    out.push_back(v);
    pos = end;
  }
  if (out.size() != expected) {
    throw ConfigError(where + ": expected " + std::to_string(expected) + " value(s), got " +
                      std::to_string(out.size()));
  }
  return out;
}

template <class Int>
Int parse_integer(std::string_view text, const std::string& where) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(where + ": '" + std::string(text) + "' is not an integer");
  }
  return v;
}

inline Term term_named(std::string_view name, const std::string& where) {
  if (name == "low") return Term::low;
  if (name == "medium") return Term::medium;
  if (name == "high") return Term::high;
  throw ConfigError(where + ": unknown fuzzy term '" + std::string(name) + "'");
}

}  // namespace detail

// Applies overrides from a stream onto cfg. Validation of the combined
// result happens here too, so an inconsistent file fails before any run.
inline void apply_config(std::istream& in, SimConfig& cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "config line " + std::to_string(line_no);
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const auto key = detail::trim(text.substr(0, eq));
    const auto value = detail::trim(text.substr(eq + 1));
    auto& m = cfg.model;

    auto real = [&] { return detail::parse_reals(value, 1, where)[0]; };
    if (key.starts_with("fuzzy.centroid.")) {
      const auto t = detail::term_named(key.substr(15), where);
      const auto v = detail::parse_reals(value, 2, where);
      m.rules.consequent_centroids[static_cast<std::size_t>(t)] = {v[0], v[1]};
    } else if (key == "fuzzy.low" || key == "fuzzy.medium" || key == "fuzzy.high") {
      const auto t = detail::term_named(key.substr(6), where);
      const auto v = detail::parse_reals(value, 3, where);
      m.term_sets[static_cast<std::size_t>(t)].upper_mf = {v[0], v[1], v[2]};
    } else if (key == "fuzzy.lower_scale") {
      const double s = real();
      for (auto& set : m.term_sets) set.lower_scale = s;
    } else if (key == "lstm.hidden") {
      m.lstm.hidden_size = detail::parse_integer<std::size_t>(value, where);
    } else if (key == "lstm.learning_rate") {
      m.lstm.learning_rate = real();
    } else if (key == "lstm.epochs") {
      m.lstm.epochs = detail::parse_integer<int>(value, where);
    } else if (key == "lstm.window") {
      m.lstm.window_length = detail::parse_integer<std::size_t>(value, where);
    } else if (key == "lstm.activation") {
      try {
        m.lstm.activation = parse_activation(std::string(value));
      } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
      }
    } else if (key == "lstm.clip") {
      m.lstm.clip_norm = real();
    } else if (key == "lstm.init_scale") {
      m.lstm.init_scale = real();
    } else if (key == "lstm.max_windows") {
      m.lstm.max_windows_per_epoch = detail::parse_integer<std::size_t>(value, where);
    } else if (key == "holt.alpha") {
      m.holt.alpha = real();
    } else if (key == "holt.beta") {
      m.holt.beta = real();
    } else if (key == "holt.window") {
      m.holt.window = detail::parse_integer<std::size_t>(value, where);
    } else if (key == "sim.calibration_period") {
      m.calibration_period = detail::parse_integer<std::int64_t>(value, where);
    } else if (key == "sim.calibration_burn_in") {
      m.calibration_burn_in = real();
    } else if (key == "sim.train_split") {
      cfg.train_split = real();
    } else if (key == "sim.max_steps") {
      cfg.max_steps = detail::parse_integer<std::int64_t>(value, where);
    } else if (key == "sim.quantum_baseline") {
      if (value == "since_last_sent") {
        m.baseline = QuantumBaseline::since_last_sent;
      } else if (value == "previous_step") {
        m.baseline = QuantumBaseline::previous_step;
      } else {
        throw ConfigError(where + ": quantum_baseline must be since_last_sent or previous_step");
      }
    } else {
      throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
    }
  }
  try {
    cfg.validate();
    FuzzySystem check(cfg.model.term_sets, cfg.model.rules);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline void apply_config_text(const std::string& text, SimConfig& cfg) {
  std::istringstream in(text);
  apply_config(in, cfg);
}

inline void apply_config_file(const std::string& path, SimConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config(in, cfg);
}

}  // namespace udsdm
