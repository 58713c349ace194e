#pragma once

// Single-layer scalar-input LSTM with a linear readout, trained by
// backpropagation through time on sliding windows of normalized quanta.
//
// Parameter layout (also the order of the saved model file): for each gate
// in {forget, input, output, candidate}
//     U[H]        input weights
//     Z[H*H]      recurrent weights, row-major, Z[r*H + c] maps h[c] -> unit r
//     b[H]        biases
// followed by the readout weights w[H] and the readout bias.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "udsdm/rng.hpp"

namespace udsdm {

enum class CandidateActivation { logistic, tanh };

inline const char* to_string(CandidateActivation a) {
  return a == CandidateActivation::logistic ? "logistic" : "tanh";
}

inline CandidateActivation parse_activation(const std::string& s) {
  if (s == "logistic" || s == "sigmoid") return CandidateActivation::logistic;
  if (s == "tanh") return CandidateActivation::tanh;
  throw std::invalid_argument("unknown candidate activation '" + s + "'");
}

enum class Gate : std::size_t { forget = 0, input = 1, output = 2, candidate = 3 };
inline constexpr std::size_t kGateCount = 4;

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

class LstmCell {
 public:
  LstmCell() = default;
  explicit LstmCell(std::size_t hidden, CandidateActivation act = CandidateActivation::logistic)
      : hidden_(hidden), activation_(act), params_(parameter_count(hidden), 0.0) {
    if (hidden == 0) throw std::invalid_argument("lstm: hidden size must be >= 1");
  }

  static std::size_t parameter_count(std::size_t hidden) {
    return kGateCount * gate_block(hidden) + hidden + 1;
  }

  std::size_t hidden_size() const { return hidden_; }
  CandidateActivation activation() const { return activation_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::span<double> input_weights(Gate g) { return {params_.data() + gate_offset(g), hidden_}; }
  std::span<const double> input_weights(Gate g) const {
    return {params_.data() + gate_offset(g), hidden_};
  }
  std::span<double> recurrent_weights(Gate g) {
    return {params_.data() + gate_offset(g) + hidden_, hidden_ * hidden_};
  }
  std::span<const double> recurrent_weights(Gate g) const {
    return {params_.data() + gate_offset(g) + hidden_, hidden_ * hidden_};
  }
  std::span<double> bias(Gate g) {
    return {params_.data() + gate_offset(g) + hidden_ + hidden_ * hidden_, hidden_};
  }
  std::span<const double> bias(Gate g) const {
    return {params_.data() + gate_offset(g) + hidden_ + hidden_ * hidden_, hidden_};
  }
  std::span<double> readout_weights() {
    return {params_.data() + kGateCount * gate_block(hidden_), hidden_};
  }
  std::span<const double> readout_weights() const {
    return {params_.data() + kGateCount * gate_block(hidden_), hidden_};
  }
  double& readout_bias() { return params_.back(); }
  double readout_bias() const { return params_.back(); }

  void randomize(std::uint64_t seed, double scale = 0.1) {
    Rng rng(seed);
    for (double& p : params_) p = rng.uniform(-scale, scale);
  }

  bool operator==(const LstmCell&) const = default;

 private:
  static std::size_t gate_block(std::size_t h) { return 2 * h + h * h; }
  std::size_t gate_offset(Gate g) const { return static_cast<std::size_t>(g) * gate_block(hidden_); }

  std::size_t hidden_ = 0;
  CandidateActivation activation_ = CandidateActivation::logistic;
  std::vector<double> params_;
};

struct LstmState {
  std::vector<double> hidden;
  std::vector<double> cell;

  static LstmState zero(std::size_t h) { return {std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)}; }
};

namespace detail {

// Everything BPTT needs from one forward step.
struct StepCache {
  double input = 0.0;
  std::vector<double> h_prev, c_prev;
  std::array<std::vector<double>, kGateCount> act;  // f, i, o, candidate
  std::vector<double> c, tanh_c, h;
  double y = 0.0;
};

inline void forward_step(const LstmCell& cell, double x, std::span<const double> h_prev,
                         std::span<const double> c_prev, StepCache& out) {
  const std::size_t H = cell.hidden_size();
  out.input = x;
  out.h_prev.assign(h_prev.begin(), h_prev.end());
  out.c_prev.assign(c_prev.begin(), c_prev.end());
  for (std::size_t g = 0; g < kGateCount; ++g) {
    const auto gate = static_cast<Gate>(g);
    const auto U = cell.input_weights(gate);
    const auto Z = cell.recurrent_weights(gate);
    const auto b = cell.bias(gate);
    auto& a = out.act[g];
    a.resize(H);
    for (std::size_t r = 0; r < H; ++r) {
      double z = b[r] + U[r] * x;
      const double* row = Z.data() + r * H;
      for (std::size_t c = 0; c < H; ++c) z += row[c] * h_prev[c];
      if (gate == Gate::candidate && cell.activation() == CandidateActivation::tanh) {
        a[r] = std::tanh(z);
      } else {
        a[r] = logistic(z);
      }
    }
  }
  out.c.resize(H);
  out.tanh_c.resize(H);
  out.h.resize(H);
  const auto& f = out.act[0];
  const auto& in = out.act[1];
  const auto& o = out.act[2];
  const auto& g = out.act[3];
  const auto w = cell.readout_weights();
  double y = cell.readout_bias();
  for (std::size_t r = 0; r < H; ++r) {
    out.c[r] = f[r] * c_prev[r] + in[r] * g[r];
    out.tanh_c[r] = std::tanh(out.c[r]);
    out.h[r] = out.tanh_c[r] * o[r];
    y += w[r] * out.h[r];
  }
  out.y = y;
  if (!std::isfinite(y)) throw std::runtime_error("lstm: non-finite activation");
}

}  // namespace detail

inline LstmState lstm_step(const LstmCell& cell, const LstmState& state, double input) {
  if (!std::isfinite(input)) throw std::invalid_argument("lstm_step: non-finite input");
  detail::StepCache cache;
  detail::forward_step(cell, input, state.hidden, state.cell, cache);
  for (double v : cache.c) {
    if (!std::isfinite(v)) throw std::runtime_error("lstm_step: non-finite cell state");
  }
  return {std::move(cache.h), std::move(cache.c)};
}

inline double readout(const LstmCell& cell, const LstmState& state) {
  const auto w = cell.readout_weights();
  double y = cell.readout_bias();
  for (std::size_t r = 0; r < cell.hidden_size(); ++r) y += w[r] * state.hidden[r];
  return y;
}

// Runs the three most recent quanta through the cell from a zero state, then
// feeds each prediction back to extend the forecast to three steps ahead.
inline std::array<double, 3> forecast3(const LstmCell& cell, const std::array<double, 3>& recent) {
  for (double v : recent) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("forecast3: inputs must lie in [0,1]");
  }
  LstmState state = LstmState::zero(cell.hidden_size());
  for (double v : recent) state = lstm_step(cell, state, v);
  std::array<double, 3> out{};
  for (std::size_t k = 0; k < 3; ++k) {
    out[k] = std::clamp(readout(cell, state), 0.0, 1.0);
    if (k + 1 < 3) state = lstm_step(cell, state, out[k]);
  }
  return out;
}

// Mean squared one-step-ahead error over a window: inputs window[0..L-2],
// targets window[1..L-1], predictions read out after every input.
inline double window_loss(const LstmCell& cell, std::span<const double> window) {
  if (window.size() < 2) throw std::invalid_argument("window_loss: window needs >= 2 values");
  const std::size_t H = cell.hidden_size();
  const std::size_t K = window.size() - 1;
  detail::StepCache cache;
  std::vector<double> h(H, 0.0), c(H, 0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    detail::forward_step(cell, window[k], h, c, cache);
    const double err = cache.y - window[k + 1];
    loss += err * err;
    h.swap(cache.h);
    c.swap(cache.c);
  }
  return loss / static_cast<double>(K);
}

// Same loss as window_loss; writes d(loss)/d(parameters) into grad
// (overwritten, sized parameter_count).
inline double window_loss_gradient(const LstmCell& cell, std::span<const double> window,
                                   std::span<double> grad) {
  if (window.size() < 2) throw std::invalid_argument("window_loss: window needs >= 2 values");
  const std::size_t H = cell.hidden_size();
  if (grad.size() != LstmCell::parameter_count(H)) {
    throw std::invalid_argument("window_loss_gradient: gradient buffer has wrong size");
  }
  const std::size_t K = window.size() - 1;
  std::vector<detail::StepCache> caches(K);
  std::vector<double> h(H, 0.0), c(H, 0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    detail::forward_step(cell, window[k], h, c, caches[k]);
    const double err = caches[k].y - window[k + 1];
    loss += err * err;
    h = caches[k].h;
    c = caches[k].c;
  }
  loss /= static_cast<double>(K);

  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t readout_off = kGateCount * (2 * H + H * H);
  auto gate_off = [H](std::size_t g) { return g * (2 * H + H * H); };

  const auto w = cell.readout_weights();
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dh(H), dc(H);
  std::array<std::vector<double>, kGateCount> da;
  for (auto& v : da) v.resize(H);

  for (std::size_t kk = K; kk-- > 0;) {
    const auto& s = caches[kk];
    const double dy = 2.0 * (s.y - window[kk + 1]) / static_cast<double>(K);
    for (std::size_t r = 0; r < H; ++r) grad[readout_off + r] += dy * s.h[r];
    grad[readout_off + H] += dy;

    const auto& f = s.act[0];
    const auto& in = s.act[1];
    const auto& o = s.act[2];
    const auto& g = s.act[3];
    for (std::size_t r = 0; r < H; ++r) {
      dh[r] = dy * w[r] + dh_next[r];
      const double d_o = dh[r] * s.tanh_c[r];
      dc[r] = dh[r] * o[r] * (1.0 - s.tanh_c[r] * s.tanh_c[r]) + dc_next[r];
      const double d_f = dc[r] * s.c_prev[r];
      const double d_i = dc[r] * g[r];
      const double d_g = dc[r] * in[r];
      dc_next[r] = dc[r] * f[r];
      da[0][r] = d_f * f[r] * (1.0 - f[r]);
      da[1][r] = d_i * in[r] * (1.0 - in[r]);
      da[2][r] = d_o * o[r] * (1.0 - o[r]);
      da[3][r] = cell.activation() == CandidateActivation::tanh ? d_g * (1.0 - g[r] * g[r])
                                                                 : d_g * g[r] * (1.0 - g[r]);
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t gi = 0; gi < kGateCount; ++gi) {
      const std::size_t off = gate_off(gi);
      const auto Z = cell.recurrent_weights(static_cast<Gate>(gi));
      for (std::size_t r = 0; r < H; ++r) {
        const double a = da[gi][r];
        grad[off + r] += a * s.input;
        double* zrow = grad.data() + off + H + r * H;
        const double* wrow = Z.data() + r * H;
        for (std::size_t cc = 0; cc < H; ++cc) {
          zrow[cc] += a * s.h_prev[cc];
          dh_next[cc] += wrow[cc] * a;
        }
        grad[off + H + H * H + r] += a;
      }
    }
  }
  return loss;
}

struct GradientCheckOptions {
  double step = 1e-5;
  double absolute_floor = 1e-8;
};

// Max relative error between analytic and central-difference gradients of
// window_loss. Where both gradients are below absolute_floor in magnitude the
// absolute gap is judged instead (any gap above the floor reports 1).
inline double gradient_check(const LstmCell& cell, std::span<const double> window,
                             GradientCheckOptions opt = {}) {
  std::vector<double> analytic(LstmCell::parameter_count(cell.hidden_size()));
  window_loss_gradient(cell, window, analytic);
  LstmCell probe = cell;
  auto params = probe.parameters();
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + opt.step;
    const double up = window_loss(probe, window);
    params[p] = saved - opt.step;
    const double down = window_loss(probe, window);
    params[p] = saved;
    const double numeric = (up - down) / (2.0 * opt.step);
    const double diff = std::abs(analytic[p] - numeric);
    const double scale = std::max(std::abs(analytic[p]), std::abs(numeric));
    // Both effectively zero: judge the absolute gap instead.
    if (scale <= opt.absolute_floor) {
      if (diff > opt.absolute_floor) worst = std::max(worst, 1.0);
      continue;
    }
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

struct TrainConfig {
  std::size_t hidden_size = 32;
  double learning_rate = 0.1;
  int epochs = 100;
  std::size_t window_length = 4;
  std::uint64_t seed = 1;
  CandidateActivation activation = CandidateActivation::logistic;
  double clip_norm = 5.0;
  double init_scale = 0.1;
  // Windows are subsampled per epoch beyond this many; 0 means use all.
  std::size_t max_windows_per_epoch = 256;

  void validate() const {
    if (hidden_size < 1) throw std::invalid_argument("train: hidden size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
    if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (window_length < 4) throw std::invalid_argument("train: window length must be >= 4");
    if (!(clip_norm > 0.0)) throw std::invalid_argument("train: clip norm must be > 0");
  }

  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  LstmCell cell;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

namespace detail {

inline double mean_loss(const LstmCell& cell, const std::vector<std::span<const double>>& windows) {
  // Evaluate on at most this many evenly strided windows.
  constexpr std::size_t kMaxEval = 4096;
  const std::size_t stride = std::max<std::size_t>(1, windows.size() / kMaxEval);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < windows.size(); i += stride, ++n) sum += window_loss(cell, windows[i]);
  return sum / static_cast<double>(n);
}

}  // namespace detail

// Trains on every window of cfg.window_length lying inside one segment.
// Segments are independent runs of quanta (e.g. between disseminations).
inline TrainResult train(std::span<const std::vector<double>> segments, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<std::span<const double>> windows;
  for (const auto& seg : segments) {
    for (double v : seg) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("train: quanta must lie in [0,1]");
    }
    if (seg.size() < cfg.window_length) continue;
    for (std::size_t i = 0; i + cfg.window_length <= seg.size(); ++i) {
      windows.emplace_back(seg.data() + i, cfg.window_length);
    }
  }
  if (windows.empty()) {
    throw std::invalid_argument("train: series shorter than window length " +
                                std::to_string(cfg.window_length));
  }

  TrainResult result{LstmCell(cfg.hidden_size, cfg.activation), 0.0, 0.0};
  result.cell.randomize(cfg.seed, cfg.init_scale);
  const LstmCell initial = result.cell;
  result.initial_loss = detail::mean_loss(result.cell, windows);

  Rng rng(mix_seed(cfg.seed, 0x7261696eULL));
  std::vector<std::size_t> order(windows.size());
  std::vector<double> grad(LstmCell::parameter_count(cfg.hidden_size));
  auto params = result.cell.parameters();
  const std::size_t per_epoch = cfg.max_windows_per_epoch == 0
                                    ? windows.size()
                                    : std::min(windows.size(), cfg.max_windows_per_epoch);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Partial Fisher-Yates: the first per_epoch entries are a uniform sample.
    for (std::size_t i = 0; i < per_epoch; ++i) {
      std::swap(order[i], order[i + rng.below(order.size() - i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t i = 0; i < per_epoch; ++i) {
      const double loss = window_loss_gradient(result.cell, windows[order[i]], grad);
      epoch_loss += loss;
      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g;
      const double norm = std::sqrt(norm2);
      if (!std::isfinite(norm)) {
        throw std::runtime_error("lstm training diverged at epoch " + std::to_string(epoch + 1));
      }
      const double scale = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= cfg.learning_rate * scale * grad[p];
    }
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("lstm training diverged at epoch " + std::to_string(epoch + 1));
    }
  }

  result.final_loss = detail::mean_loss(result.cell, windows);
  if (!std::isfinite(result.final_loss)) {
    throw std::runtime_error("lstm training diverged at epoch " + std::to_string(cfg.epochs));
  }
  if (result.final_loss > result.initial_loss) {
    result.cell = initial;
    result.final_loss = result.initial_loss;
  }
  return result;
}

inline TrainResult train(std::span<const double> series, const TrainConfig& cfg) {
  const std::vector<std::vector<double>> one{std::vector<double>(series.begin(), series.end())};
  return train(std::span<const std::vector<double>>(one), cfg);
}

// Text model file: header line "LSTM1,<H>,<activation>" then one parameter
// per line in the layout order documented at the top of this header.
inline void save_cell(const LstmCell& cell, std::ostream& out) {
  out << "LSTM1," << cell.hidden_size() << ',' << to_string(cell.activation()) << '\n';
  out << std::setprecision(17);
  for (double p : cell.parameters()) out << p << '\n';
  if (!out) throw std::runtime_error("save_cell: write failed");
}

inline void save_cell(const LstmCell& cell, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_cell(cell, out);
}

inline LstmCell load_cell(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("load_cell: empty model file");
  std::stringstream hs(header);
  std::string tag, hidden, act;
  std::getline(hs, tag, ',');
  std::getline(hs, hidden, ',');
  std::getline(hs, act, ',');
  if (tag != "LSTM1") throw std::runtime_error("load_cell: bad header '" + header + "'");
  std::size_t h = 0;
  try {
    h = std::stoul(hidden);
  } catch (const std::exception&) {
    throw std::runtime_error("load_cell: bad hidden size in header '" + header + "'");
  }
  LstmCell cell(h, parse_activation(act));
  std::size_t i = 0;
  for (double& p : cell.parameters()) {
    std::string line;
    if (!std::getline(in, line)) {
      throw std::runtime_error("load_cell: expected " + std::to_string(cell.parameters().size()) +
                               " parameters, got " + std::to_string(i));
    }
    try {
      p = std::stod(line);
    } catch (const std::exception&) {
      throw std::runtime_error("load_cell: bad parameter on line " + std::to_string(i + 2));
    }
    if (!std::isfinite(p)) throw std::runtime_error("load_cell: non-finite parameter");
    ++i;
  }
  return cell;
}

inline LstmCell load_cell(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  return load_cell(in);
}

}  // namespace udsdm
