#pragma once

// Lockstep replay of N nodes. Each node first replays the training part of
// its stream to calibrate the quantum scale (and, for UDSDM, to train its
// forecaster); the remaining part is then replayed under the chosen policy
// with every delivery accounted in a MessageLog.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "udsdm/baselines.hpp"
#include "udsdm/decision.hpp"
#include "udsdm/ingest.hpp"
#include "udsdm/lstm.hpp"
#include "udsdm/metrics.hpp"
#include "udsdm/rng.hpp"
#include "udsdm/synopsis.hpp"
#include "udsdm/t2fls.hpp"

namespace udsdm {

enum class PolicyKind { bm, pm, udsdm };

inline const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::bm: return "bm";
    case PolicyKind::pm: return "pm";
    case PolicyKind::udsdm: return "udsdm";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& s) {
  if (s == "bm") return PolicyKind::bm;
  if (s == "pm") return PolicyKind::pm;
  if (s == "udsdm") return PolicyKind::udsdm;
  throw std::invalid_argument("unknown policy '" + s + "' (expected udsdm, bm or pm)");
}

enum class DatasetFormat { intel, csv };

struct HoltConfig {
  double alpha = 0.5;
  double beta = 0.5;
  std::size_t window = 10;

  bool operator==(const HoltConfig&) const = default;
};

struct ModelConfig {
  TermSets term_sets = default_term_sets();
  RuleBase rules = RuleBase::monotone_default();
  TrainConfig lstm;
  HoltConfig holt;
  // During the training replay the node delivers every calibration_period
  // steps; the quanta seen between those deliveries calibrate the [0,1] scale
  // and form the forecaster's training segments.
  std::int64_t calibration_period = 10;
  // Leading training vectors absorbed into the synopsis before quanta are
  // collected; skips the start-up transient of an empty synopsis.
  double calibration_burn_in = 0.1;
  QuantumBaseline baseline = QuantumBaseline::since_last_sent;
};

struct SimConfig {
  std::size_t n_nodes = 6;
  std::int64_t epoch_length = 100;
  double theta = 0.6;
  PolicyKind policy = PolicyKind::udsdm;
  std::uint64_t seed = 1;
  double train_split = 0.5;
  std::string dataset_path;
  DatasetFormat dataset_format = DatasetFormat::intel;
  std::int64_t max_steps = 0;     // 0 = until streams run out
  std::size_t max_records = 0;    // 0 = whole file
  std::size_t experiments = 10;
  ModelConfig model;

  void validate() const {
    if (n_nodes < 1) throw std::invalid_argument("--nodes must be >= 1");
    if (epoch_length <= 0) throw std::invalid_argument("--epoch must be > 0");
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("--theta must lie in (0,1]");
    if (!(train_split > 0.0 && train_split < 1.0)) throw std::invalid_argument("train_split must lie in (0,1)");
    if (experiments < 1) throw std::invalid_argument("--experiments must be >= 1");
    if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
    if (model.calibration_period < 1) throw std::invalid_argument("calibration_period must be >= 1");
    if (!(model.calibration_burn_in >= 0.0 && model.calibration_burn_in < 1.0)) {
      throw std::invalid_argument("calibration_burn_in must lie in [0,1)");
    }
    if (!(model.holt.alpha > 0.0 && model.holt.alpha < 1.0) || !(model.holt.beta > 0.0 && model.holt.beta < 1.0)) {
      throw std::invalid_argument("holt alpha and beta must lie in (0,1)");
    }
    model.lstm.validate();
  }
};

// Records or streams loaded once and shared by every experiment.
struct Workload {
  DatasetFormat format = DatasetFormat::intel;
  std::vector<SensorRecord> records;
  RejectStats rejects;
  std::vector<NodeStream> csv_streams;
};

inline Workload load_workload(const SimConfig& cfg) {
  Workload w;
  w.format = cfg.dataset_format;
  if (cfg.dataset_format == DatasetFormat::intel) {
    auto parsed = parse_dataset(cfg.dataset_path, cfg.max_records);
    w.records = std::move(parsed.records);
    w.rejects = parsed.rejects;
  } else {
    w.csv_streams = parse_csv_streams(cfg.dataset_path).streams;
  }
  return w;
}

// Experiment 0 keeps the plain mote-id round robin; experiment e > 0 deals a
// seeded permutation of the motes, giving each experiment different node
// subsets. CSV workloads keep their fixed streams.
inline std::vector<NodeStream> experiment_streams(const Workload& w, std::size_t n_nodes, std::size_t experiment,
                                                  std::uint64_t seed) {
  if (w.format == DatasetFormat::csv) return w.csv_streams;
  if (experiment == 0) return build_streams(w.records, n_nodes);
  std::set<int> motes;
  for (const auto& r : w.records) motes.insert(r.mote_id);
  std::vector<int> order(motes.begin(), motes.end());
  Rng rng(mix_seed(seed, 0x6d6f7465ULL + experiment));
  rng.shuffle(order);
  return build_streams(w.records, n_nodes, order);
}

struct NodeModel {
  NormalizationCalibration calibration;
  std::optional<LstmCell> lstm;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t training_quanta = 0;
};

struct TrainingReplay {
  Synopsis synopsis_at_split;
  std::vector<std::vector<double>> segments;  // raw quanta between training deliveries
};

// Replays stream[0, split) with a delivery every calibration_period steps.
inline TrainingReplay replay_training_split(const NodeStream& stream, std::size_t split, const ModelConfig& m) {
  if (stream.vectors.empty()) throw std::invalid_argument("node " + std::to_string(stream.node_id) + " has an empty stream");
  TrainingReplay out;
  Synopsis current = Synopsis::empty(stream.dims());
  const auto burn_in = static_cast<std::size_t>(m.calibration_burn_in * static_cast<double>(split));
  std::size_t k = 0;
  for (; k < std::max<std::size_t>(burn_in, 1) && k < split; ++k) current.add(stream.vectors[k]);
  Synopsis last_sent = current, previous = current;
  std::vector<double> segment;
  std::int64_t since = 0;
  for (; k < split; ++k) {
    previous = current;
    current.add(stream.vectors[k]);
    const auto& ref = m.baseline == QuantumBaseline::since_last_sent ? last_sent : previous;
    segment.push_back(l1_distance(current.values, ref.values));
    if (++since == m.calibration_period) {
      out.segments.push_back(std::move(segment));
      segment.clear();
      last_sent = current;
      since = 0;
    }
  }
  if (!segment.empty()) out.segments.push_back(std::move(segment));
  out.synopsis_at_split = current;
  return out;
}

struct PreparedNode {
  NodeStream stream;
  std::size_t split = 0;
  Synopsis synopsis_at_split;
  NodeModel model;
};

struct PreparedExperiment {
  std::size_t index = 0;
  std::vector<PreparedNode> nodes;
};

inline std::uint64_t node_seed(std::uint64_t seed, std::size_t experiment, std::size_t node) {
  return mix_seed(mix_seed(seed, experiment), node);
}

// Calibrates every node and, when with_lstm, trains its forecaster on the
// normalized training segments.
inline PreparedExperiment prepare_experiment(std::vector<NodeStream> streams, const SimConfig& cfg,
                                             std::size_t experiment, bool with_lstm) {
  PreparedExperiment out;
  out.index = experiment;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    PreparedNode node;
    node.stream = std::move(streams[i]);
    if (node.stream.vectors.empty()) {
      throw std::invalid_argument("node " + std::to_string(i) + " has an empty stream");
    }
    node.split = static_cast<std::size_t>(cfg.train_split * static_cast<double>(node.stream.vectors.size()));
    if (node.split < 2 || node.split >= node.stream.vectors.size()) {
      throw std::invalid_argument("node " + std::to_string(i) + " stream too short to split for training");
    }
    auto replay = replay_training_split(node.stream, node.split, cfg.model);
    node.synopsis_at_split = replay.synopsis_at_split;
    std::vector<double> flat;
    for (const auto& s : replay.segments) flat.insert(flat.end(), s.begin(), s.end());
    node.model.training_quanta = flat.size();
    node.model.calibration = NormalizationCalibration::from_quanta(flat);
    if (with_lstm) {
      for (auto& s : replay.segments) {
        for (double& v : s) v = normalize_quantum(v, node.model.calibration);
      }
      TrainConfig tc = cfg.model.lstm;
      tc.seed = node_seed(cfg.seed, experiment, i);
      auto trained = train(std::span<const std::vector<double>>(replay.segments), tc);
      node.model.lstm = std::move(trained.cell);
      node.model.initial_loss = trained.initial_loss;
      node.model.final_loss = trained.final_loss;
    }
    out.nodes.push_back(std::move(node));
  }
  return out;
}

struct NodeTrace {
  std::size_t node_id = 0;
  DecisionTrace trace;
};

// Running sums of the fuzzy outputs over the steps where the gate was
// evaluated (UDSDM only).
struct DodSummary {
  std::size_t samples = 0;
  double sum_dod_p = 0.0;
  double sum_dod_f = 0.0;
  double sum_fused = 0.0;

  void add(const DecisionTrace& t) {
    if (!t.fused) return;
    ++samples;
    sum_dod_p += *t.dod_p;
    sum_dod_f += *t.dod_f;
    sum_fused += *t.fused;
  }
  void merge(const DodSummary& o) {
    samples += o.samples;
    sum_dod_p += o.sum_dod_p;
    sum_dod_f += o.sum_dod_f;
    sum_fused += o.sum_fused;
  }
  double mean_dod_p() const { return samples ? sum_dod_p / static_cast<double>(samples) : 0.0; }
  double mean_dod_f() const { return samples ? sum_dod_f / static_cast<double>(samples) : 0.0; }
  double mean_fused() const { return samples ? sum_fused / static_cast<double>(samples) : 0.0; }
};

// A delivered synopsis, kept only when traces are requested.
struct DeliveredSynopsis {
  std::size_t node_id = 0;
  std::int64_t step = 0;
  std::size_t count = 0;
  std::vector<double> values;
};

struct ExperimentRun {
  SimConfig config;
  std::size_t experiment = 0;
  std::vector<NodeWindowInfo> nodes;
  MessageLog log;
  std::optional<DodSummary> dod;  // set for UDSDM runs
  std::vector<NodeTrace> traces;  // empty unless requested
  std::vector<DeliveredSynopsis> deliveries;  // empty unless requested
  double wall_seconds = 0.0;

  RunRecord record() const { return {config.epoch_length, nodes, log}; }

  // Per-node t* of every delivery.
  std::vector<std::vector<std::int64_t>> stop_times() const {
    std::vector<std::vector<std::int64_t>> out(nodes.size());
    for (const auto& m : log.entries) out[m.node_id].push_back(m.t_star);
    return out;
  }
  std::vector<std::vector<double>> drift_samples() const {
    std::vector<std::vector<double>> out(nodes.size());
    for (const auto& m : log.entries) out[m.node_id].push_back(m.drift);
    return out;
  }
};

inline ExperimentRun run_prepared(const PreparedExperiment& prep, const SimConfig& cfg, bool keep_traces = false) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = prep.nodes.size();
  const std::int64_t T = cfg.epoch_length;
  const FuzzySystem fls(cfg.model.term_sets, cfg.model.rules);

  ExperimentRun run;
  run.config = cfg;
  run.experiment = prep.index;
  if (cfg.policy == PolicyKind::udsdm) run.dod.emplace();

  std::vector<NodeState> states;
  std::vector<HoltState> holt(n, HoltState(cfg.model.holt.alpha, cfg.model.holt.beta));
  std::vector<UdsdmModel> models;
  std::vector<DecisionPolicy> policies;
  std::vector<std::int64_t> eval_len(n);
  std::int64_t horizon = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = prep.nodes[i];
    const std::int64_t offset = phase_offset_for(i, n, T);
    policies.push_back({cfg.theta, T, offset});
    states.emplace_back(i, node.synopsis_at_split, EpochClock(T, offset), cfg.model.baseline);
    eval_len[i] = static_cast<std::int64_t>(node.stream.vectors.size() - node.split);
    if (cfg.max_steps > 0) eval_len[i] = std::min(eval_len[i], cfg.max_steps);
    if (eval_len[i] <= 0) throw std::invalid_argument("node " + std::to_string(i) + " has no evaluation data");
    horizon = std::max(horizon, eval_len[i]);
    run.nodes.push_back({i, offset, eval_len[i]});
    if (cfg.policy == PolicyKind::udsdm) {
      if (!node.model.lstm) throw std::logic_error("udsdm run without a trained forecaster");
      models.push_back({*node.model.lstm, fls, node.model.calibration});
    }
  }

  for (std::int64_t step = 1; step <= horizon; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      if (step > eval_len[i]) continue;
      auto& st = states[i];
      const auto& x = prep.nodes[i].stream.vectors[prep.nodes[i].split + static_cast<std::size_t>(step - 1)];
      const UpdateQuantum e = st.observe(x, step);
      const auto& cal = prep.nodes[i].model.calibration;

      DecisionTrace tr;
      switch (cfg.policy) {
        case PolicyKind::udsdm:
          tr = decide(policies[i], st.clock, step, st.quanta, models[i]);
          break;
        case PolicyKind::bm:
          tr.step = step;
          tr.e_raw = e.value;
          tr.e_norm = normalize_quantum(e, cal);
          tr.decision = bm_decide(e) ? Decision::disseminate : Decision::hold;
          break;
        case PolicyKind::pm:
          tr.step = step;
          tr.e_raw = e.value;
          tr.e_norm = normalize_quantum(e, cal);
          holt[i] = holt_update(holt[i], tr.e_norm);
          tr.decision = pm_decide(holt[i], cfg.theta, cfg.model.holt.window) ? Decision::disseminate : Decision::hold;
          break;
      }
      if (run.dod) run.dod->add(tr);
      if (tr.decision == Decision::hold && st.clock.due(step)) tr.decision = Decision::forced;
      if (tr.decision != Decision::hold) {
        on_disseminate(st, step, tr.decision, run.log);
        holt[i].reset();
        if (keep_traces) run.deliveries.push_back({i, step, static_cast<std::size_t>(st.current.count), st.current.values});
      }
      if (keep_traces) run.traces.push_back({i, tr});
    }
  }
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

// Loads the dataset, prepares the requested experiment and replays it.
inline ExperimentRun run(const SimConfig& cfg, std::size_t experiment = 0, bool keep_traces = true) {
  cfg.validate();
  const auto w = load_workload(cfg);
  auto prep = prepare_experiment(experiment_streams(w, cfg.n_nodes, experiment, cfg.seed), cfg, experiment,
                                 cfg.policy == PolicyKind::udsdm);
  return run_prepared(prep, cfg, keep_traces);
}

struct ComparisonRow {
  PolicyKind policy = PolicyKind::udsdm;
  double theta = 0.0;
  std::int64_t epoch_length = 0;
  MetricsReport metrics;
  std::optional<DodSummary> dod;  // UDSDM rows only
};

namespace detail {

inline bool same_workload(const SimConfig& a, const SimConfig& b) {
  return a.n_nodes == b.n_nodes && a.seed == b.seed && a.train_split == b.train_split &&
         a.dataset_path == b.dataset_path && a.dataset_format == b.dataset_format && a.max_steps == b.max_steps &&
         a.max_records == b.max_records && a.experiments == b.experiments && a.model.term_sets == b.model.term_sets &&
         a.model.rules == b.model.rules && a.model.lstm == b.model.lstm && a.model.holt == b.model.holt &&
         a.model.calibration_period == b.model.calibration_period &&
         a.model.calibration_burn_in == b.model.calibration_burn_in && a.model.baseline == b.model.baseline;
}

}  // namespace detail

// Runs every configuration over cfg.experiments experiments. Configurations
// may differ only in policy, theta and T; preparation (calibration and
// training) does not depend on those and is shared. Rows are ordered by
// (policy, theta, T).
inline std::vector<ComparisonRow> compare(std::vector<SimConfig> configs, const Workload* workload = nullptr) {
  if (configs.empty()) return {};
  for (const auto& c : configs) {
    c.validate();
    if (!detail::same_workload(c, configs.front())) {
      throw std::invalid_argument("compare: configurations may differ only in policy, theta and T");
    }
  }
  std::sort(configs.begin(), configs.end(), [](const SimConfig& a, const SimConfig& b) {
    return std::tuple(std::string(to_string(a.policy)), a.theta, a.epoch_length) <
           std::tuple(std::string(to_string(b.policy)), b.theta, b.epoch_length);
  });
  const SimConfig& base = configs.front();
  Workload loaded;
  if (!workload) {
    loaded = load_workload(base);
    workload = &loaded;
  }
  const bool need_lstm = std::any_of(configs.begin(), configs.end(),
                                     [](const SimConfig& c) { return c.policy == PolicyKind::udsdm; });

  std::vector<std::vector<RunRecord>> records(configs.size());
  std::vector<std::optional<DodSummary>> dods(configs.size());
  for (std::size_t e = 0; e < base.experiments; ++e) {
    const auto prep =
        prepare_experiment(experiment_streams(*workload, base.n_nodes, e, base.seed), base, e, need_lstm);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      auto r = run_prepared(prep, configs[c]);
      records[c].push_back(r.record());
      if (r.dod) {
        if (!dods[c]) dods[c].emplace();
        dods[c]->merge(*r.dod);
      }
    }
  }
  std::vector<ComparisonRow> rows;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    rows.push_back({configs[c].policy, configs[c].theta, configs[c].epoch_length, compute_metrics(records[c]), dods[c]});
  }
  return rows;
}

}  // namespace udsdm
