// udsdm: ingest, train, run, compare and metrics subcommands over the
// synopsis dissemination simulator. Every failure ends with a single
// "error: ..." line and exit status 1.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "udsdm/udsdm.hpp"

namespace fs = std::filesystem;
using namespace udsdm;

namespace {

struct CommonOptions {
  std::string dataset;
  std::string format = "intel";
  std::size_t nodes = 6;
  std::uint64_t seed = 1;
  std::string config;
  std::size_t max_records = 0;
  std::size_t experiments = 10;
  std::int64_t max_steps = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_experiments) {
  cmd->add_option("--dataset", o.dataset, "Sensor log (Intel Lab text layout) or node_id,v1..vd CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--format", o.format, "Dataset layout")->check(CLI::IsMember({"intel", "csv"}));
  cmd->add_option("--nodes", o.nodes, "Number of nodes N")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed for training and experiment subsets");
  cmd->add_option("--config", o.config, "Key-value file overriding fuzzy/LSTM/Holt/sim defaults")
      ->check(CLI::ExistingFile);
  cmd->add_option("--max-records", o.max_records, "Use only the first N accepted records (0 = all)");
  if (needs_experiments) {
    cmd->add_option("--experiments", o.experiments, "Number of experiments E")->check(CLI::PositiveNumber);
    cmd->add_option("--max-steps", o.max_steps, "Cap on evaluation steps per node (0 = all)");
  }
  cmd->add_option("--out", o.out, "Output directory")->required();
}

SimConfig base_config(const CommonOptions& o) {
  SimConfig cfg;
  cfg.dataset_path = o.dataset;
  cfg.dataset_format = o.format == "csv" ? DatasetFormat::csv : DatasetFormat::intel;
  cfg.n_nodes = o.nodes;
  cfg.seed = o.seed;
  cfg.max_records = o.max_records;
  cfg.experiments = o.experiments;
  cfg.max_steps = o.max_steps;
  if (!o.config.empty()) apply_config_file(o.config, cfg);
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
  return out;
}

std::vector<std::pair<std::string, std::string>> workload_meta(const SimConfig& cfg, const Workload& w) {
  return {{"dataset", cfg.dataset_path},
          {"format", cfg.dataset_format == DatasetFormat::csv ? "csv" : "intel"},
          {"records", std::to_string(cfg.dataset_format == DatasetFormat::csv ? 0 : w.records.size())},
          {"rejected_lines", std::to_string(w.rejects.total())},
          {"nodes", std::to_string(cfg.n_nodes)},
          {"seed", std::to_string(cfg.seed)},
          {"train_split", format_real(cfg.train_split)},
          {"experiments", std::to_string(cfg.experiments)},
          {"experiment_scheme", "0=mote-id round robin; e>0=seeded mote permutation dealt round robin"},
          {"calibration_period", std::to_string(cfg.model.calibration_period)},
          {"calibration_burn_in", format_real(cfg.model.calibration_burn_in)},
          {"lstm_hidden", std::to_string(cfg.model.lstm.hidden_size)},
          {"lstm_learning_rate", format_real(cfg.model.lstm.learning_rate)},
          {"lstm_epochs", std::to_string(cfg.model.lstm.epochs)},
          {"lstm_activation", to_string(cfg.model.lstm.activation)},
          {"holt_alpha", format_real(cfg.model.holt.alpha)},
          {"holt_beta", format_real(cfg.model.holt.beta)},
          {"holt_window", std::to_string(cfg.model.holt.window)}};
}

int cmd_ingest(const CommonOptions& o) {
  fs::path dir(o.out);
  if (o.format == "csv") throw std::runtime_error("ingest cleans Intel Lab logs; --format csv is already clean");
  const auto parsed = parse_dataset(o.dataset, o.max_records);
  const auto streams = build_streams(parsed.records, o.nodes);
  auto clean = open_out(dir, "clean.csv");
  write_clean_csv(clean, streams);
  auto meta = open_out(dir, "ingest.meta");
  write_meta(meta, {{"lines_read", std::to_string(parsed.lines_read)},
                    {"accepted", std::to_string(parsed.records.size())},
                    {"rejected_short_line", std::to_string(parsed.rejects.short_line)},
                    {"rejected_unparseable_number", std::to_string(parsed.rejects.unparseable_number)},
                    {"rejected_mote_out_of_range", std::to_string(parsed.rejects.mote_out_of_range)},
                    {"rejected_non_finite", std::to_string(parsed.rejects.non_finite)}});
  std::cout << "lines " << parsed.lines_read << ", accepted " << parsed.records.size() << ", rejected "
            << parsed.rejects.total() << " (short " << parsed.rejects.short_line << ", unparseable "
            << parsed.rejects.unparseable_number << ", mote out of range " << parsed.rejects.mote_out_of_range
            << ", non-finite " << parsed.rejects.non_finite << ")\n";
  return 0;
}

int cmd_train(const CommonOptions& o, std::size_t experiment) {
  auto cfg = base_config(o);
  const fs::path dir(o.out);
  const auto w = load_workload(cfg);
  const auto prep = prepare_experiment(experiment_streams(w, cfg.n_nodes, experiment, cfg.seed), cfg, experiment, true);
  auto report = open_out(dir, "train.csv");
  report << "node_id,training_quanta,cal_min,cal_max,initial_loss,final_loss,model\n";
  for (std::size_t i = 0; i < prep.nodes.size(); ++i) {
    const auto& m = prep.nodes[i].model;
    const std::string name = "lstm_node" + std::to_string(i) + ".txt";
    save_cell(*m.lstm, (dir / name).string());
    report << i << ',' << m.training_quanta << ',' << format_real(m.calibration.min) << ','
           << format_real(m.calibration.max) << ',' << format_real(m.initial_loss) << ','
           << format_real(m.final_loss) << ',' << name << '\n';
    std::cout << "node " << i << ": loss " << m.initial_loss << " -> " << m.final_loss << '\n';
  }
  return 0;
}

int cmd_run(const CommonOptions& o, std::int64_t epoch, double theta, const std::string& policy) {
  auto cfg = base_config(o);
  cfg.epoch_length = epoch;
  cfg.theta = theta;
  cfg.policy = parse_policy(policy);
  cfg.validate();
  const fs::path dir(o.out);
  const auto w = load_workload(cfg);

  auto messages = open_out(dir, "messages.csv");
  auto nodes = open_out(dir, "nodes.csv");
  write_messages_header(messages);
  write_nodes_header(nodes);
  std::vector<RunRecord> records;
  for (std::size_t e = 0; e < cfg.experiments; ++e) {
    const auto prep = prepare_experiment(experiment_streams(w, cfg.n_nodes, e, cfg.seed), cfg, e,
                                         cfg.policy == PolicyKind::udsdm);
    const auto r = run_prepared(prep, cfg, e == 0);
    if (e == 0) {
      auto trace = open_out(dir, "trace.csv");
      write_trace_csv(trace, r.traces);
      auto syn = open_out(dir, "synopses.csv");
      write_synopses_csv(syn, r.deliveries);
    }
    write_messages_rows(messages, e, r.log);
    write_nodes_rows(nodes, e, r.nodes);
    records.push_back(r.record());
  }
  const auto report = compute_metrics(records);
  auto metrics = open_out(dir, "metrics.csv");
  write_metrics_csv(metrics, report);
  auto epochs = open_out(dir, "epochs.csv");
  write_epochs_csv(epochs, report);
  auto meta_entries = workload_meta(cfg, w);
  meta_entries.insert(meta_entries.begin(), {{"policy", policy}, {"theta", format_real(theta)},
                                             {"T", std::to_string(epoch)}});
  auto meta = open_out(dir, "run.meta");
  write_meta(meta, meta_entries);
  std::cout << "phi " << report.phi << ", delta " << report.delta << ", psi " << report.psi << ", messages "
            << report.messages_voluntary << " voluntary + " << report.messages_forced << " forced\n";
  return 0;
}

int cmd_compare(const CommonOptions& o, const std::vector<std::int64_t>& epochs, const std::vector<double>& thetas,
                const std::vector<std::string>& policies) {
  const auto base = base_config(o);
  std::vector<SimConfig> configs;
  for (const auto& p : policies) {
    for (double th : thetas) {
      for (auto T : epochs) {
        auto c = base;
        c.policy = parse_policy(p);
        c.theta = th;
        c.epoch_length = T;
        configs.push_back(c);
      }
    }
  }
  const fs::path dir(o.out);
  const auto w = load_workload(base);
  const auto rows = compare(configs, &w);
  auto table = open_out(dir, "compare.csv");
  write_compare_csv(table, rows);
  auto dod = open_out(dir, "dod.csv");
  write_dod_csv(dod, rows);
  for (auto [name, metric] : {std::pair{"plot_phi.csv", PlotMetric::phi}, std::pair{"plot_delta.csv", PlotMetric::delta},
                              std::pair{"plot_psi.csv", PlotMetric::psi}}) {
    auto plot = open_out(dir, name);
    write_plot_csv(plot, rows, metric);
  }
  auto meta = open_out(dir, "run.meta");
  write_meta(meta, workload_meta(base, w));
  write_compare_csv(std::cout, rows);
  return 0;
}

int cmd_metrics(const std::string& run_dir, const std::string& out_dir) {
  const fs::path dir(run_dir);
  auto open_in = [&](const std::string& name) {
    std::ifstream in(dir / name);
    if (!in) throw std::runtime_error("cannot read '" + (dir / name).string() + "'");
    return in;
  };
  auto meta_in = open_in("run.meta");
  const auto meta = read_meta(meta_in);
  const auto it = meta.find("T");
  if (it == meta.end()) throw std::runtime_error("run.meta has no T entry; was it written by 'run'?");
  const auto T = std::stoll(it->second);
  auto messages = open_in("messages.csv");
  auto nodes = open_in("nodes.csv");
  const auto report = compute_metrics(read_run_records(messages, nodes, T));
  if (!out_dir.empty()) {
    auto out = open_out(out_dir, "metrics.csv");
    write_metrics_csv(out, report);
  }
  write_metrics_csv(std::cout, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-driven synopsis dissemination simulator"};
  app.require_subcommand(1);

  CommonOptions ingest_o, train_o, run_o, compare_o;

  auto* ingest = app.add_subcommand("ingest", "Clean a sensor log and split it into node streams");
  add_common(ingest, ingest_o, false);

  auto* train_cmd = app.add_subcommand("train", "Train and save every node's forecaster");
  add_common(train_cmd, train_o, false);
  std::size_t train_experiment = 0;
  train_cmd->add_option("--experiment", train_experiment, "Experiment index whose node subsets are used");

  auto* run_cmd = app.add_subcommand("run", "Replay one policy over E experiments");
  add_common(run_cmd, run_o, true);
  std::int64_t epoch = 100;
  double theta = 0.6;
  std::string policy = "udsdm";
  run_cmd->add_option("--epoch", epoch, "Epoch length T")->check(CLI::PositiveNumber);
  run_cmd->add_option("--theta", theta, "Dissemination threshold")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--policy", policy, "Policy")->check(CLI::IsMember({"udsdm", "bm", "pm"}));

  auto* compare_cmd = app.add_subcommand("compare", "Compare policies across theta and T");
  add_common(compare_cmd, compare_o, true);
  std::vector<std::int64_t> epochs{100, 500, 1000};
  std::vector<double> thetas{0.60, 0.75};
  std::vector<std::string> policies{"bm", "pm", "udsdm"};
  compare_cmd->add_option("--epoch", epochs, "Epoch lengths T (comma separated)")->delimiter(',');
  compare_cmd->add_option("--theta", thetas, "Thresholds (comma separated)")->delimiter(',');
  compare_cmd->add_option("--policy", policies, "Policies (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember({"udsdm", "bm", "pm"}));

  auto* metrics_cmd = app.add_subcommand("metrics", "Recompute phi, delta and psi from a stored run");
  std::string run_dir, metrics_out;
  metrics_cmd->add_option("--run", run_dir, "Directory written by 'run'")->required()->check(CLI::ExistingDirectory);
  metrics_cmd->add_option("--out", metrics_out, "Also write metrics.csv here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_o);
    if (train_cmd->parsed()) return cmd_train(train_o, train_experiment);
    if (run_cmd->parsed()) return cmd_run(run_o, epoch, theta, policy);
    if (compare_cmd->parsed()) return cmd_compare(compare_o, epochs, thetas, policies);
    if (metrics_cmd->parsed()) return cmd_metrics(run_dir, metrics_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
