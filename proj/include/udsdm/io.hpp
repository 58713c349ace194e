#pragma once

// Flat-file outputs of the command-line tool and the readers the metrics
// subcommand needs to recompute a report from a stored run.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "udsdm/simulator.hpp"

namespace udsdm {

// Shortest round-trip text for a double; stable across runs, which the
// byte-identical comparison output relies on.
inline std::string format_real(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, ptr);
}

inline std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

inline void write_trace_csv(std::ostream& out, const std::vector<NodeTrace>& traces) {
  out << "node_id,step,e_raw,e_norm,dod_p,dod_f,G,decision\n";
  for (const auto& [node, t] : traces) {
    out << node << ',' << t.step << ',' << format_real(t.e_raw) << ',' << format_real(t.e_norm) << ','
        << optional_real(t.dod_p) << ',' << optional_real(t.dod_f) << ',' << optional_real(t.fused) << ','
        << to_string(t.decision) << '\n';
  }
}

inline void write_messages_header(std::ostream& out) {
  out << "experiment,node_id,step,t_star,kind,payload_length,drift\n";
}

inline void write_messages_rows(std::ostream& out, std::size_t experiment, const MessageLog& log) {
  for (const auto& m : log.entries) {
    out << experiment << ',' << m.node_id << ',' << m.step << ',' << m.t_star << ',' << to_string(m.kind) << ','
        << m.payload_length << ',' << format_real(m.drift) << '\n';
  }
}

inline void write_nodes_header(std::ostream& out) { out << "experiment,node_id,phase_offset,active_steps\n"; }

inline void write_nodes_rows(std::ostream& out, std::size_t experiment, const std::vector<NodeWindowInfo>& nodes) {
  for (const auto& n : nodes) {
    out << experiment << ',' << n.node_id << ',' << n.phase_offset << ',' << n.active_steps << '\n';
  }
}

inline void write_synopses_csv(std::ostream& out, const std::vector<DeliveredSynopsis>& rows) {
  std::size_t width = rows.empty() ? 0 : rows.front().values.size();
  out << "node_id,step,count";
  for (std::size_t j = 1; j <= width; ++j) out << ",v" << j;
  out << '\n';
  for (const auto& r : rows) {
    out << r.node_id << ',' << r.step << ',' << r.count;
    for (double v : r.values) out << ',' << format_real(v);
    out << '\n';
  }
}

inline void write_metrics_csv(std::ostream& out, const MetricsReport& m) {
  out << "phi,delta,psi,messages_voluntary,messages_forced,experiments\n"
      << format_real(m.phi) << ',' << format_real(m.delta) << ',' << format_real(m.psi) << ','
      << m.messages_voluntary << ',' << m.messages_forced << ',' << m.experiments << '\n';
}

inline void write_epochs_csv(std::ostream& out, const MetricsReport& m) {
  out << "experiment,node_id,window_start,window_end,stops,psi\n";
  for (const auto& e : m.epochs) {
    out << e.experiment << ',' << e.node_id << ',' << e.window_start << ',' << e.window_end << ',' << e.stops << ','
        << format_real(e.psi) << '\n';
  }
}

inline void write_compare_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "policy,theta,T,phi,delta,psi,messages_voluntary,messages_forced\n";
  for (const auto& r : rows) {
    out << to_string(r.policy) << ',' << format_real(r.theta) << ',' << r.epoch_length << ','
        << format_real(r.metrics.phi) << ',' << format_real(r.metrics.delta) << ',' << format_real(r.metrics.psi)
        << ',' << r.metrics.messages_voluntary << ',' << r.metrics.messages_forced << '\n';
  }
}

inline void write_dod_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "policy,theta,T,samples,mean_dod_p,mean_dod_f,mean_G\n";
  for (const auto& r : rows) {
    if (!r.dod) continue;
    out << to_string(r.policy) << ',' << format_real(r.theta) << ',' << r.epoch_length << ',' << r.dod->samples
        << ',' << format_real(r.dod->mean_dod_p()) << ',' << format_real(r.dod->mean_dod_f()) << ','
        << format_real(r.dod->mean_fused()) << '\n';
  }
}

enum class PlotMetric { phi, delta, psi };

// One series per (policy, theta); x is T.
inline void write_plot_csv(std::ostream& out, const std::vector<ComparisonRow>& rows, PlotMetric metric) {
  out << "series,x,y\n";
  for (const auto& r : rows) {
    const double y = metric == PlotMetric::phi ? r.metrics.phi
                     : metric == PlotMetric::delta ? r.metrics.delta
                                                   : r.metrics.psi;
    out << to_string(r.policy) << "_theta" << format_real(r.theta) << ',' << r.epoch_length << ','
        << format_real(y) << '\n';
  }
}

inline void write_clean_csv(std::ostream& out, const std::vector<NodeStream>& streams) {
  out << "node_id,seq,temperature,humidity,light,voltage\n";
  for (const auto& s : streams) {
    for (std::size_t k = 0; k < s.vectors.size(); ++k) {
      const auto& v = s.vectors[k];
      out << s.node_id << ',' << k;
      for (double x : v) out << ',' << format_real(x);
      out << '\n';
    }
  }
}

// "key=value" lines.
inline void write_meta(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

inline std::map<std::string, std::string> read_meta(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("run.meta: malformed line '" + line + "'");
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_field(const std::string& s, const std::string& file, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(file + " line " + std::to_string(line_no) + ": bad field '" + s + "'");
  }
  return v;
}

inline Decision parse_kind(const std::string& s, const std::string& file, std::size_t line_no) {
  if (s == "disseminate") return Decision::disseminate;
  if (s == "forced") return Decision::forced;
  throw std::runtime_error(file + " line " + std::to_string(line_no) + ": bad message kind '" + s + "'");
}

}  // namespace detail

// Rebuilds per-experiment RunRecords from messages.csv and nodes.csv.
inline std::vector<RunRecord> read_run_records(std::istream& messages, std::istream& nodes,
                                               std::int64_t epoch_length) {
  std::map<std::size_t, RunRecord> by_exp;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(nodes, line) || line != "experiment,node_id,phase_offset,active_steps") {
    throw std::runtime_error("nodes.csv: missing or unexpected header");
  }
  line_no = 1;
  while (std::getline(nodes, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 4) throw std::runtime_error("nodes.csv line " + std::to_string(line_no) + ": expected 4 fields");
    const auto e = detail::parse_field<std::size_t>(f[0], "nodes.csv", line_no);
    auto& rec = by_exp[e];
    rec.epoch_length = epoch_length;
    rec.nodes.push_back({detail::parse_field<std::size_t>(f[1], "nodes.csv", line_no),
                         detail::parse_field<std::int64_t>(f[2], "nodes.csv", line_no),
                         detail::parse_field<std::int64_t>(f[3], "nodes.csv", line_no)});
  }
  if (!std::getline(messages, line) || line != "experiment,node_id,step,t_star,kind,payload_length,drift") {
    throw std::runtime_error("messages.csv: missing or unexpected header");
  }
  line_no = 1;
  while (std::getline(messages, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 7) {
      throw std::runtime_error("messages.csv line " + std::to_string(line_no) + ": expected 7 fields");
    }
    const auto e = detail::parse_field<std::size_t>(f[0], "messages.csv", line_no);
    const auto it = by_exp.find(e);
    if (it == by_exp.end()) {
      throw std::runtime_error("messages.csv line " + std::to_string(line_no) + ": experiment not in nodes.csv");
    }
    MessageEntry m;
    m.node_id = detail::parse_field<std::size_t>(f[1], "messages.csv", line_no);
    m.step = detail::parse_field<std::int64_t>(f[2], "messages.csv", line_no);
    m.t_star = detail::parse_field<std::int64_t>(f[3], "messages.csv", line_no);
    m.kind = detail::parse_kind(f[4], "messages.csv", line_no);
    m.payload_length = detail::parse_field<std::size_t>(f[5], "messages.csv", line_no);
    m.drift = detail::parse_field<double>(f[6], "messages.csv", line_no);
    it->second.log.entries.push_back(m);
  }
  std::vector<RunRecord> out;
  for (auto& [e, rec] : by_exp) out.push_back(std::move(rec));
  return out;
}

}  // namespace udsdm
