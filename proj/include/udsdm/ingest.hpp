#pragma once

// Intel Berkeley Lab sensor file parsing and per-node stream assembly.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "udsdm/synopsis.hpp"

namespace udsdm {

inline constexpr int kMinMote = 1;
inline constexpr int kMaxMote = 54;
inline constexpr std::size_t kLabDims = 4;

struct SensorRecord {
  int date = 0;                    // yyyymmdd
  std::int64_t time_us = 0;        // microseconds since midnight
  std::int64_t epoch = 0;
  int mote_id = 0;
  double temperature = 0.0;
  double humidity = 0.0;
  double light = 0.0;
  double voltage = 0.0;

  ContextVector vector() const { return {temperature, humidity, light, voltage}; }
  bool operator==(const SensorRecord&) const = default;
};

struct RejectStats {
  std::size_t short_line = 0;
  std::size_t unparseable_number = 0;
  std::size_t mote_out_of_range = 0;
  std::size_t non_finite = 0;

  std::size_t total() const { return short_line + unparseable_number + mote_out_of_range + non_finite; }
};

struct ParsedDataset {
  std::vector<SensorRecord> records;
  RejectStats rejects;
  std::size_t lines_read = 0;
};

enum class LineStatus { ok, short_line, unparseable_number, mote_out_of_range, non_finite };

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// from_chars rejects "nan"/"inf" spellings on some libraries; accept them so
// they are classified as non-finite rather than unparseable.
inline bool parse_real(std::string_view s, double& out) {
  if (parse_number(s, out)) return true;
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "nan" || lower == "-nan") {
    out = std::nan("");
    return true;
  }
  if (lower == "inf" || lower == "+inf" || lower == "infinity") {
    out = HUGE_VAL;
    return true;
  }
  if (lower == "-inf" || lower == "-infinity") {
    out = -HUGE_VAL;
    return true;
  }
  return false;
}

inline bool parse_date(std::string_view s, int& out) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  if (!parse_number(s.substr(0, 4), y) || !parse_number(s.substr(5, 2), m) ||
      !parse_number(s.substr(8, 2), d)) {
    return false;
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  out = y * 10000 + m * 100 + d;
  return true;
}

// "HH:MM:SS[.ffffff]" -> microseconds since midnight.
inline bool parse_time(std::string_view s, std::int64_t& out) {
  if (s.size() < 8 || s[2] != ':' || s[5] != ':') return false;
  int h = 0, m = 0, sec = 0;
  if (!parse_number(s.substr(0, 2), h) || !parse_number(s.substr(3, 2), m) ||
      !parse_number(s.substr(6, 2), sec)) {
    return false;
  }
  std::int64_t micros = 0;
  if (s.size() > 8) {
    if (s[8] != '.') return false;
    auto frac = s.substr(9);
    if (frac.empty() || frac.size() > 9) return false;
    std::int64_t digits = 0;
    if (!parse_number(frac, digits) || digits < 0) return false;
    // Scale to six fractional digits.
    std::int64_t scale = 1;
    for (std::size_t i = frac.size(); i < 6; ++i) scale *= 10;
    micros = digits * scale;
    for (std::size_t i = 6; i < frac.size(); ++i) micros /= 10;
  }
  if (h > 23 || m > 59 || sec > 60) return false;
  out = ((static_cast<std::int64_t>(h) * 60 + m) * 60 + sec) * 1'000'000 + micros;
  return true;
}

}  // namespace detail

// Fields: date time epoch mote_id temperature humidity light voltage.
inline LineStatus parse_line(std::string_view line, SensorRecord& rec) {
  const auto f = detail::split_ws(line);
  if (f.size() < 8) return LineStatus::short_line;
  if (f.size() > 8) return LineStatus::unparseable_number;
  if (!detail::parse_date(f[0], rec.date) || !detail::parse_time(f[1], rec.time_us) ||
      !detail::parse_number(f[2], rec.epoch) || !detail::parse_number(f[3], rec.mote_id)) {
    return LineStatus::unparseable_number;
  }
  double* dst[4] = {&rec.temperature, &rec.humidity, &rec.light, &rec.voltage};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!detail::parse_real(f[4 + i], *dst[i])) return LineStatus::unparseable_number;
  }
  if (rec.mote_id < kMinMote || rec.mote_id > kMaxMote) return LineStatus::mote_out_of_range;
  for (double* v : dst) {
    if (!std::isfinite(*v)) return LineStatus::non_finite;
  }
  return LineStatus::ok;
}

// Reads until EOF or until max_records records have been accepted
// (0 = unlimited). accepted + rejects.total() == lines_read.
inline ParsedDataset parse_dataset(std::istream& in, std::size_t max_records = 0) {
  ParsedDataset out;
  std::string line;
  while ((max_records == 0 || out.records.size() < max_records) && std::getline(in, line)) {
    ++out.lines_read;
    SensorRecord rec;
    switch (parse_line(line, rec)) {
      case LineStatus::ok: out.records.push_back(rec); break;
      case LineStatus::short_line: ++out.rejects.short_line; break;
      case LineStatus::unparseable_number: ++out.rejects.unparseable_number; break;
      case LineStatus::mote_out_of_range: ++out.rejects.mote_out_of_range; break;
      case LineStatus::non_finite: ++out.rejects.non_finite; break;
    }
  }
  return out;
}

inline ParsedDataset parse_dataset(const std::string& path, std::size_t max_records = 0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset '" + path + "'");
  return parse_dataset(in, max_records);
}

struct NodeStream {
  int node_id = 0;
  std::vector<ContextVector> vectors;
  std::set<int> source_motes;

  std::size_t dims() const { return vectors.empty() ? 0 : vectors.front().size(); }
  bool operator==(const NodeStream&) const = default;
};

// Round-robin assignment. Without mote_order, mote m goes to node
// (m - 1) mod n_nodes. With mote_order (a permutation of the distinct motes),
// the mote at position p goes to node p mod n_nodes. Streams are sorted by
// (epoch, time), ties kept in file order.
inline std::vector<NodeStream> build_streams(const std::vector<SensorRecord>& records, std::size_t n_nodes,
                                             const std::vector<int>& mote_order = {}) {
  if (n_nodes < 1) throw std::invalid_argument("build_streams: need at least one node");
  if (records.empty()) throw std::invalid_argument("build_streams: no records");
  std::set<int> motes;
  for (const auto& r : records) motes.insert(r.mote_id);
  if (n_nodes > motes.size()) throw std::invalid_argument("more nodes than motes");

  std::map<int, std::size_t> node_of;
  if (mote_order.empty()) {
    for (int m : motes) node_of[m] = static_cast<std::size_t>(m - 1) % n_nodes;
  } else {
    if (std::set<int>(mote_order.begin(), mote_order.end()) != motes || mote_order.size() != motes.size()) {
      throw std::invalid_argument("build_streams: mote order must be a permutation of the motes present");
    }
    for (std::size_t p = 0; p < mote_order.size(); ++p) node_of[mote_order[p]] = p % n_nodes;
  }

  std::vector<std::vector<const SensorRecord*>> buckets(n_nodes);
  for (const auto& r : records) buckets[node_of[r.mote_id]].push_back(&r);

  std::vector<NodeStream> streams(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    auto& b = buckets[i];
    std::stable_sort(b.begin(), b.end(), [](const SensorRecord* a, const SensorRecord* c) {
      if (a->epoch != c->epoch) return a->epoch < c->epoch;
      return a->time_us < c->time_us;
    });
    streams[i].node_id = static_cast<int>(i);
    streams[i].vectors.reserve(b.size());
    for (const auto* r : b) {
      streams[i].vectors.push_back(r->vector());
      streams[i].source_motes.insert(r->mote_id);
    }
  }
  return streams;
}

struct CsvStreams {
  std::vector<NodeStream> streams;
  std::size_t rejected = 0;
  std::size_t lines_read = 0;
};

// Generic "node_id,v1,...,vd" input. A non-numeric first line is treated as a
// header. Node ids are compacted to 0..N-1 in ascending id order; lines with
// a different arity than the first data line are rejected.
inline CsvStreams parse_csv_streams(std::istream& in) {
  CsvStreams out;
  std::map<long long, NodeStream> by_id;
  std::size_t d = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    ++out.lines_read;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    long long id = 0;
    const bool id_ok = !cells.empty() && detail::parse_number(std::string_view(cells[0]), id);
    if (first && !id_ok) {
      first = false;
      continue;
    }
    first = false;
    if (!id_ok || cells.size() < 2) {
      ++out.rejected;
      continue;
    }
    ContextVector v;
    bool ok = true;
    for (std::size_t i = 1; i < cells.size() && ok; ++i) {
      double x = 0.0;
      ok = detail::parse_real(cells[i], x) && std::isfinite(x);
      v.push_back(x);
    }
    if (ok && d == 0) d = v.size();
    if (!ok || v.size() != d) {
      ++out.rejected;
      continue;
    }
    by_id[id].vectors.push_back(std::move(v));
  }
  int next = 0;
  for (auto& [id, s] : by_id) {
    s.node_id = next++;
    out.streams.push_back(std::move(s));
  }
  return out;
}

inline CsvStreams parse_csv_streams(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset '" + path + "'");
  return parse_csv_streams(in);
}

}  // namespace udsdm
