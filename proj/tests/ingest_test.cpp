#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>
#include <string>

#include "udsdm/ingest.hpp"
#include "udsdm/rng.hpp"

using namespace udsdm;

namespace {

SensorRecord record(int mote, std::int64_t epoch, double t = 20.0, std::int64_t time_us = 0) {
  SensorRecord r;
  r.date = 20040228;
  r.mote_id = mote;
  r.epoch = epoch;
  r.time_us = time_us;
  r.temperature = t;
  r.humidity = 40.0;
  r.light = 100.0;
  r.voltage = 2.7;
  return r;
}

}  // namespace

TEST(ParseLine, FirstLineOfTheLabLog) {
  SensorRecord r;
  ASSERT_EQ(parse_line("2004-02-28 00:59:16.02785 3 1 19.9884 37.0933 45.08 2.69964", r), LineStatus::ok);
  EXPECT_EQ(r.date, 20040228);
  EXPECT_EQ(r.time_us, ((0 * 60 + 59) * 60 + 16) * 1'000'000LL + 27850);
  EXPECT_EQ(r.epoch, 3);
  EXPECT_EQ(r.mote_id, 1);
  EXPECT_DOUBLE_EQ(r.temperature, 19.9884);
  EXPECT_DOUBLE_EQ(r.humidity, 37.0933);
  EXPECT_DOUBLE_EQ(r.light, 45.08);
  EXPECT_DOUBLE_EQ(r.voltage, 2.69964);
}

TEST(ParseLine, SixFieldsIsShort) {
  SensorRecord r;
  EXPECT_EQ(parse_line("2004-02-28 00:59:16.02785 3 1 19.9884 37.0933", r), LineStatus::short_line);
  EXPECT_EQ(parse_line("", r), LineStatus::short_line);
}

TEST(ParseLine, MoteOutOfRange) {
  SensorRecord r;
  EXPECT_EQ(parse_line("2004-02-28 00:59:16.02785 3 77 19.9884 37.0933 45.08 2.69964", r),
            LineStatus::mote_out_of_range);
  EXPECT_EQ(parse_line("2004-02-28 00:59:16.02785 3 0 19.9884 37.0933 45.08 2.69964", r),
            LineStatus::mote_out_of_range);
}

TEST(ParseLine, NonFiniteAndGarbledFields) {
  SensorRecord r;
  EXPECT_EQ(parse_line("2004-02-28 00:59:16.02785 3 1 nan 37.0933 45.08 2.69964", r), LineStatus::non_finite);
  EXPECT_EQ(parse_line("2004-02-28 00:59:16.02785 3 1 19.9 inf 45.08 2.69964", r), LineStatus::non_finite);
  EXPECT_EQ(parse_line("2004-02-28 00:59:16.02785 3 1 19.9x 37.0933 45.08 2.69964", r),
            LineStatus::unparseable_number);
  EXPECT_EQ(parse_line("2004-02-30x 00:59:16 3 1 19.9 37.0933 45.08 2.69964", r), LineStatus::unparseable_number);
  EXPECT_EQ(parse_line("2004-02-28 00:59:16 3 1 19.9 37.0933 45.08 2.69964 9", r),
            LineStatus::unparseable_number);
}

TEST(ParseDataset, AcceptedPlusRejectedEqualsLines) {
  Rng rng(17);
  const char* pieces[] = {"2004-02-28 01:00:00.5 %d %d 19.5 37.1 45.0 2.69\n",
                          "2004-02-28 01:00:00.5 %d %d 19.5 37.1\n",
                          "2004-02-28 01:00:00.5 %d %d nan 37.1 45.0 2.69\n",
                          "2004-02-28 01:00:00.5 %d %d 19.5 37.1 4x 2.69\n"};
  std::string text;
  for (int i = 0; i < 400; ++i) {
    char buf[128];
    const int kind = static_cast<int>(rng.below(4));
    const int mote = static_cast<int>(rng.below(60));
    std::snprintf(buf, sizeof buf, pieces[kind], i, mote);
    text += buf;
  }
  std::istringstream in(text);
  const auto ds = parse_dataset(in);
  EXPECT_EQ(ds.lines_read, 400u);
  EXPECT_EQ(ds.records.size() + ds.rejects.total(), ds.lines_read);
  EXPECT_GT(ds.rejects.short_line, 0u);
  EXPECT_GT(ds.rejects.non_finite, 0u);
  EXPECT_GT(ds.rejects.unparseable_number, 0u);
  EXPECT_GT(ds.rejects.mote_out_of_range, 0u);
}

TEST(ParseDataset, StopsAfterMaxRecords) {
  std::istringstream in(
      "2004-02-28 01:00:00 1 1 19.5 37.1 45.0 2.69\n"
      "bad\n"
      "2004-02-28 01:00:01 1 2 19.5 37.1 45.0 2.69\n"
      "2004-02-28 01:00:02 1 3 19.5 37.1 45.0 2.69\n");
  const auto ds = parse_dataset(in, 2);
  EXPECT_EQ(ds.records.size(), 2u);
  EXPECT_EQ(ds.lines_read, 3u);
}

TEST(ParseDataset, UnreadableFileIsFatal) {
  EXPECT_THROW(parse_dataset(std::string("/no/such/dir/data.txt")), std::runtime_error);
}

TEST(BuildStreams, OneMotePerNodeWhenCountsMatch) {
  std::vector<SensorRecord> recs;
  for (int m = 1; m <= 54; ++m) recs.push_back(record(m, 1));
  const auto streams = build_streams(recs, 54);
  ASSERT_EQ(streams.size(), 54u);
  for (const auto& s : streams) EXPECT_EQ(s.source_motes.size(), 1u);
}

TEST(BuildStreams, RoundRobinByMoteId) {
  const std::vector<SensorRecord> recs{record(1, 1), record(2, 1), record(3, 1)};
  const auto streams = build_streams(recs, 2);
  EXPECT_EQ(streams[0].source_motes, (std::set<int>{1, 3}));
  EXPECT_EQ(streams[1].source_motes, (std::set<int>{2}));
}

TEST(BuildStreams, Errors) {
  EXPECT_THROW(build_streams({}, 2), std::invalid_argument);
  const std::vector<SensorRecord> recs{record(1, 1), record(2, 1)};
  try {
    build_streams(recs, 3);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "more nodes than motes");
  }
}

TEST(BuildStreams, SortsByEpochThenTime) {
  const std::vector<SensorRecord> recs{record(1, 5, 1.0, 10), record(1, 2, 2.0, 50), record(1, 2, 3.0, 20),
                                       record(1, 9, 4.0, 0)};
  const auto s = build_streams(recs, 1);
  std::vector<double> order;
  for (const auto& v : s[0].vectors) order.push_back(v[0]);
  EXPECT_EQ(order, (std::vector<double>{3.0, 2.0, 1.0, 4.0}));
}

TEST(BuildStreams, PartitionsEveryRecordExactlyOnce) {
  Rng rng(23);
  std::vector<SensorRecord> recs;
  for (int i = 0; i < 2000; ++i) {
    recs.push_back(record(1 + static_cast<int>(rng.below(54)), static_cast<std::int64_t>(rng.below(300)),
                          static_cast<double>(i), static_cast<std::int64_t>(rng.below(1000))));
  }
  for (std::size_t n : {1u, 5u, 6u, 54u}) {
    const auto streams = build_streams(recs, n);
    std::multiset<double> seen;
    for (const auto& s : streams) {
      for (const auto& v : s.vectors) seen.insert(v[0]);
    }
    ASSERT_EQ(seen.size(), recs.size());
    for (int i = 0; i < 2000; ++i) EXPECT_EQ(seen.count(static_cast<double>(i)), 1u);
  }
}

TEST(BuildStreams, PermutedOrderDealsByPosition) {
  const std::vector<SensorRecord> recs{record(1, 1), record(2, 1), record(3, 1), record(4, 1)};
  const auto streams = build_streams(recs, 2, {4, 2, 3, 1});
  EXPECT_EQ(streams[0].source_motes, (std::set<int>{4, 3}));
  EXPECT_EQ(streams[1].source_motes, (std::set<int>{2, 1}));
  EXPECT_THROW(build_streams(recs, 2, {1, 2, 3}), std::invalid_argument);
}

TEST(BuildStreams, Deterministic) {
  Rng rng(29);
  std::vector<SensorRecord> recs;
  for (int i = 0; i < 500; ++i) {
    recs.push_back(record(1 + static_cast<int>(rng.below(10)), static_cast<std::int64_t>(rng.below(50)),
                          rng.uniform()));
  }
  EXPECT_EQ(build_streams(recs, 3), build_streams(recs, 3));
}

TEST(CsvStreams, HeaderIdsAndArity) {
  std::istringstream in("node,a,b\n7,1,2\n3,4,5\n7,6,7\n3,8\n3,x,1\n");
  const auto cs = parse_csv_streams(in);
  ASSERT_EQ(cs.streams.size(), 2u);
  EXPECT_EQ(cs.streams[0].node_id, 0);
  EXPECT_EQ(cs.streams[0].vectors, (std::vector<ContextVector>{{4, 5}}));
  EXPECT_EQ(cs.streams[1].vectors, (std::vector<ContextVector>{{1, 2}, {6, 7}}));
  EXPECT_EQ(cs.rejected, 2u);
}
