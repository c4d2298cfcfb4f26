// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "stdgat/data.hpp"
#include "stdgat/dataset_io.hpp"

namespace stdgat {
namespace {

GridSpec grid(std::size_t rows, std::size_t cols, std::size_t T) {
  GridSpec g;
  g.n_rows = rows;
  g.n_cols = cols;
  g.n_intervals = T;
  return g;
}

std::vector<TripRecord> parse(const std::string& text, const GridSpec& g, bool strict = true) {
  std::istringstream in(text);
  ParseOptions opts;
  opts.strict = strict;
  return parse_trips(in, g, opts);
}

bool has_edge(const DynamicGraphSequence& g, std::uint32_t src, std::uint32_t dst, std::size_t t) {
  const auto& nb = g.at(t)[dst];
  return std::binary_search(nb.begin(), nb.end(), src);
}

TEST(ParseTrips, IndexRowMapsFields) {
  const auto trips = parse("origin,dest,interval\n3,7,41\n", grid(11, 11, 4416));
  ASSERT_EQ(trips.size(), 1u);
  EXPECT_EQ(trips[0], (TripRecord{3, 7, 41}));
}

TEST(ParseTrips, OriginOutOfRangeIsValidationError) {
  EXPECT_THROW(parse("origin,dest,interval\n121,0,0\n", grid(11, 11, 10)), ValidationError);
}

TEST(ParseTrips, EmptyFileGivesNoTrips) {
  EXPECT_TRUE(parse("", grid(2, 2, 2)).empty());
  EXPECT_TRUE(parse("# comment only\norigin,dest,interval\n", grid(2, 2, 2)).empty());
}

TEST(ParseTrips, MalformedRowReportsLine) {
  try {
    parse("origin,dest,interval\n1,2,0\n1,x,0\n", grid(2, 2, 2));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("origin,dest,interval\n1,2\n", grid(2, 2, 2)), ParseError);
  EXPECT_THROW(parse("a,b,c\n", grid(2, 2, 2)), ParseError);
}

TEST(ParseTrips, MissingDestinationStrictCitesCommutingEdges) {
  try {
    parse("origin,interval\n1,0\n", grid(2, 2, 2));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("commuting"), std::string::npos);
  }
  const auto lenient = parse("origin,interval\n1,0\n", grid(2, 2, 2), false);
  ASSERT_EQ(lenient.size(), 1u);
  EXPECT_EQ(lenient[0], (TripRecord{1, 1, 0}));
}

TEST(ParseTrips, RawCoordinatesBinThroughBoundingBox) {
  GridSpec g = grid(2, 2, 3);
  g.bbox = BoundingBox{0.0, 2.0, 10.0, 12.0};
  g.start_time = parse_iso8601("2017-05-01T00:00:00");
  const auto trips = parse(
      "start_time,origin_lat,origin_lng,dest_lat,dest_lng\n"
      "2017-05-01T01:30:00,0.5,10.5,1.5,11.5\n",
      g);
  ASSERT_EQ(trips.size(), 1u);
  EXPECT_EQ(trips[0], (TripRecord{0, 3, 1}));
  EXPECT_THROW(parse("start_time,origin_lat,origin_lng,dest_lat,dest_lng\n2017-05-01T05:00:00,0.5,10.5,1.5,11.5\n", g),
               ValidationError);
}

TEST(BuildDemand, CountsByOriginAndInterval) {
  const std::vector<TripRecord> trips = {{0, 1, 0}, {0, 2, 0}, {1, 0, 0}};
  GridSpec g = grid(1, 3, 1);
  const auto d = build_demand(trips, g);
  EXPECT_EQ(d.at(0, 0), 2.0);
  EXPECT_EQ(d.at(1, 0), 1.0);
  EXPECT_EQ(d.at(2, 0), 0.0);
  EXPECT_EQ(d.total(), 3.0);
}

TEST(BuildDemand, EmptyTripsAllZero) {
  const auto d = build_demand({}, grid(2, 2, 3));
  EXPECT_EQ(d.values, std::vector<double>(12, 0.0));
}

// Trips run C -> B and never B -> C at interval t.
TEST(DynamicGraph, CommutingDirectionIsPreserved) {
  const std::uint32_t A = 0, B = 1, C = 2;
  const std::vector<TripRecord> trips = {{C, B, 1}, {C, B, 1}, {A, C, 0}};
  const auto g = build_dynamic_graphs(trips, grid(1, 3, 2));
  EXPECT_TRUE(has_edge(g, C, B, 1));
  EXPECT_FALSE(has_edge(g, B, C, 1));
  EXPECT_FALSE(has_edge(g, C, B, 0));
  EXPECT_TRUE(has_edge(g, A, C, 0));
  for (std::size_t t = 0; t < 2; ++t)
    for (std::uint32_t i = 0; i < 3; ++i) EXPECT_TRUE(has_edge(g, i, i, t));
}

TEST(DynamicGraph, EmptyIntervalHasOnlySelfLoops) {
  const auto g = build_dynamic_graphs({}, grid(2, 2, 1));
  for (std::uint32_t i = 0; i < 4; ++i) EXPECT_EQ(g.at(0)[i], std::vector<std::uint32_t>{i});
  EXPECT_EQ(g.edge_count(0), 0u);
}

TEST(DynamicGraph, ThresholdBoundary) {
  const std::vector<TripRecord> one = {{0, 1, 0}};
  EXPECT_FALSE(has_edge(build_dynamic_graphs(one, grid(1, 2, 1), 2), 0, 1, 0));
  const std::vector<TripRecord> two = {{0, 1, 0}, {0, 1, 0}};
  EXPECT_TRUE(has_edge(build_dynamic_graphs(two, grid(1, 2, 1), 2), 0, 1, 0));
  EXPECT_THROW(build_dynamic_graphs(one, grid(1, 2, 1), 0), ConfigError);
}

TEST(DynamicGraph, HigherThresholdNeverAddsEdges) {
  std::vector<TripRecord> trips;
  for (std::uint32_t k = 0; k < 200; ++k) trips.push_back({k % 4, (k * 7 + 1) % 4, k % 3});
  const GridSpec g = grid(2, 2, 3);
  std::size_t prev = SIZE_MAX;
  for (std::uint32_t th = 1; th <= 30; ++th) {
    const auto graphs = build_dynamic_graphs(trips, g, th);
    std::size_t e = 0;
    for (std::size_t t = 0; t < 3; ++t) e += graphs.edge_count(t);
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(FixedGraph, GridGeometry) {
  const auto g3 = build_fixed_graph(grid(3, 3, 1));
  EXPECT_EQ(g3.neighbors_in[4].size(), 9u);
  EXPECT_EQ(g3.neighbors_in[0].size(), 4u);
  EXPECT_EQ(g3.neighbors_in[1].size(), 6u);
  const auto g1 = build_fixed_graph(grid(1, 1, 1));
  EXPECT_EQ(g1.neighbors_in[0], std::vector<std::uint32_t>{0});
}

WindowedDataset counting_windows(std::size_t T, std::size_t L, SplitFractions f) {
  GridSpec g = grid(1, 2, T);
  DemandSeries d;
  d.n_regions = 2;
  d.n_intervals = T;
  d.values.resize(2 * T);
  for (std::size_t t = 0; t < T; ++t) {
    d.at(0, t) = static_cast<double>(t);
    d.at(1, t) = static_cast<double>(2 * t);
  }
  return make_windows(d, build_dynamic_graphs({}, g), g, L, f);
}

TEST(Windows, CountWithoutSplit) {
  const auto ds = counting_windows(10, 5, SplitFractions{0.0, 0.0});
  ASSERT_EQ(ds.size(Split::kTrain), 5u);
  const auto targets = ds.targets(Split::kTrain);
  EXPECT_EQ(std::vector<std::size_t>(targets.begin(), targets.end()), (std::vector<std::size_t>{5, 6, 7, 8, 9}));
  const auto w = ds.window(Split::kTrain, 0);
  EXPECT_EQ(w.seq_len(), 5u);
  EXPECT_EQ(w.target_interval, 5u);
}

TEST(Windows, TooFewIntervalsIsConfigError) {
  EXPECT_THROW(counting_windows(5, 5, SplitFractions{0.0, 0.0}), ConfigError);
}

TEST(Windows, NoWindowStraddlesASplitBoundary) {
  const auto ds = counting_windows(100, 5, SplitFractions{});
  const auto& r = ds.ranges();
  EXPECT_EQ(r.train.end, r.val.begin);
  EXPECT_EQ(r.val.end, r.test.begin);
  EXPECT_EQ(r.test.end, 100u);
  const std::pair<Split, IntervalRange> splits[] = {{Split::kTrain, r.train}, {Split::kVal, r.val}, {Split::kTest, r.test}};
  std::size_t total = 0;
  for (const auto& [s, range] : splits) {
    for (std::size_t u : ds.targets(s)) {
      EXPECT_TRUE(range.contains(u));
      EXPECT_TRUE(range.contains(u - 5));
    }
    // Boundary windows are dropped from both sides.
    EXPECT_EQ(ds.size(s), range.size() - 5);
    total += ds.size(s);
  }
  EXPECT_EQ(total, 100u - 15u);
}

TEST(Windows, EightyTwentyValidationCut) {
  const auto ds = counting_windows(100, 1, SplitFractions{0.2, 0.0});
  EXPECT_EQ(ds.ranges().train.size(), 80u);
  EXPECT_EQ(ds.ranges().val.size(), 20u);
  EXPECT_EQ(ds.targets(Split::kVal).front(), 81u);
}

TEST(Scaler, MaxScalingAndInverse) {
  const Scaler s{50.0};
  EXPECT_DOUBLE_EQ(s.apply(25.0), 0.5);
  EXPECT_DOUBLE_EQ(s.inverse(s.apply(17.0)), 17.0);
}

TEST(Scaler, FitsOnTrainingRangeOnly) {
  const auto ds = counting_windows(100, 5, SplitFractions{});
  const auto& r = ds.ranges();
  EXPECT_DOUBLE_EQ(ds.scaler().scale, 2.0 * static_cast<double>(r.train.end - 1));
  const auto row = ds.scaled_row(r.test.end - 1);
  EXPECT_GT(row[1], 1.0);  // test demand above the training max stays unclipped
}

TEST(Scaler, AllZeroDemandUsesUnitScale) {
  DemandSeries d;
  d.n_regions = 1;
  d.n_intervals = 3;
  d.values = {0, 0, 0};
  EXPECT_EQ(Scaler::fit(d, {0, 3}).scale, 1.0);
}

TEST(TrainingData, HistoryStopsBeforeTest) {
  const auto ds = counting_windows(100, 5, SplitFractions{});
  const auto data = ds.training_data();
  EXPECT_EQ(data.history.n_intervals, ds.ranges().test.begin);
  EXPECT_EQ(data.train.size(), ds.size(Split::kTrain));
  EXPECT_EQ(data.val.size(), ds.size(Split::kVal));
}

TEST(DatasetArtifact, RoundTripsExactly) {
  std::vector<TripRecord> trips;
  for (std::uint32_t k = 0; k < 500; ++k) trips.push_back({k % 6, (k * 5 + 2) % 6, k % 24});
  DatasetArtifact a;
  a.grid = grid(2, 3, 24);
  a.grid.start_weekday = 3;
  a.demand = build_demand(trips, a.grid);
  a.graphs = build_dynamic_graphs(trips, a.grid, 2);
  a.seq_len = 3;
  a.config_echo = "[run]\nseed = 5\n";
  const std::string bytes = serialize_dataset(a);
  const DatasetArtifact b = deserialize_dataset(bytes);
  EXPECT_EQ(b.demand.values, a.demand.values);
  EXPECT_EQ(b.graphs, a.graphs);
  EXPECT_EQ(b.grid.start_weekday, 3);
  EXPECT_EQ(b.seq_len, 3u);
  EXPECT_EQ(b.config_echo, a.config_echo);
  EXPECT_EQ(serialize_dataset(b), bytes);
}

TEST(DatasetArtifact, RejectsCorruptInput) {
  DatasetArtifact a;
  a.grid = grid(1, 2, 4);
  a.demand = build_demand({}, a.grid);
  a.graphs = build_dynamic_graphs({}, a.grid);
  std::string bytes = serialize_dataset(a);
  EXPECT_THROW(deserialize_dataset(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(deserialize_dataset(bytes + "x"), FormatError);
  std::string bad_major = bytes;
  bad_major[8] = 9;
  EXPECT_THROW(deserialize_dataset(bad_major), FormatError);
  EXPECT_THROW(deserialize_dataset("NOTMAGIC"), FormatError);
}

}  // namespace
}  // namespace stdgat
