// Copyright 2026 The Treefuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "treefuzz/report.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "treefuzz/bench.h"
#include "treefuzz/rng.h"

namespace treefuzz {
namespace {

// Counts pairs directly: a > b scores 1, a == b scores 1/2.
double PairCountU(const std::vector<double> &a, const std::vector<double> &b) {
  double u = 0;
  for (double x : a) {
    for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
  }
  return u;
}

// Two-sided exact p by enumerating every way to label n of the pooled values
// as sample a.
double EnumeratedP(const std::vector<double> &a, const std::vector<double> &b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const size_t total = pooled.size(), n = a.size();
  const double center = static_cast<double>(a.size() * b.size()) / 2;
  const double observed = std::abs(PairCountU(a, b) - center);
  double extreme = 0, all = 0;
  for (uint32_t mask = 0; mask < (1u << total); ++mask) {
    if (static_cast<size_t>(std::popcount(mask)) != n) continue;
    std::vector<double> x, y;
    for (size_t i = 0; i < total; ++i) {
      ((mask >> i) & 1 ? x : y).push_back(pooled[i]);
    }
    all += 1;
    if (std::abs(PairCountU(x, y) - center) >= observed - 1e-9) extreme += 1;
  }
  return extreme / all;
}

TEST(MannWhitney, Examples) {
  const std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
  const MannWhitneyResult r = MannWhitneyU(a, b);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.u_a, 0.0);
  EXPECT_EQ(r.u_b, 9.0);
  EXPECT_EQ(r.p_value, 0.1);

  const std::vector<double> c = {1, 2, 3, 4, 5}, d = {6, 7, 8, 9, 10};
  const MannWhitneyResult r5 = MannWhitneyU(c, d);
  EXPECT_EQ(r5.u_a, 0.0);
  EXPECT_NEAR(r5.p_value, 2.0 / 252.0, 1e-12);
  EXPECT_NEAR(r5.p_value, 0.00794, 1e-5);
}

TEST(MannWhitney, ExactMatchesEnumerationWithTies) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(1 + rng.Below(7)), b(1 + rng.Below(7));
    for (double &x : a) x = static_cast<double>(rng.Below(6));
    for (double &x : b) x = static_cast<double>(rng.Below(6));
    const MannWhitneyResult r = MannWhitneyExact(a, b);
    EXPECT_DOUBLE_EQ(r.u_a, PairCountU(a, b));
    EXPECT_NEAR(r.p_value, EnumeratedP(a, b), 1e-12);
  }
}

TEST(MannWhitney, UsSumToProductAndSwapIsSymmetric) {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(1 + rng.Below(15)), b(1 + rng.Below(15));
    for (double &x : a) x = static_cast<double>(rng.Below(20));
    for (double &x : b) x = static_cast<double>(rng.Below(20));
    const MannWhitneyResult r = MannWhitneyU(a, b);
    EXPECT_DOUBLE_EQ(r.u_a + r.u_b,
                     static_cast<double>(a.size() * b.size()));
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    const MannWhitneyResult s = MannWhitneyU(b, a);
    EXPECT_DOUBLE_EQ(s.u_a, r.u_b);
    EXPECT_NEAR(s.p_value, r.p_value, 1e-12);
  }
}

TEST(MannWhitney, NormalApproximationAgreesAtTenVersusTen) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    // Distinct values, so no ties.
    std::vector<double> pool(20);
    for (size_t i = 0; i < 20; ++i) pool[i] = static_cast<double>(i);
    for (size_t i = 19; i > 0; --i) std::swap(pool[i], pool[rng.Below(i + 1)]);
    // Skew one side so that p is not always near 1.
    std::vector<double> a(pool.begin(), pool.begin() + 10);
    std::vector<double> b(pool.begin() + 10, pool.end());
    const double shift = static_cast<double>(rng.Below(10));
    for (double &x : a) x += shift;
    const double exact = MannWhitneyExact(a, b).p_value;
    const double approx = MannWhitneyNormal(a, b).p_value;
    EXPECT_NEAR(exact, approx, 0.02);
  }
}

TEST(MannWhitney, PicksMethodBySize) {
  const std::vector<double> ten(10, 1.0), eleven(11, 2.0);
  EXPECT_TRUE(MannWhitneyU(ten, ten).exact);
  EXPECT_FALSE(MannWhitneyU(ten, eleven).exact);
  EXPECT_EQ(MannWhitneyU(ten, ten).p_value, 1.0);
  EXPECT_THROW(MannWhitneyU(std::vector<double>{}, ten), std::invalid_argument);
}

RunRecord Record(const std::string &target, const std::string &policy,
                 int round, uint64_t coverage,
                 std::optional<uint64_t> crash = std::nullopt) {
  RunRecord r;
  r.label = target + "/" + policy + "/" + std::to_string(round);
  r.target = target;
  r.policy = policy;
  r.final_coverage = coverage;
  r.time_to_first_crash = crash;
  return r;
}

TEST(CompareRuns, IdenticalRecordsTie) {
  std::vector<RunRecord> records;
  for (const char *t : {"p0", "p1"}) {
    for (const char *pol : {"mcts", "fifo"}) {
      for (int round = 0; round < 3; ++round) {
        records.push_back(Record(t, pol, round, 100 + round, 500));
      }
    }
  }
  const auto cmp = CompareRuns(records);
  ASSERT_EQ(cmp.size(), 1u);
  EXPECT_EQ(cmp[0].ties, 2);
  EXPECT_EQ(cmp[0].wins_a + cmp[0].wins_b, 0);
  for (const TargetComparison &t : cmp[0].targets) {
    EXPECT_EQ(t.first_crash_ratio, 1.0);
    EXPECT_EQ(t.p_value, 1.0);
  }
}

TEST(CompareRuns, DominatingPolicyWinsEverywhere) {
  std::vector<RunRecord> records;
  for (int t = 0; t < 4; ++t) {
    const std::string name = "p" + std::to_string(t);
    for (int round = 0; round < 5; ++round) {
      records.push_back(Record(name, "mcts", round, 200 + round));
      records.push_back(Record(name, "fifo", round, 100 + round));
    }
  }
  const auto cmp = CompareRuns(records);
  ASSERT_EQ(cmp.size(), 1u);
  EXPECT_EQ(cmp[0].policy_a, "mcts");
  EXPECT_EQ(cmp[0].wins_a, 4);
  EXPECT_EQ(cmp[0].wins_b + cmp[0].ties, 0);
  EXPECT_NEAR(cmp[0].targets[0].p_value, 2.0 / 252.0, 1e-12);
  EXPECT_LT(cmp[0].p_value, kSignificanceLevel);
}

TEST(CompareRuns, Rejections) {
  std::vector<RunRecord> one_policy = {Record("p", "mcts", 0, 1),
                                       Record("p", "mcts", 1, 1)};
  EXPECT_THROW(CompareRuns(one_policy), std::invalid_argument);
  std::vector<RunRecord> mismatched = {Record("p", "mcts", 0, 1),
                                       Record("q", "fifo", 0, 1)};
  EXPECT_THROW(CompareRuns(mismatched), std::invalid_argument);
  std::vector<RunRecord> dup = {Record("p", "mcts", 0, 1),
                                Record("p", "mcts", 0, 2),
                                Record("p", "fifo", 0, 1)};
  EXPECT_THROW(CompareRuns(dup), std::invalid_argument);
}

TEST(CompareRuns, CsvHasOneRowPerPairAndTarget) {
  std::vector<RunRecord> records;
  for (const char *pol : {"a", "b", "c"}) {
    records.push_back(Record("p0", pol, 0, 10));
  }
  const auto cmp = CompareRuns(records);
  EXPECT_EQ(cmp.size(), 3u);
  const std::string csv = ComparisonCsv(cmp);
  EXPECT_EQ(csv.rfind("policy_a,policy_b,target,median_a,median_b,wins_a,"
                      "wins_b,ties,p_value\n",
                      0),
            0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("a,b,p0,10,10,0,0,1,1\n"), std::string::npos) << csv;
}

TEST(StatsCsv, Shapes) {
  CampaignStats empty;
  EXPECT_EQ(StatsCsv(empty),
            "execs,schedules,coverage,seeds,crashes,nodes_examined\n");
  CampaignStats one;
  one.rows.push_back({1000, 4, 57, 9, 1, 12});
  EXPECT_EQ(StatsCsv(one),
            "execs,schedules,coverage,seeds,crashes,nodes_examined\n"
            "1000,4,57,9,1,12\n");
  EXPECT_THROW(WriteStatsCsv(one, "/nonexistent/dir/stats.csv"),
               std::runtime_error);
}

TEST(Plot, Shapes) {
  const std::vector<PlotSeries> flat = {{"only", {{0, 5}, {100, 5}}}};
  const std::string svg = CoveragePlotSvg(flat);
  EXPECT_NE(svg.find(">executions<"), std::string::npos);
  EXPECT_NE(svg.find(">coverage<"), std::string::npos);
  // Both points of a constant series share a y coordinate.
  const size_t pts = svg.find("points=\"");
  ASSERT_NE(pts, std::string::npos);
  const std::string points =
      svg.substr(pts + 8, svg.find('"', pts + 8) - pts - 8);
  const size_t space = points.find(' ');
  EXPECT_EQ(points.substr(points.find(',') + 1,
                          space - points.find(',') - 1),
            points.substr(points.rfind(',') + 1));

  const std::vector<PlotSeries> two = {{"mcts", {{0, 1}, {10, 8}}},
                                       {"fifo", {{0, 1}, {10, 6}}}};
  const std::string svg2 = CoveragePlotSvg(two);
  size_t polylines = 0;
  for (size_t at = svg2.find("<polyline"); at != std::string::npos;
       at = svg2.find("<polyline", at + 1)) {
    ++polylines;
  }
  EXPECT_EQ(polylines, 2u);
  EXPECT_NE(svg2.find(">mcts<"), std::string::npos);
  EXPECT_NE(svg2.find(">fifo<"), std::string::npos);
  EXPECT_EQ(CoveragePlotSvg(two), svg2);
  EXPECT_THROW(CoveragePlotSvg(std::vector<PlotSeries>{}),
               std::invalid_argument);
}

TEST(Bench, JobsDoNotChangeResults) {
  GenParams p;
  p.depth = 6;
  const auto corpus = GenerateCorpus(3, 50, p);
  std::vector<BenchArm> arms(2);
  arms[0] = {"mcts", CampaignConfig{}};
  arms[1] = {"fifo", CampaignConfig{}};
  arms[1].config.policy = Policy::kFifo;
  for (BenchArm &a : arms) a.config.budget_execs = 3000;
  const auto serial = RunBench(corpus, arms, 2, 1);
  const auto parallel = RunBench(corpus, arms, 2, 4);
  ASSERT_EQ(serial.size(), 12u);
  EXPECT_EQ(ComparisonCsv(CompareRuns(serial)),
            ComparisonCsv(CompareRuns(parallel)));
  for (size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].label, parallel[i].label);
    EXPECT_EQ(serial[i].coverage_series, parallel[i].coverage_series);
  }
}

TEST(Bench, SweepTableOneRowPerK) {
  std::vector<RunRecord> records;
  for (double k : {0.0, 1.4}) {
    for (int round = 0; round < 2; ++round) {
      RunRecord r = Record("p", "k", round, 10 + round);
      r.label += std::to_string(k);
      r.k = k;
      records.push_back(r);
    }
  }
  const auto rows = SweepTable(records);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].k, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].mean_coverage, 10.5);
  EXPECT_EQ(rows[1].runs, 2u);
  EXPECT_EQ(SweepCsv(rows), "k,mean_coverage,runs\n0,10.5000,2\n1.4,10.5000,2\n");
}

}  // namespace
}  // namespace treefuzz
