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

// Campaign statistics export, scheduler comparison with Mann-Whitney U
// tests, and SVG coverage plots.

#ifndef TREEFUZZ_REPORT_H_
#define TREEFUZZ_REPORT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treefuzz/campaign.h"

namespace treefuzz {

inline constexpr char kStatsCsvHeader[] =
    "execs,schedules,coverage,seeds,crashes,nodes_examined";

// Header line plus one line per stats row, each '\n'-terminated.
std::string StatsCsv(const CampaignStats &stats);
// Throws std::runtime_error naming `path` on I/O failure.
void WriteStatsCsv(const CampaignStats &stats, const std::string &path);

// Two-sided p-values below this are reported as significant.
inline constexpr double kSignificanceLevel = 0.05;
// Samples with n + m at or below this use the exact null distribution.
inline constexpr size_t kExactMannWhitneyLimit = 20;

struct MannWhitneyResult {
  double u_a = 0;  // pairs (a, b) with a > b, ties counting one half
  double u_b = 0;
  double p_value = 1;
  bool exact = false;
};

// Picks the exact test for small samples and the tie-corrected normal
// approximation otherwise. Throws std::invalid_argument on empty samples.
MannWhitneyResult MannWhitneyU(std::span<const double> a,
                               std::span<const double> b);
// Exact permutation distribution of U over all C(n+m, n) splits of the
// pooled midranks (ties included).
MannWhitneyResult MannWhitneyExact(std::span<const double> a,
                                   std::span<const double> b);
// Normal approximation with tie and continuity correction.
MannWhitneyResult MannWhitneyNormal(std::span<const double> a,
                                    std::span<const double> b);

double Median(std::vector<double> values);

struct RunRecord {
  std::string label;
  std::string target;
  std::string policy;
  double k = 0;
  uint64_t rng_seed = 0;
  uint64_t final_coverage = 0;
  std::optional<uint64_t> time_to_first_crash;
  std::vector<std::pair<uint64_t, uint64_t>> coverage_series;
};

struct TargetComparison {
  std::string target;
  double median_a = 0;
  double median_b = 0;
  // 1/0 outcome of comparing the medians on this target.
  int wins_a = 0;
  int wins_b = 0;
  int ties = 0;
  double p_value = 1;
  // Median first-crash execution of a divided by b's; absent unless both
  // policies crashed in at least one round.
  std::optional<double> first_crash_ratio;
};

struct ComparisonResult {
  std::string policy_a;
  std::string policy_b;
  std::vector<TargetComparison> targets;
  // Target counts; wins_a + wins_b + ties == targets.size().
  int wins_a = 0;
  int wins_b = 0;
  int ties = 0;
  // Over every run of the policy on every target.
  double median_a = 0;
  double median_b = 0;
  double p_value = 1;
};

// Groups records by policy (in order of first appearance) and compares every
// pair of policies target by target on final coverage. Throws
// std::invalid_argument with fewer than two policies, duplicate labels or
// policies that were not run on the same targets.
std::vector<ComparisonResult> CompareRuns(std::span<const RunRecord> records);

// Columns: policy_a,policy_b,target,median_a,median_b,wins_a,wins_b,ties,
// p_value; one row per policy pair and target.
std::string ComparisonCsv(std::span<const ComparisonResult> results);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Self-contained SVG line chart, one polyline per series, with a legend and
// axes labelled "executions" and "coverage". Throws std::invalid_argument on
// an empty series list.
std::string CoveragePlotSvg(std::span<const PlotSeries> series);
void EmitCoveragePlot(std::span<const PlotSeries> series,
                      const std::string &path);

// Writes `text` to `path`, throwing std::runtime_error naming the path.
void WriteTextFile(const std::string &path, const std::string &text);

}  // namespace treefuzz

#endif  // TREEFUZZ_REPORT_H_
