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

// The fuzzing loop: select a seed, mutate it `energy` times (plus one
// deterministic sweep the first time it is scheduled), keep every mutant
// that covers something new, then report the schedule back to the scheduler.

#ifndef TREEFUZZ_CAMPAIGN_H_
#define TREEFUZZ_CAMPAIGN_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "treefuzz/corpus.h"
#include "treefuzz/coverage.h"
#include "treefuzz/scheduler.h"
#include "treefuzz/seed_tree.h"
#include "treefuzz/target.h"

namespace treefuzz {

enum class RetentionMode { kNewBranch, kNewBucket };

std::string_view RetentionModeName(RetentionMode mode);
std::optional<RetentionMode> RetentionModeFromName(std::string_view name);

// Keep an execution iff its novelty (computed on plain ids for kNewBranch,
// bucketed ids for kNewBucket) is nonempty.
bool RetainDecision(const BranchSet &novelty, RetentionMode mode);

struct CampaignConfig {
  uint64_t rng_seed = 1;
  // Fuzzing executions, not counting the initial inputs.
  uint64_t budget_execs = 100000;
  // Optional wall-clock cap; makes results timing dependent.
  std::optional<double> budget_secs;
  int energy = 256;
  Policy policy = Policy::kMcts;
  double k = kDefaultK;
  size_t map_size = kDefaultMapSize;
  // 0 means "whatever the target declares".
  size_t max_input_len = 0;
  RetentionMode retention = RetentionMode::kNewBranch;
  bool deterministic_stage = true;
  // Havoc stacks 2^(1..havoc_stack_pow2) primitives.
  int havoc_stack_pow2 = 7;
  // Share of havoc executions that start from a splice.
  double splice_fraction = 0.125;
  // A stats row is recorded every this many executions.
  uint64_t stats_interval = 1000;

  // Throws std::invalid_argument.
  void Validate() const;

  // Flat key=value form; keys match the field names, policy and retention
  // use their textual names.
  std::map<std::string, std::string> ToKeyValues() const;
  // Overrides the fields named in `values`; unknown keys or bad values throw
  // std::invalid_argument.
  void Apply(const std::map<std::string, std::string> &values);
};

// Parses "key = value" lines; '#' starts a comment. Throws
// std::invalid_argument with the line number on malformed lines.
std::map<std::string, std::string> ParseKeyValues(std::string_view text);

struct StatsRow {
  uint64_t execs = 0;
  uint64_t schedules = 0;
  uint64_t coverage = 0;
  uint64_t seeds = 0;
  uint64_t crashes = 0;
  uint64_t nodes_examined = 0;
  friend bool operator==(const StatsRow &, const StatsRow &) = default;
};

struct CrashRecord {
  InputId id = 0;
  uint64_t exec_index = 0;
  friend bool operator==(const CrashRecord &, const CrashRecord &) = default;
};

struct CampaignStats {
  uint64_t executions = 0;
  uint64_t schedules = 0;
  uint64_t seeds_retained = 0;
  uint64_t total_nodes_examined = 0;
  uint64_t final_coverage = 0;
  // Snapshots at every stats interval plus the start and the end.
  std::vector<StatsRow> rows;
  // Crashes that reached new branches of the crash map.
  std::vector<CrashRecord> crashes;
  std::optional<uint64_t> time_to_first_crash;

  // (execution index, covered branch count) pairs.
  std::vector<std::pair<uint64_t, uint64_t>> CoverageSeries() const;
  friend bool operator==(const CampaignStats &, const CampaignStats &) = default;
};

struct CampaignResult {
  CampaignStats stats;
  Corpus corpus;
  SeedMutationTree tree;
  std::vector<Input> crash_inputs;
};

// Optional instrumentation points.
struct CampaignHooks {
  // Called after each selection, before the seed is fuzzed.
  std::function<void(const SeedMutationTree &, const Selection &)> on_select;
  // Checked after each schedule; returning true ends the campaign.
  std::function<bool(const CampaignStats &, const Corpus &,
                     const SeedMutationTree &)>
      should_stop;
};

// Runs one campaign. Every initial input is executed once and kept as a seed.
// Deterministic for a fixed config and synthetic target unless budget_secs is
// set. Target configuration errors propagate; crashes never stop the loop.
CampaignResult RunCampaign(const CampaignConfig &config, const Target &target,
                           const std::vector<ByteArray> &initial_inputs,
                           const CampaignHooks &hooks = {});

// Writes corpus/<id>.bin, corpus/<id>.branches and crashes/<id>.bin under
// `dir`. Throws std::runtime_error naming the path on I/O failure.
void WriteCorpusDir(const CampaignResult &result, const std::string &dir);

// Reads every regular file of `dir` in name order.
std::vector<ByteArray> ReadSeedDir(const std::string &dir);

}  // namespace treefuzz

#endif  // TREEFUZZ_CAMPAIGN_H_
