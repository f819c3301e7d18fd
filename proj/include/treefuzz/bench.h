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


// Batches of campaigns over synthetic programs: corpus generation, parallel
// execution with results stored in a fixed order, and k sweeps.

#ifndef TREEFUZZ_BENCH_H_
#define TREEFUZZ_BENCH_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treefuzz/campaign.h"
#include "treefuzz/report.h"
#include "treefuzz/target.h"

namespace treefuzz {

struct BenchTarget {
  std::string name;
  SyntheticProgram program;
};

// Default benchmark corpus: 50 depth-10 binary decision trees over 32-byte
// inputs, half of the decisions being magic-byte tests.
inline constexpr size_t kBenchCorpusSize = 50;
inline constexpr uint64_t kBenchCorpusSeed = 1000;
inline GenParams BenchCorpusParams() {
  GenParams p;
  p.depth = 10;
  p.fanout = 2;
  p.magic_byte_fraction = 0.5;
  p.crash_fraction = 0.05;
  p.max_input_len = 32;
  return p;
}

// `count` programs named prog_000, prog_001, ...; program i is generated
// from gen_seed + i.
std::vector<BenchTarget> GenerateCorpus(size_t count, uint64_t gen_seed,
                                        const GenParams &params);

// Loads every *.json file of `dir` in name order; the name is the file stem.
// Throws ConfigError on unreadable or malformed files and on an empty dir.
std::vector<BenchTarget> LoadCorpusDir(const std::string &dir);

// A configuration under test. Its rng_seed is the base seed; round r runs
// with rng_seed + r.
struct BenchArm {
  std::string name;
  CampaignConfig config;
};

// One input of max_input_len zero bytes.
std::vector<ByteArray> DefaultSeeds(const SyntheticProgram &program);

// Runs targets x arms x rounds campaigns on up to `jobs` threads. Records
// come back target-major, then arm, then round, whatever `jobs` is. The
// record's policy field holds the arm name. Empty `seeds` means DefaultSeeds
// per target.
std::vector<RunRecord> RunBench(std::span<const BenchTarget> targets,
                                std::span<const BenchArm> arms, int rounds,
                                int jobs,
                                const std::vector<ByteArray> &seeds = {});

// One row per distinct k (first-appearance order): k, mean final coverage
// over every record with that k, and the number of records averaged.
struct SweepRow {
  double k = 0;
  double mean_coverage = 0;
  size_t runs = 0;
};
std::vector<SweepRow> SweepTable(std::span<const RunRecord> records);
// Columns: k,mean_coverage,runs.
std::string SweepCsv(std::span<const SweepRow> rows);

// Mean coverage over time per arm, sampled at the union of the recorded
// execution counts (step interpolation).
std::vector<PlotSeries> MeanCoverageSeries(std::span<const RunRecord> records,
                                           const std::string &target);

}  // namespace treefuzz

#endif  // TREEFUZZ_BENCH_H_
