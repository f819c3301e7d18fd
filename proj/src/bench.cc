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


#include "treefuzz/bench.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>

namespace treefuzz {

std::vector<BenchTarget> GenerateCorpus(size_t count, uint64_t gen_seed,
                                        const GenParams &params) {
  std::vector<BenchTarget> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "prog_%03zu", i);
    out.push_back({name, SyntheticProgram::Generate(gen_seed + i, params)});
  }
  return out;
}

std::vector<BenchTarget> LoadCorpusDir(const std::string &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw ConfigError("not a directory: '" + dir + "'");
  }
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no *.json programs in '" + dir + "'");
  std::vector<BenchTarget> out;
  for (const fs::path &f : files) {
    out.push_back({f.stem().string(), SyntheticProgram::LoadFile(f.string())});
  }
  return out;
}

std::vector<ByteArray> DefaultSeeds(const SyntheticProgram &program) {
  return {ByteArray(program.max_input_len(), 0)};
}

std::vector<RunRecord> RunBench(std::span<const BenchTarget> targets,
                                std::span<const BenchArm> arms, int rounds,
                                int jobs, const std::vector<ByteArray> &seeds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  for (const BenchArm &arm : arms) arm.config.Validate();
  const size_t total = targets.size() * arms.size() * rounds;
  std::vector<RunRecord> records(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<size_t> next{0};

  auto worker = [&] {
    for (size_t i = next++; i < total; i = next++) {
      const size_t round = i % rounds;
      const size_t arm_index = (i / rounds) % arms.size();
      const size_t target_index = i / rounds / arms.size();
      const BenchTarget &t = targets[target_index];
      const BenchArm &arm = arms[arm_index];
      try {
        CampaignConfig config = arm.config;
        config.rng_seed += round;
        SyntheticTarget target(t.program, config.map_size);
        CampaignResult result = RunCampaign(
            config, target, seeds.empty() ? DefaultSeeds(t.program) : seeds);
        RunRecord &r = records[i];
        r.label = t.name + "/" + arm.name + "/" + std::to_string(round);
        r.target = t.name;
        r.policy = arm.name;
        r.k = config.k;
        r.rng_seed = config.rng_seed;
        r.final_coverage = result.stats.final_coverage;
        r.time_to_first_crash = result.stats.time_to_first_crash;
        r.coverage_series = result.stats.CoverageSeries();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t threads = std::min<size_t>(jobs, std::max<size_t>(total, 1));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread &t : pool) t.join();
  for (const std::exception_ptr &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

std::vector<SweepRow> SweepTable(std::span<const RunRecord> records) {
  std::vector<SweepRow> rows;
  std::vector<double> sums;
  for (const RunRecord &r : records) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SweepRow &row) { return row.k == r.k; });
    if (it == rows.end()) {
      rows.push_back({r.k, 0, 0});
      sums.push_back(0);
      it = rows.end() - 1;
    }
    const size_t at = static_cast<size_t>(it - rows.begin());
    sums[at] += static_cast<double>(r.final_coverage);
    ++rows[at].runs;
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    rows[i].mean_coverage = sums[i] / static_cast<double>(rows[i].runs);
  }
  return rows;
}

std::string SweepCsv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "k,mean_coverage,runs\n";
  for (const SweepRow &row : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%g,%.4f,%zu\n", row.k, row.mean_coverage,
                  row.runs);
    out << buf;
  }
  return out.str();
}

std::vector<PlotSeries> MeanCoverageSeries(std::span<const RunRecord> records,
                                           const std::string &target) {
  std::vector<std::string> arms;
  std::map<std::string, std::vector<const RunRecord *>> by_arm;
  std::vector<uint64_t> xs;
  for (const RunRecord &r : records) {
    if (r.target != target) continue;
    if (!by_arm.contains(r.policy)) arms.push_back(r.policy);
    by_arm[r.policy].push_back(&r);
    for (auto [x, y] : r.coverage_series) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<PlotSeries> out;
  for (const std::string &arm : arms) {
    PlotSeries s;
    s.label = arm;
    const auto &runs = by_arm[arm];
    for (uint64_t x : xs) {
      double sum = 0;
      for (const RunRecord *r : runs) {
        // Last recorded value at or before x.
        uint64_t y = 0;
        for (auto [rx, ry] : r->coverage_series) {
          if (rx > x) break;
          y = ry;
        }
        sum += static_cast<double>(y);
      }
      s.points.push_back(
          {static_cast<double>(x), sum / static_cast<double>(runs.size())});
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace treefuzz
