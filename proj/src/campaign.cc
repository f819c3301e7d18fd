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

#include "treefuzz/campaign.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "treefuzz/mutation.h"
#include "treefuzz/rng.h"

namespace treefuzz {

std::string_view RetentionModeName(RetentionMode mode) {
  return mode == RetentionMode::kNewBranch ? "new-branch" : "new-bucket";
}

std::optional<RetentionMode> RetentionModeFromName(std::string_view name) {
  if (name == "new-branch") return RetentionMode::kNewBranch;
  if (name == "new-bucket") return RetentionMode::kNewBucket;
  return std::nullopt;
}

bool RetainDecision(const BranchSet &novelty, RetentionMode) {
  return !novelty.empty();
}

void CampaignConfig::Validate() const {
  auto fail = [](const std::string &what) {
    throw std::invalid_argument("invalid campaign config: " + what);
  };
  if (energy < 1) fail("energy must be >= 1");
  if (!(k >= 0.0)) fail("k must be >= 0");
  if (budget_secs && !(*budget_secs > 0)) fail("budget_secs must be > 0");
  if (havoc_stack_pow2 < 1 || havoc_stack_pow2 > 10) {
    fail("havoc_stack_pow2 must be in [1, 10]");
  }
  if (!(splice_fraction >= 0.0 && splice_fraction <= 1.0)) {
    fail("splice_fraction must be in [0, 1]");
  }
  if (stats_interval < 1) fail("stats_interval must be >= 1");
  CheckMapSize(map_size);
}

std::map<std::string, std::string> CampaignConfig::ToKeyValues() const {
  std::map<std::string, std::string> kv;
  kv["rng_seed"] = std::to_string(rng_seed);
  kv["budget_execs"] = std::to_string(budget_execs);
  if (budget_secs) {
    std::ostringstream s;
    s << *budget_secs;
    kv["budget_secs"] = s.str();
  }
  kv["energy"] = std::to_string(energy);
  kv["policy"] = std::string(PolicyName(policy));
  std::ostringstream ks;
  ks << k;
  kv["k"] = ks.str();
  kv["map_size"] = std::to_string(map_size);
  kv["max_input_len"] = std::to_string(max_input_len);
  kv["retention"] = std::string(RetentionModeName(retention));
  kv["deterministic_stage"] = deterministic_stage ? "true" : "false";
  kv["havoc_stack_pow2"] = std::to_string(havoc_stack_pow2);
  std::ostringstream sf;
  sf << splice_fraction;
  kv["splice_fraction"] = sf.str();
  kv["stats_interval"] = std::to_string(stats_interval);
  return kv;
}

namespace {

template <typename T>
T ParseNumber(const std::string &key, const std::string &value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

double ParseReal(const std::string &key, const std::string &value) {
  try {
    size_t used = 0;
    double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception &) {
    throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  }
}

bool ParseBool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

void CampaignConfig::Apply(const std::map<std::string, std::string> &values) {
  for (const auto &[key, value] : values) {
    if (key == "rng_seed") {
      rng_seed = ParseNumber<uint64_t>(key, value);
    } else if (key == "budget_execs") {
      budget_execs = ParseNumber<uint64_t>(key, value);
    } else if (key == "budget_secs") {
      budget_secs = ParseReal(key, value);
    } else if (key == "energy") {
      energy = ParseNumber<int>(key, value);
    } else if (key == "policy") {
      auto p = PolicyFromName(value);
      if (!p) throw std::invalid_argument("unknown policy '" + value + "'");
      policy = *p;
    } else if (key == "k") {
      k = ParseReal(key, value);
    } else if (key == "map_size") {
      map_size = ParseNumber<size_t>(key, value);
    } else if (key == "max_input_len") {
      max_input_len = ParseNumber<size_t>(key, value);
    } else if (key == "retention") {
      auto r = RetentionModeFromName(value);
      if (!r) throw std::invalid_argument("unknown retention '" + value + "'");
      retention = *r;
    } else if (key == "deterministic_stage") {
      deterministic_stage = ParseBool(key, value);
    } else if (key == "havoc_stack_pow2") {
      havoc_stack_pow2 = ParseNumber<int>(key, value);
    } else if (key == "splice_fraction") {
      splice_fraction = ParseReal(key, value);
    } else if (key == "stats_interval") {
      stats_interval = ParseNumber<uint64_t>(key, value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

std::map<std::string, std::string> ParseKeyValues(std::string_view text) {
  std::map<std::string, std::string> out;
  size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = Trim(view);
    if (view.empty()) continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    std::string key(Trim(view.substr(0, eq)));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    }
    out[key] = std::string(Trim(view.substr(eq + 1)));
  }
  return out;
}

std::vector<std::pair<uint64_t, uint64_t>> CampaignStats::CoverageSeries()
    const {
  std::vector<std::pair<uint64_t, uint64_t>> series;
  series.reserve(rows.size());
  for (const StatsRow &row : rows) series.emplace_back(row.execs, row.coverage);
  return series;
}

namespace {

class CampaignRunner {
 public:
  CampaignRunner(const CampaignConfig &config, const Target &target,
                 const CampaignHooks &hooks)
      : config_(config),
        target_(target),
        hooks_(hooks),
        coverage_(config.map_size),
        bucket_coverage_(config.map_size),
        crash_coverage_(config.map_size),
        corpus_(config.map_size),
        scheduler_(config.policy, config.k,
                   Rng::Substream(config.rng_seed, "scheduler")),
        havoc_rng_(Rng::Substream(config.rng_seed, "havoc")),
        splice_rng_(Rng::Substream(config.rng_seed, "splice")),
        start_(std::chrono::steady_clock::now()) {
    config_.Validate();
    if (target.map_size() != config.map_size) {
      throw ConfigError("target map size " + std::to_string(target.map_size()) +
                        " differs from campaign map size " +
                        std::to_string(config.map_size));
    }
    limits_.max_input_len =
        config.max_input_len ? config.max_input_len : target.max_input_len();
  }

  CampaignResult Run(const std::vector<ByteArray> &initial_inputs) {
    if (initial_inputs.empty()) {
      throw std::invalid_argument("campaign needs at least one initial input");
    }
    std::vector<InitialSeed> initial;
    for (const ByteArray &bytes : initial_inputs) {
      Input input{next_id_++, bytes};
      ExecutionResult res = target_.Execute(input);
      ++stats_.executions;
      Observe(input, res);
      initial.push_back({input.id, res.hits});
      corpus_.Add(std::move(input), std::move(res.hits), res.duration_us);
    }
    tree_ = SeedMutationTree::Init(initial);
    for (const CorpusEntry &e : corpus_.entries()) {
      scheduler_.OnSeedAdded(corpus_, e);
    }
    PushRow();

    while (fuzz_execs_ < config_.budget_execs && !OutOfTime()) {
      ScheduleOnce();
      if (hooks_.should_stop && hooks_.should_stop(stats_, corpus_, tree_)) {
        break;
      }
    }
    if (stats_.rows.back().execs != stats_.executions) PushRow();
    stats_.seeds_retained = corpus_.size();
    stats_.final_coverage = coverage_.set_count();
    return CampaignResult{std::move(stats_), std::move(corpus_),
                          std::move(tree_), std::move(crash_inputs_)};
  }

 private:
  void ScheduleOnce() {
    Selection sel = scheduler_.Select(tree_, corpus_);
    ++stats_.schedules;
    stats_.total_nodes_examined += sel.nodes_examined;
    if (hooks_.on_select) hooks_.on_select(tree_, sel);

    // Copy: the corpus grows while this seed is fuzzed.
    const Input seed = corpus_.Get(sel.input).input;
    const bool first_time = corpus_.Get(sel.input).n_scheduled == 0;
    corpus_.MarkScheduled(sel.input);
    BranchSet new_branches;
    const uint64_t iteration = stats_.schedules;

    auto run = [&](ByteArray bytes, MutationKind kind) {
      if (fuzz_execs_ >= config_.budget_execs) return false;
      Input input{next_id_++, std::move(bytes)};
      ExecutionResult res = target_.Execute(input);
      ++fuzz_execs_;
      ++stats_.executions;
      if (Observe(input, res)) {
        tree_.AddSeed(sel.seed_node, input.id, res.hits,
                      EdgeLabel{std::string(MutationKindName(kind)),
                                iteration});
        new_branches.MergeFrom(res.hits);
        const CorpusEntry &entry =
            corpus_.Add(std::move(input), std::move(res.hits), res.duration_us);
        scheduler_.OnSeedAdded(corpus_, entry);
      }
      if (stats_.executions % config_.stats_interval == 0) PushRow();
      return true;
    };

    bool budget_left = true;
    if (first_time && config_.deterministic_stage) {
      ForEachDeterministicMutation(
          seed.bytes, [&](ByteArray &&bytes, const MutationOp &op) {
            budget_left = run(std::move(bytes), op.kind);
            return budget_left;
          });
    }
    for (int i = 0; budget_left && i < config_.energy; ++i) {
      const int stack = 1 << (1 + havoc_rng_.Below(config_.havoc_stack_pow2));
      MutationKind kind = MutationKind::kHavoc;
      ByteArray base = seed.bytes;
      if (corpus_.size() > 1 && splice_rng_.Chance(config_.splice_fraction)) {
        size_t partner = splice_rng_.Below(corpus_.size() - 1);
        if (partner >= corpus_.IndexOf(seed.id)) ++partner;
        auto spliced = Splice(seed, corpus_.entries()[partner].input, splice_rng_);
        if (spliced) {
          base = std::move(spliced->bytes);
          kind = MutationKind::kSplice;
        }
      }
      budget_left = run(Havoc(base, havoc_rng_, stack, limits_), kind);
    }
    scheduler_.Complete(tree_, sel, new_branches);
  }

  // Updates coverage and statistics for one execution; returns whether the
  // input should be retained.
  bool Observe(const Input &input, const ExecutionResult &res) {
    const uint64_t exec_index = stats_.executions - 1;
    corpus_.NoteExecution(res.hits);
    BranchSet novelty = coverage_.RecordExecution(res.hits);
    if (config_.retention == RetentionMode::kNewBucket) {
      novelty = bucket_coverage_.RecordExecution(
          BucketizeHits(res.hit_counts, config_.map_size));
    }
    if (res.status == ExecStatus::kCrash &&
        !crash_coverage_.RecordExecution(res.hits).empty()) {
      stats_.crashes.push_back({input.id, exec_index});
      if (!stats_.time_to_first_crash) stats_.time_to_first_crash = exec_index;
      crash_inputs_.push_back(input);
    }
    return RetainDecision(novelty, config_.retention);
  }

  void PushRow() {
    StatsRow row;
    row.execs = stats_.executions;
    row.schedules = stats_.schedules;
    row.coverage = coverage_.set_count();
    row.seeds = corpus_.size();
    row.crashes = stats_.crashes.size();
    row.nodes_examined = stats_.total_nodes_examined;
    stats_.rows.push_back(row);
  }

  bool OutOfTime() const {
    if (!config_.budget_secs) return false;
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start_;
    return elapsed.count() >= *config_.budget_secs;
  }

  CampaignConfig config_;
  const Target &target_;
  const CampaignHooks &hooks_;
  HavocLimits limits_;
  CoverageMap coverage_;
  CoverageMap bucket_coverage_;
  CoverageMap crash_coverage_;
  Corpus corpus_;
  SeedMutationTree tree_;
  Scheduler scheduler_;
  Rng havoc_rng_;
  Rng splice_rng_;
  std::chrono::steady_clock::time_point start_;
  InputId next_id_ = 0;
  uint64_t fuzz_execs_ = 0;
  CampaignStats stats_;
  std::vector<Input> crash_inputs_;
};

}  // namespace

CampaignResult RunCampaign(const CampaignConfig &config, const Target &target,
                           const std::vector<ByteArray> &initial_inputs,
                           const CampaignHooks &hooks) {
  CampaignRunner runner(config, target, hooks);
  return runner.Run(initial_inputs);
}

void WriteCorpusDir(const CampaignResult &result, const std::string &dir) {
  namespace fs = std::filesystem;
  auto write = [](const fs::path &path, const void *data, size_t size) {
    std::ofstream out(path, std::ios::binary);
    out.write(static_cast<const char *>(data),
              static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
  const fs::path corpus_dir = fs::path(dir) / "corpus";
  const fs::path crash_dir = fs::path(dir) / "crashes";
  std::error_code ec;
  fs::create_directories(corpus_dir, ec);
  fs::create_directories(crash_dir, ec);
  if (!fs::is_directory(corpus_dir) || !fs::is_directory(crash_dir)) {
    throw std::runtime_error("cannot create output directories under " + dir);
  }
  for (const CorpusEntry &e : result.corpus.entries()) {
    const std::string id = std::to_string(e.input.id);
    write(corpus_dir / (id + ".bin"), e.input.bytes.data(),
          e.input.bytes.size());
    const std::string branches = e.branches.Serialize();
    write(corpus_dir / (id + ".branches"), branches.data(), branches.size());
  }
  for (const Input &crash : result.crash_inputs) {
    write(crash_dir / (std::to_string(crash.id) + ".bin"), crash.bytes.data(),
          crash.bytes.size());
  }
}

std::vector<ByteArray> ReadSeedDir(const std::string &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw std::runtime_error("seed directory '" + dir + "' is not readable");
  }
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ByteArray> seeds;
  for (const fs::path &path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read seed " + path.string());
    seeds.emplace_back(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  }
  return seeds;
}

}  // namespace treefuzz
