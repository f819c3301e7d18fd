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


// treefuzz command-line driver.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treefuzz/bench.h"
#include "treefuzz/campaign.h"
#include "treefuzz/report.h"
#include "treefuzz/seed_tree.h"
#include "treefuzz/target.h"

namespace fs = std::filesystem;
using namespace treefuzz;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Campaign options shared by fuzz, bench and sweep-k. Flags left unset fall
// back to the --config file, then to the built-in defaults.
struct CampaignFlags {
  std::string config_file;
  std::optional<std::string> policy;
  std::optional<double> k;
  std::optional<int> energy;
  std::optional<uint64_t> budget_execs;
  std::optional<double> budget_secs;
  std::optional<uint64_t> rng_seed;
  std::optional<size_t> map_size;
  std::optional<uint64_t> stats_interval;

  void Register(CLI::App *app, bool with_policy) {
    app->add_option("--config", config_file, "key=value campaign config file");
    if (with_policy) {
      app->add_option("--policy", policy,
                      "mcts, fifo, rare-branch, unfuzzed-first, low-frequency");
      app->add_option("--k", k, "exploration constant");
    }
    app->add_option("--energy", energy, "mutations per schedule");
    app->add_option("--budget-execs", budget_execs, "fuzzing executions");
    app->add_option("--budget-secs", budget_secs, "wall-clock cap");
    app->add_option("--rng-seed", rng_seed, "base random seed");
    app->add_option("--map-size", map_size, "coverage map size (power of 2)");
    app->add_option("--stats-interval", stats_interval,
                    "executions between stats rows");
  }

  CampaignConfig Build() const {
    CampaignConfig config;
    try {
      if (!config_file.empty()) {
        config.Apply(ParseKeyValues(ReadFile(config_file)));
      }
      std::map<std::string, std::string> kv;
      auto put = [&](const char *key, const auto &value) {
        if (value) {
          std::ostringstream s;
          s.precision(17);
          s << *value;
          kv[key] = s.str();
        }
      };
      put("policy", policy);
      put("k", k);
      put("energy", energy);
      put("budget_execs", budget_execs);
      put("budget_secs", budget_secs);
      put("rng_seed", rng_seed);
      put("map_size", map_size);
      put("stats_interval", stats_interval);
      config.Apply(kv);
      config.Validate();
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    return config;
  }
};

// A synthetic program file, or an external command containing "@@".
std::unique_ptr<Target> OpenTarget(const std::string &spec, size_t map_size,
                                   int timeout_ms, size_t max_input_len) {
  std::error_code ec;
  if (fs::is_regular_file(spec, ec)) {
    try {
      return std::make_unique<SyntheticTarget>(SyntheticProgram::LoadFile(spec),
                                               map_size);
    } catch (const std::exception &e) {
      throw UsageError(e.what());
    }
  }
  if (spec.find(kInputPlaceholder) != std::string::npos) {
    return std::make_unique<ExternalTarget>(
        spec, std::chrono::milliseconds(timeout_ms), map_size, max_input_len);
  }
  throw UsageError("--target must be a program file or a command with @@: '" +
                   spec + "'");
}

std::vector<ByteArray> LoadSeeds(const std::string &dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw UsageError("seed directory not found: '" + dir + "'");
  }
  std::vector<ByteArray> seeds;
  try {
    seeds = ReadSeedDir(dir);
  } catch (const std::exception &e) {
    throw UsageError(e.what());
  }
  if (seeds.empty()) throw UsageError("no seeds in '" + dir + "'");
  return seeds;
}

std::vector<BenchTarget> LoadTargets(const std::string &dir) {
  try {
    return LoadCorpusDir(dir);
  } catch (const ConfigError &e) {
    throw UsageError(e.what());
  }
}

void MakeDir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("cannot create directory '" + dir + "'");
  }
}

std::vector<std::string> SplitList(const std::string &list) {
  std::vector<std::string> out;
  std::stringstream s(list);
  std::string item;
  while (std::getline(s, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct FuzzCommand {
  CampaignFlags flags;
  std::string target;
  std::string seeds;
  std::string out;
  int timeout_ms = 1000;
  size_t max_input_len = 1024;

  void Register(CLI::App *app) {
    app->add_option("--target", target,
                    "synthetic program file or command with @@")
        ->required();
    app->add_option("--seeds", seeds, "directory of initial inputs")->required();
    app->add_option("--out", out, "output directory")->required();
    app->add_option("--timeout-ms", timeout_ms, "external target timeout");
    app->add_option("--max-input-len", max_input_len,
                    "input length cap for external targets");
    flags.Register(app, true);
  }

  int Run() const {
    const CampaignConfig config = flags.Build();
    auto tgt = OpenTarget(target, config.map_size, timeout_ms, max_input_len);
    const std::vector<ByteArray> initial = LoadSeeds(seeds);
    CampaignResult result = RunCampaign(config, *tgt, initial);
    MakeDir(out);
    WriteStatsCsv(result.stats, (fs::path(out) / "stats.csv").string());
    WriteTextFile((fs::path(out) / "tree.json").string(), result.tree.Dump());
    WriteCorpusDir(result, out);
    std::printf("execs=%llu schedules=%llu coverage=%llu seeds=%llu crashes=%zu\n",
                static_cast<unsigned long long>(result.stats.executions),
                static_cast<unsigned long long>(result.stats.schedules),
                static_cast<unsigned long long>(result.stats.final_coverage),
                static_cast<unsigned long long>(result.stats.seeds_retained),
                result.stats.crashes.size());
    return 0;
  }
};

struct BenchCommand {
  CampaignFlags flags;
  std::string targets;
  std::string policies = "mcts,fifo";
  int rounds = 10;
  int jobs = 1;
  std::string out;

  void Register(CLI::App *app) {
    app->add_option("--targets", targets, "directory of program files")
        ->required();
    app->add_option("--policies", policies, "comma-separated policy list");
    app->add_option("--rounds", rounds, "rounds per target and policy")
        ->check(CLI::PositiveNumber);
    app->add_option("--jobs", jobs, "parallel campaigns")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", out, "output directory")->required();
    flags.Register(app, false);
    app->add_option("--k", flags.k, "exploration constant for mcts");
  }

  int Run() const {
    const CampaignConfig base = flags.Build();
    std::vector<BenchArm> arms;
    for (const std::string &name : SplitList(policies)) {
      auto policy = PolicyFromName(name);
      if (!policy) throw UsageError("unknown policy '" + name + "'");
      BenchArm arm{name, base};
      arm.config.policy = *policy;
      arms.push_back(arm);
    }
    if (arms.size() < 2) throw UsageError("--policies needs two or more");
    const std::vector<BenchTarget> corpus = LoadTargets(targets);
    const std::vector<RunRecord> records = RunBench(corpus, arms, rounds, jobs);
    const std::vector<ComparisonResult> cmp = CompareRuns(records);

    MakeDir(out);
    WriteTextFile((fs::path(out) / "comparison.csv").string(),
                  ComparisonCsv(cmp));
    std::string runs = "label,target,policy,rng_seed,final_coverage,"
                       "time_to_first_crash\n";
    for (const RunRecord &r : records) {
      runs += r.label + ',' + r.target + ',' + r.policy + ',' +
              std::to_string(r.rng_seed) + ',' +
              std::to_string(r.final_coverage) + ',' +
              (r.time_to_first_crash ? std::to_string(*r.time_to_first_crash)
                                     : "") +
              '\n';
    }
    WriteTextFile((fs::path(out) / "runs.csv").string(), runs);
    const std::string plots = (fs::path(out) / "plots").string();
    MakeDir(plots);
    for (const BenchTarget &t : corpus) {
      EmitCoveragePlot(MeanCoverageSeries(records, t.name),
                       (fs::path(plots) / (t.name + ".svg")).string());
    }
    for (const ComparisonResult &c : cmp) {
      std::printf("%s vs %s: wins %d/%d ties %d median %.1f vs %.1f p=%.4g\n",
                  c.policy_a.c_str(), c.policy_b.c_str(), c.wins_a, c.wins_b,
                  c.ties, c.median_a, c.median_b, c.p_value);
    }
    return 0;
  }
};

struct SweepCommand {
  CampaignFlags flags;
  std::string targets;
  std::vector<double> k_values = {0, 0.014, 0.14, 1.4, 14};
  int rounds = 10;
  int jobs = 1;
  std::string out;

  void Register(CLI::App *app) {
    app->add_option("--targets", targets, "directory of program files")
        ->required();
    app->add_option("--k-values", k_values, "comma-separated k list")
        ->delimiter(',');
    app->add_option("--rounds", rounds, "rounds per target and k")
        ->check(CLI::PositiveNumber);
    app->add_option("--jobs", jobs, "parallel campaigns")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", out, "output directory (default: stdout only)");
    flags.Register(app, false);
  }

  int Run() const {
    const CampaignConfig base = flags.Build();
    std::vector<BenchArm> arms;
    for (double k : k_values) {
      if (!(k >= 0)) throw UsageError("k must be >= 0");
      BenchArm arm;
      std::ostringstream name;
      name << "k=" << k;
      arm.name = name.str();
      arm.config = base;
      arm.config.policy = Policy::kMcts;
      arm.config.k = k;
      arms.push_back(arm);
    }
    const std::vector<BenchTarget> corpus = LoadTargets(targets);
    const std::vector<RunRecord> records = RunBench(corpus, arms, rounds, jobs);
    const std::string csv = SweepCsv(SweepTable(records));
    if (!out.empty()) {
      MakeDir(out);
      WriteTextFile((fs::path(out) / "sweep_k.csv").string(), csv);
    }
    std::fputs(csv.c_str(), stdout);
    return 0;
  }
};

struct GenCorpusCommand {
  size_t count = kBenchCorpusSize;
  uint64_t gen_seed = kBenchCorpusSeed;
  GenParams params = BenchCorpusParams();
  std::string out;

  void Register(CLI::App *app) {
    app->add_option("--count", count, "number of programs");
    app->add_option("--gen-seed", gen_seed, "seed of the first program");
    app->add_option("--depth", params.depth, "decision depth");
    app->add_option("--fanout", params.fanout, "arms per decision");
    app->add_option("--magic-fraction", params.magic_byte_fraction,
                    "share of equality decisions");
    app->add_option("--crash-fraction", params.crash_fraction,
                    "share of crashing leaves");
    app->add_option("--max-input-len", params.max_input_len, "input length");
    app->add_option("--out", out, "output directory")->required();
  }

  int Run() const {
    try {
      params.Validate();
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    MakeDir(out);
    for (const BenchTarget &t : GenerateCorpus(count, gen_seed, params)) {
      t.program.SaveFile((fs::path(out) / (t.name + ".json")).string());
    }
    std::printf("wrote %zu programs to %s\n", count, out.c_str());
    return 0;
  }
};

struct ReplayCommand {
  std::string target;
  std::string input;
  size_t map_size = kDefaultMapSize;
  int timeout_ms = 1000;

  void Register(CLI::App *app) {
    app->add_option("--target", target,
                    "synthetic program file or command with @@")
        ->required();
    app->add_option("--input", input, "input file")->required();
    app->add_option("--map-size", map_size, "coverage map size");
    app->add_option("--timeout-ms", timeout_ms, "external target timeout");
  }

  int Run() const {
    try {
      CheckMapSize(map_size);
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    auto tgt = OpenTarget(target, map_size, timeout_ms, 1024);
    const std::string bytes = ReadFile(input);
    Input in{0, ByteArray(bytes.begin(), bytes.end())};
    const ExecutionResult r = tgt->Execute(in);
    std::printf("status=%s duration=%lld branches=%zu\n",
                std::string(ExecStatusName(r.status)).c_str(),
                static_cast<long long>(r.duration_us), r.hits.size());
    if (!r.hits.empty()) std::printf("%s\n", r.hits.Serialize().c_str());
    return 0;
  }
};

struct DumpTreeCommand {
  std::string out;

  void Register(CLI::App *app) {
    app->add_option("--out", out, "output directory of a fuzz run")->required();
  }

  int Run() const {
    const std::string path = (fs::path(out) / "tree.json").string();
    std::string text = ReadFile(path);
    SeedMutationTree tree;
    try {
      tree = SeedMutationTree::Load(text);
    } catch (const TreeParseError &e) {
      throw std::runtime_error(path + ": " + e.what());
    }
    std::fputs(tree.Outline().c_str(), stdout);
    return 0;
  }
};

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"treefuzz: tree-scheduled greybox fuzzing"};
  app.require_subcommand(1);
  FuzzCommand fuzz;
  BenchCommand bench;
  SweepCommand sweep;
  GenCorpusCommand gen;
  ReplayCommand replay;
  DumpTreeCommand dump;
  CLI::App *fuzz_cmd = app.add_subcommand("fuzz", "run one campaign");
  fuzz.Register(fuzz_cmd);
  CLI::App *bench_cmd =
      app.add_subcommand("bench", "compare policies over a program corpus");
  bench.Register(bench_cmd);
  CLI::App *sweep_cmd =
      app.add_subcommand("sweep-k", "mean coverage per exploration constant");
  sweep.Register(sweep_cmd);
  CLI::App *gen_cmd =
      app.add_subcommand("gen-corpus", "write synthetic program files");
  gen.Register(gen_cmd);
  CLI::App *replay_cmd =
      app.add_subcommand("replay", "execute one input and print the result");
  replay.Register(replay_cmd);
  CLI::App *dump_cmd =
      app.add_subcommand("dump-tree", "print the seed tree of a fuzz run");
  dump.Register(dump_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    for (const CLI::App *sub : app.get_subcommands()) {
      std::cerr << sub->help();
    }
    if (app.get_subcommands().empty()) std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*fuzz_cmd) return fuzz.Run();
    if (*bench_cmd) return bench.Run();
    if (*sweep_cmd) return sweep.Run();
    if (*gen_cmd) return gen.Run();
    if (*replay_cmd) return replay.Run();
    if (*dump_cmd) return dump.Run();
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
