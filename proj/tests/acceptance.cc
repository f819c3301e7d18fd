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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Artifacts (comparison tables, plots, the
// k sweep) go to the directory given as the first argument, default
// ./acceptance_out.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "treefuzz/bench.h"
#include "treefuzz/campaign.h"
#include "treefuzz/report.h"
#include "treefuzz/rng.h"
#include "treefuzz/scheduler.h"

namespace fs = std::filesystem;
using namespace treefuzz;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char *format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char *format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::vector<BenchTarget> BenchCorpus(size_t count = kBenchCorpusSize) {
  return GenerateCorpus(count, kBenchCorpusSeed, BenchCorpusParams());
}

// 1. Every MCTS child choice equals a brute-force argmax.
Outcome ArgmaxOracle() {
  constexpr uint64_t kMinSteps = 10000;
  constexpr double kMaxSeconds = 60;
  const auto start = std::chrono::steady_clock::now();
  uint64_t steps = 0, mismatches = 0, campaigns = 0, bound_violations = 0;
  const std::vector<BenchTarget> corpus = BenchCorpus(8);
  const std::vector<double> ks = {0.0, 0.14, 1.4, 14.0};
  for (size_t i = 0; steps < kMinSteps && i < corpus.size() * ks.size(); ++i) {
    const BenchTarget &t = corpus[i % corpus.size()];
    CampaignConfig config;
    config.k = ks[i / corpus.size() % ks.size()];
    config.rng_seed = 100 + i;
    config.budget_execs = 100000;
    config.energy = 64;
    CampaignHooks hooks;
    hooks.on_select = [&](const SeedMutationTree &tree, const Selection &sel) {
      for (size_t s = 0; s + 1 < sel.path.size(); ++s) {
        ++steps;
        if (oracle::BestChild(tree, sel.path[s], config.k) != sel.path[s + 1]) {
          ++mismatches;
        }
      }
      if (!tree.node(sel.path.back()).IsLeaf()) ++mismatches;
      if (sel.nodes_examined > tree.MaxBranching() * tree.Height()) {
        ++bound_violations;
      }
    };
    SyntheticTarget target(t.program);
    RunCampaign(config, target, DefaultSeeds(t.program), hooks);
    ++campaigns;
  }
  const double secs = Seconds(start);
  Outcome o;
  o.pass = steps >= kMinSteps && mismatches == 0 && bound_violations == 0 &&
           secs < kMaxSeconds;
  o.detail = Fmt("%llu descent steps over %llu campaigns, %llu mismatches, "
                 "%llu descent-cost bound violations, %.1fs (limit %.0fs)",
                 (unsigned long long)steps, (unsigned long long)campaigns,
                 (unsigned long long)mismatches,
                 (unsigned long long)bound_violations, secs, kMaxSeconds);
  return o;
}

// 2. Tree invariants after 100k-execution campaigns on 20 programs.
Outcome TreeInvariants() {
  constexpr double kMaxSeconds = 300;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<BenchTarget> corpus = BenchCorpus(20);
  uint64_t violations = 0, nodes = 0;
  std::string first;
  auto violate = [&](const std::string &what) {
    if (violations++ == 0) first = what;
  };
  for (size_t i = 0; i < corpus.size(); ++i) {
    CampaignConfig config;
    config.rng_seed = 7 + i;
    config.budget_execs = 100000;
    SyntheticTarget target(corpus[i].program);
    const CampaignResult r =
        RunCampaign(config, target, DefaultSeeds(corpus[i].program));
    const SeedMutationTree &tree = r.tree;
    for (const std::string &v : tree.CheckInvariants()) violate(v);
    nodes += tree.size();
    // Independent re-derivation of the named properties.
    std::vector<BranchSet> unions(tree.size());
    for (size_t id = tree.size(); id-- > 0;) {
      const SeedNode &n = tree.node(static_cast<SeedId>(id));
      BranchSet u = n.own_branches;
      size_t variants = 0, seeds = 0;
      for (SeedId c : n.children) {
        u = u.Union(unions[c]);
        (tree.node(c).kind == NodeKind::kVariant ? variants : seeds)++;
      }
      unions[id] = u;
      if (u != n.subtree_branches) violate("subtree union at " + std::to_string(id));
      if (n.kind == NodeKind::kVariant && !n.IsLeaf()) violate("variant not a leaf");
      if (n.kind == NodeKind::kSeed && seeds > 0 && variants != 1) {
        violate("internal seed without exactly one variant");
      }
      if (n.kind == NodeKind::kSeed && seeds == 0 && variants != 0) {
        violate("leaf seed with a variant");
      }
    }
    if (tree.node(0).n_scheduled != r.stats.schedules) violate("root n");
    std::set<InputId> tree_inputs, corpus_inputs;
    for (const SeedNode &n : tree.nodes()) {
      if (n.kind == NodeKind::kSeed && !tree_inputs.insert(*n.input_ref).second) {
        violate("input on two seed nodes");
      }
    }
    for (const CorpusEntry &e : r.corpus.entries()) {
      corpus_inputs.insert(e.input.id);
    }
    if (tree_inputs != corpus_inputs ||
        corpus_inputs.size() != r.corpus.size()) {
      violate("corpus/tree bijection");
    }
  }
  const double secs = Seconds(start);
  Outcome o;
  o.pass = violations == 0 && secs < kMaxSeconds;
  o.detail = Fmt("20 campaigns x 100000 execs, %llu nodes checked, %llu "
                 "violations%s%s, %.1fs (limit %.0fs)",
                 (unsigned long long)nodes, (unsigned long long)violations,
                 first.empty() ? "" : ", first: ", first.c_str(), secs,
                 kMaxSeconds);
  return o;
}

// 3. Score numerics.
Outcome ScoreNumerics() {
  constexpr double kRelTol = 1e-9;
  const long double a = 3.0L + 1.4L * std::sqrt(std::log(2.0L));
  const long double b = 1.4L * std::sqrt(std::log(4.0L) / 2.0L);
  const double got_a = SeedScore(3, 1, 2, 1.4);
  const double got_b = SeedScore(0, 2, 4, 1.4);
  const double got_c = SeedScore(5, 5, 10, 0.0);
  const double err_a = std::abs(got_a - (double)a) / (double)a;
  const double err_b = std::abs(got_b - (double)b) / (double)b;
  bool monotone = true;
  for (uint64_t q : {0u, 3u, 50u}) {
    for (uint64_t n = 2; n <= 1000; ++n) {
      monotone = monotone && SeedScore(q, n, 1000, 1.4) <
                                 SeedScore(q, n - 1, 1000, 1.4);
    }
  }
  Outcome o;
  o.pass = err_a <= kRelTol && err_b <= kRelTol && got_c == 1.0 &&
           std::abs(got_a - 4.16557) <= 1e-5 &&
           std::abs(got_b - 1.16557) <= 1e-5 && monotone &&
           SeedScore(1, 0, 0, 1.4) == kInfiniteScore;
  o.detail = Fmt("score(3,1,2)=%.9f rel err %.2e, score(0,2,4)=%.9f rel err "
                 "%.2e (tol %.0e), score(5,5,k=0)=%g, strictly decreasing in "
                 "n=1..1000: %s",
                 got_a, err_a, got_b, err_b, kRelTol, got_c,
                 monotone ? "yes" : "no");
  return o;
}

// 4. Small programs: campaign coverage equals the exhaustive sweep.
Outcome SmallInstanceCoverage() {
  constexpr uint64_t kBudget = 65536;
  size_t programs = 0, exact = 0;
  std::string worst;
  for (uint32_t len : {1u, 2u}) {
    for (int fanout : {2, 3, 4}) {
      for (uint64_t seed = 0; seed < 4; ++seed) {
        GenParams p;
        p.depth = 4;
        p.fanout = fanout;
        p.max_input_len = len;
        p.magic_byte_fraction = 0.6;
        const SyntheticProgram prog =
            SyntheticProgram::Generate(500 + seed * 10 + fanout, p);
        const std::set<BranchId> swept =
            oracle::SweepBranches(prog, len, kDefaultMapSize);
        const std::set<BranchId> reachable =
            oracle::ReachableBranches(prog, kDefaultMapSize);
        CampaignConfig config;
        config.rng_seed = seed + 1;
        config.budget_execs = kBudget;
        SyntheticTarget target(prog);
        const CampaignResult r = RunCampaign(config, target, DefaultSeeds(prog));
        std::set<BranchId> covered;
        for (const CorpusEntry &e : r.corpus.entries()) {
          covered.insert(e.branches.begin(), e.branches.end());
        }
        ++programs;
        if (covered == swept && swept == reachable &&
            r.stats.final_coverage == swept.size()) {
          ++exact;
        } else if (worst.empty()) {
          worst = Fmt(" (first miss: len %u fanout %d seed %llu, %zu of %zu)",
                      len, fanout, (unsigned long long)seed, covered.size(),
                      swept.size());
        }
      }
    }
  }
  Outcome o;
  o.pass = exact == programs;
  o.detail = Fmt("%zu/%zu programs (max_input_len 1-2) reached exactly the "
                 "swept branch set within %llu execs%s",
                 exact, programs, (unsigned long long)kBudget, worst.c_str());
  return o;
}

// 5. Tree scheduling versus the AFL queue on the bench corpus.
Outcome SchedulerBenefit(const fs::path &out) {
  constexpr double kMinWinShare = 0.6;
  constexpr int kRounds = 10;
  constexpr double kMaxSeconds = 1800;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<BenchTarget> corpus = BenchCorpus();
  std::vector<BenchArm> arms(2);
  arms[0].name = "mcts";
  arms[0].config.policy = Policy::kMcts;
  arms[0].config.k = 1.4;
  arms[1].name = "fifo";
  arms[1].config.policy = Policy::kFifo;
  for (BenchArm &a : arms) a.config.budget_execs = 100000;
  const std::vector<RunRecord> records = RunBench(corpus, arms, kRounds, 4);
  const std::vector<ComparisonResult> cmp = CompareRuns(records);
  const ComparisonResult &c = cmp.front();
  WriteTextFile((out / "comparison.csv").string(), ComparisonCsv(cmp));
  fs::create_directories(out / "plots");
  for (size_t i = 0; i < 3; ++i) {
    EmitCoveragePlot(MeanCoverageSeries(records, corpus[i].name),
                     (out / "plots" / (corpus[i].name + ".svg")).string());
  }
  size_t significant = 0;
  for (const TargetComparison &t : c.targets) {
    significant += t.wins_a && t.p_value < kSignificanceLevel;
  }
  const double share =
      static_cast<double>(c.wins_a) / static_cast<double>(c.targets.size());
  const double secs = Seconds(start);
  Outcome o;
  o.pass = share >= kMinWinShare && c.median_a >= c.median_b &&
           secs < kMaxSeconds;
  o.detail = Fmt("mcts higher on %d/%zu programs (%.0f%%, need %.0f%%), fifo "
                 "higher on %d, ties %d; %zu wins with p<%.2f; overall median "
                 "%.1f vs %.1f, p=%.3g; %.0fs (limit %.0fs)",
                 c.wins_a, c.targets.size(), 100 * share, 100 * kMinWinShare,
                 c.wins_b, c.ties, significant, kSignificanceLevel, c.median_a,
                 c.median_b, c.p_value, secs, kMaxSeconds);
  return o;
}

// Least-squares slope of log(y) against log(x).
double LogLogSlope(const std::vector<double> &x, const std::vector<double> &y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct GrowthProfile {
  std::vector<double> sizes;  // corpus size at each checkpoint
  std::vector<double> mean_examined;  // per selection since the last one
  double overall_mean = 0;
  size_t bound = 0;  // max branching x height at the end
  uint64_t bound_violations = 0;
  size_t final_seeds = 0;
};

GrowthProfile GrowCorpus(Policy policy) {
  constexpr size_t kTargetSeeds = 10000;
  constexpr size_t kCheckpoint = 1000;
  GenParams p;
  p.depth = 20;
  p.fanout = 2;
  p.magic_byte_fraction = 0.3;
  p.max_input_len = 64;
  const SyntheticProgram prog = SyntheticProgram::Generate(7, p);
  CampaignConfig config;
  config.policy = policy;
  config.map_size = size_t{1} << 22;
  config.budget_execs = 50000000;
  SyntheticTarget target(prog, config.map_size);
  GrowthProfile g;
  uint64_t window_sum = 0, window_count = 0, total = 0, count = 0;
  size_t next_checkpoint = kCheckpoint;
  size_t corpus_size = 0;
  CampaignHooks hooks;
  hooks.on_select = [&](const SeedMutationTree &tree, const Selection &sel) {
    window_sum += sel.nodes_examined;
    ++window_count;
    total += sel.nodes_examined;
    ++count;
    if (policy == Policy::kMcts &&
        sel.nodes_examined > tree.MaxBranching() * tree.Height()) {
      ++g.bound_violations;
    }
  };
  hooks.should_stop = [&](const CampaignStats &, const Corpus &corpus,
                          const SeedMutationTree &tree) {
    corpus_size = corpus.size();
    if (corpus_size >= next_checkpoint && window_count > 0) {
      g.sizes.push_back(static_cast<double>(corpus_size));
      g.mean_examined.push_back(static_cast<double>(window_sum) /
                                static_cast<double>(window_count));
      window_sum = window_count = 0;
      while (next_checkpoint <= corpus_size) next_checkpoint += kCheckpoint;
    }
    g.bound = tree.MaxBranching() * tree.Height();
    return corpus_size >= kTargetSeeds;
  };
  RunCampaign(config, target, DefaultSeeds(prog), hooks);
  g.overall_mean = static_cast<double>(total) / static_cast<double>(count);
  g.final_seeds = corpus_size;
  return g;
}

// 6. Descent cost grows sublinearly; the AFL queue scan is linear.
Outcome DescentCost() {
  constexpr double kMaxMctsSlope = 0.5;
  constexpr double kMinFifoSlope = 0.8;
  constexpr double kMinFifoShare = 0.5;  // mean scan >= this share of N
  const GrowthProfile mcts = GrowCorpus(Policy::kMcts);
  const GrowthProfile fifo = GrowCorpus(Policy::kFifo);
  const double mcts_slope = LogLogSlope(mcts.sizes, mcts.mean_examined);
  const double fifo_slope = LogLogSlope(fifo.sizes, fifo.mean_examined);
  bool fifo_linear = true;
  for (size_t i = 0; i < fifo.sizes.size(); ++i) {
    fifo_linear = fifo_linear &&
                  fifo.mean_examined[i] >= kMinFifoShare * fifo.sizes[i];
  }
  Outcome o;
  o.pass = mcts.final_seeds >= 10000 && fifo.final_seeds >= 10000 &&
           mcts.bound_violations == 0 &&
           mcts.overall_mean <= static_cast<double>(mcts.bound) &&
           mcts_slope < kMaxMctsSlope && fifo_slope >= kMinFifoSlope &&
           fifo_linear;
  std::ostringstream series;
  for (size_t i = 0; i < mcts.sizes.size(); i += 3) {
    series << Fmt(" N=%.0f:%.0f", mcts.sizes[i], mcts.mean_examined[i]);
  }
  o.detail = Fmt("N=%zu seeds; mcts mean nodes examined %.1f <= bound %zu, "
                 "log-log slope %.2f (< %.1f), per-step bound violations %llu;"
                 " fifo mean %.0f, slope %.2f (>= %.1f), >= %.1f N at every "
                 "checkpoint: %s; mcts windows:%s",
                 mcts.final_seeds, mcts.overall_mean, mcts.bound, mcts_slope,
                 kMaxMctsSlope, (unsigned long long)mcts.bound_violations,
                 fifo.overall_mean, fifo_slope, kMinFifoSlope, kMinFifoShare,
                 fifo_linear ? "yes" : "no", series.str().c_str());
  return o;
}

// 7. Mann-Whitney identities and exact p-values.
Outcome MannWhitneyExactness() {
  Rng rng(2024);
  int sum_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(1 + rng.Below(25)), b(1 + rng.Below(25));
    for (double &x : a) x = static_cast<double>(rng.Below(30));
    for (double &x : b) x = static_cast<double>(rng.Below(30));
    const MannWhitneyResult r = MannWhitneyU(a, b);
    if (r.u_a + r.u_b != static_cast<double>(a.size() * b.size()) ||
        r.p_value < 0 || r.p_value > 1) {
      ++sum_failures;
    }
  }
  const MannWhitneyResult three =
      MannWhitneyU(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
  const MannWhitneyResult five = MannWhitneyU(
      std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{6, 7, 8, 9, 10});
  Outcome o;
  o.pass = sum_failures == 0 && three.p_value == 0.1 && three.u_a == 0 &&
           std::abs(five.p_value - 2.0 / 252.0) <= 1e-5;
  o.detail = Fmt("U_a+U_b=n*m failures %d/1000; p([1,2,3],[4,5,6])=%.17g; "
                 "p(5 vs 5 disjoint)=%.6f vs 2/252=%.6f (tol 1e-5)",
                 sum_failures, three.p_value, five.p_value, 2.0 / 252.0);
  return o;
}

// 8. k sweep, including pure exploitation.
Outcome KSweep(const fs::path &out) {
  constexpr double kMinGrowingShare = 0.9;
  constexpr uint64_t kBudget = 100000;
  const std::vector<BenchTarget> corpus = BenchCorpus();
  std::vector<BenchArm> arms;
  for (double k : {0.0, 0.014, 0.14, 1.4, 14.0}) {
    BenchArm arm;
    arm.name = Fmt("k=%g", k);
    arm.config.policy = Policy::kMcts;
    arm.config.k = k;
    arm.config.budget_execs = kBudget;
    arms.push_back(arm);
  }
  const std::vector<RunRecord> records = RunBench(corpus, arms, 1, 4);
  const std::vector<SweepRow> rows = SweepTable(records);
  WriteTextFile((out / "sweep_k.csv").string(), SweepCsv(rows));
  // "Still growing": coverage gained in the second half of the budget.
  size_t growing = 0, programs = 0;
  for (const RunRecord &r : records) {
    if (r.k != 0.0) continue;
    ++programs;
    uint64_t at_half = 0;
    for (auto [execs, cov] : r.coverage_series) {
      if (execs <= kBudget / 2) at_half = cov;
    }
    growing += r.final_coverage > at_half;
  }
  std::ostringstream table;
  for (const SweepRow &row : rows) {
    table << Fmt(" k=%g:%.1f", row.k, row.mean_coverage);
  }
  const double share =
      static_cast<double>(growing) / static_cast<double>(programs);
  Outcome o;
  o.pass = rows.size() == 5 && share >= kMinGrowingShare;
  o.detail = Fmt("%zu rows;%s; k=0 still gaining coverage after half the "
                 "budget on %zu/%zu programs (need %.0f%%)",
                 rows.size(), table.str().c_str(), growing, programs,
                 100 * kMinGrowingShare);
  return o;
}

std::string ReadBytes(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Byte-identical artifacts across runs; bench independent of jobs.
Outcome Determinism(const fs::path &out) {
  const std::vector<BenchTarget> corpus = BenchCorpus(6);
  size_t identical = 0, runs = 0;
  for (size_t i = 0; i < 3; ++i) {
    std::string stats[2], tree[2];
    for (int rep = 0; rep < 2; ++rep) {
      CampaignConfig config;
      config.rng_seed = 42 + i;
      config.budget_execs = 50000;
      config.policy = i == 2 ? Policy::kFifo : Policy::kMcts;
      SyntheticTarget target(corpus[i].program);
      const CampaignResult r =
          RunCampaign(config, target, DefaultSeeds(corpus[i].program));
      const fs::path dir = out / Fmt("determinism_%zu_%d", i, rep);
      fs::create_directories(dir);
      WriteStatsCsv(r.stats, (dir / "stats.csv").string());
      WriteTextFile((dir / "tree.json").string(), r.tree.Dump());
      stats[rep] = ReadBytes(dir / "stats.csv");
      tree[rep] = ReadBytes(dir / "tree.json");
    }
    ++runs;
    identical += stats[0] == stats[1] && tree[0] == tree[1] &&
                 !stats[0].empty() && !tree[0].empty();
  }
  std::vector<BenchArm> arms(2);
  arms[0].name = "mcts";
  arms[1].name = "fifo";
  arms[1].config.policy = Policy::kFifo;
  for (BenchArm &a : arms) a.config.budget_execs = 20000;
  const std::string serial = ComparisonCsv(CompareRuns(RunBench(corpus, arms, 2, 1)));
  const std::string parallel =
      ComparisonCsv(CompareRuns(RunBench(corpus, arms, 2, 4)));
  Outcome o;
  o.pass = identical == runs && serial == parallel;
  o.detail = Fmt("%zu/%zu campaigns with byte-identical stats.csv and "
                 "tree.json; bench comparison --jobs 1 vs 4 identical: %s",
                 identical, runs, serial == parallel ? "yes" : "no");
  return o;
}

}  // namespace

int main(int argc, char **argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(out);
  struct Criterion {
    int number;
    const char *name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "argmax oracle equivalence", ArgmaxOracle},
      {2, "tree invariants after long campaigns", TreeInvariants},
      {3, "score numerics", ScoreNumerics},
      {4, "small-instance coverage oracle", SmallInstanceCoverage},
      {5, "scheduler benefit over fifo", [&] { return SchedulerBenefit(out); }},
      {6, "descent cost", DescentCost},
      {7, "mann-whitney exactness", MannWhitneyExactness},
      {8, "k sweep", [&] { return KSweep(out); }},
      {9, "determinism", [&] { return Determinism(out); }},
  };
  int failures = 0;
  for (const Criterion &c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL",
                c.number, c.name, o.detail.c_str(), Seconds(start));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
