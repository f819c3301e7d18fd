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

// Seed selection.
//
// The tree policy (kMcts) walks the seed mutation tree from the root. At each
// anchor it scores every child with
//
//   score = q / n + k * sqrt(ln(N) / n)
//
// where q is the number of branches the child covers that no sibling covers
// (internal children contribute their whole subtree, variants and leaves
// their own set), n the child's schedule count and N the anchor's. Children
// with n == 0 score +inf. The anchor moves to the best child (ties to the
// smallest id) until it reaches a leaf; a variant leaf schedules its seed.
// After fuzzing, every node on the path gets n += 1.
//
// The baselines model single-queue schedulers:
//   kFifo          AFL: cycle the queue, skipping non-favored entries;
//                  favored = smallest size * exec time per branch.
//   kLowFrequency  AFLFast: fewest schedules, then least-exercised path.
//   kRareBranch    FairFuzz: most branches at the rarest hit-count level.
//   kUnfuzzedFirst EcoFuzz: first never-scheduled seed, else kFifo.

#ifndef TREEFUZZ_SCHEDULER_H_
#define TREEFUZZ_SCHEDULER_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "treefuzz/corpus.h"
#include "treefuzz/rng.h"
#include "treefuzz/seed_tree.h"

namespace treefuzz {

enum class Policy { kMcts, kFifo, kRareBranch, kUnfuzzedFirst, kLowFrequency };

std::string_view PolicyName(Policy policy);
// Accepts the names PolicyName produces ("mcts", "fifo", ...).
std::optional<Policy> PolicyFromName(std::string_view name);

inline constexpr double kDefaultK = 1.4;
inline constexpr double kInfiniteScore = std::numeric_limits<double>::infinity();

struct ScoreBreakdown {
  uint64_t q = 0;
  uint64_t n = 0;
  uint64_t parent_n = 0;
  double score = 0;
};

// q / n + k * sqrt(ln(parent_n) / n); +inf when n == 0.
double SeedScore(uint64_t q, uint64_t n, uint64_t parent_n, double k);

// q_c = |set_c minus the union of every other set|, in input order.
std::vector<uint64_t> UniqueBranchCounts(
    std::span<const BranchSet *const> sets);

struct Selection {
  InputId input = 0;
  // The Seed node whose input is scheduled.
  SeedId seed_node = 0;
  // Root first; ends at the node where the descent terminated.
  std::vector<SeedId> path;
  size_t nodes_examined = 0;
};

// One UCT descent. Throws std::invalid_argument if the tree has no seeds.
// When `trace` is given it receives the scored children of every step.
struct DescentStep {
  SeedId anchor = 0;
  std::vector<SeedId> children;
  std::vector<ScoreBreakdown> scores;
  SeedId chosen = 0;
};
Selection SelectSeedMcts(const SeedMutationTree &tree, double k,
                         std::vector<DescentStep> *trace = nullptr);

// Adds one schedule to every node on `path`. If the terminal node is a seed
// that gained its variant while being fuzzed, the variant is counted too.
// `new_branches` must already be inside the scheduled seed's subtree (they
// arrive through AddSeed); they are folded into the ancestors' unions. A path
// that does not match the tree throws std::logic_error.
void Backpropagate(SeedMutationTree &tree, std::span<const SeedId> path,
                   const BranchSet &new_branches);

// Path from the root to the node that represents `seed_node` as itself
// (its variant when internal). Used to charge baseline schedules to the tree.
std::vector<SeedId> PathToSeed(const SeedMutationTree &tree, SeedId seed_node);

class Scheduler {
 public:
  Scheduler(Policy policy, double k, Rng rng);

  Policy policy() const { return policy_; }
  double k() const { return k_; }
  size_t nodes_examined_last() const { return nodes_examined_last_; }

  // Must be called for every corpus addition, in order.
  void OnSeedAdded(const Corpus &corpus, const CorpusEntry &entry);

  // Throws std::invalid_argument on an empty corpus or tree.
  Selection Select(const SeedMutationTree &tree, const Corpus &corpus);

  // Records the finished schedule in the tree.
  void Complete(SeedMutationTree &tree, const Selection &selection,
                const BranchSet &new_branches);

  // Fifo internals, exposed for tests.
  bool IsFavored(size_t corpus_index) const {
    return corpus_index < favored_.size() && favored_[corpus_index];
  }
  void Cull(const Corpus &corpus);

 private:
  size_t SelectFifo(const Corpus &corpus);
  size_t SelectLowFrequency(const Corpus &corpus);
  size_t SelectRareBranch(const Corpus &corpus);
  size_t SelectUnfuzzedFirst(const Corpus &corpus);

  Policy policy_;
  double k_;
  Rng rng_;
  size_t nodes_examined_last_ = 0;

  // Fifo state.
  struct TopRated {
    size_t index;
    uint64_t cost;
  };
  std::vector<std::optional<TopRated>> top_rated_;
  std::vector<BranchId> rated_branches_;
  std::vector<bool> favored_;
  bool dirty_ = false;
  size_t cursor_ = 0;
  uint64_t cycle_ = 0;
  size_t pending_favored_ = 0;
  bool started_ = false;
};

}  // namespace treefuzz

#endif  // TREEFUZZ_SCHEDULER_H_
