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

#include "treefuzz/scheduler.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace treefuzz {

std::string_view PolicyName(Policy policy) {
  switch (policy) {
    case Policy::kMcts:
      return "mcts";
    case Policy::kFifo:
      return "fifo";
    case Policy::kRareBranch:
      return "rare-branch";
    case Policy::kUnfuzzedFirst:
      return "unfuzzed-first";
    case Policy::kLowFrequency:
      return "low-frequency";
  }
  return "unknown";
}

std::optional<Policy> PolicyFromName(std::string_view name) {
  for (Policy p : {Policy::kMcts, Policy::kFifo, Policy::kRareBranch,
                   Policy::kUnfuzzedFirst, Policy::kLowFrequency}) {
    if (PolicyName(p) == name) return p;
  }
  return std::nullopt;
}

double SeedScore(uint64_t q, uint64_t n, uint64_t parent_n, double k) {
  if (n == 0) return kInfiniteScore;
  const double nd = static_cast<double>(n);
  return static_cast<double>(q) / nd +
         k * std::sqrt(std::log(static_cast<double>(parent_n)) / nd);
}

std::vector<uint64_t> UniqueBranchCounts(
    std::span<const BranchSet *const> sets) {
  // Dense per-branch membership counts, reused across calls.
  thread_local std::vector<uint32_t> counts;
  BranchId max_id = 0;
  for (const BranchSet *s : sets) {
    if (!s->empty()) max_id = std::max(max_id, s->ids().back());
  }
  if (counts.size() <= max_id) counts.resize(static_cast<size_t>(max_id) + 1);
  for (const BranchSet *s : sets) {
    for (BranchId id : *s) ++counts[id];
  }
  std::vector<uint64_t> q(sets.size(), 0);
  for (size_t i = 0; i < sets.size(); ++i) {
    for (BranchId id : *sets[i]) q[i] += counts[id] == 1;
  }
  for (const BranchSet *s : sets) {
    for (BranchId id : *s) counts[id] = 0;
  }
  return q;
}

Selection SelectSeedMcts(const SeedMutationTree &tree, double k,
                         std::vector<DescentStep> *trace) {
  if (tree.size() == 0 || tree.node(tree.root()).IsLeaf()) {
    throw std::invalid_argument("cannot select from a tree without seeds");
  }
  Selection sel;
  SeedId at = tree.root();
  sel.path.push_back(at);
  std::vector<const BranchSet *> sets;
  while (!tree.node(at).IsLeaf()) {
    const SeedNode &anchor = tree.node(at);
    const auto &children = anchor.children;
    sel.nodes_examined += children.size();

    DescentStep step;
    if (trace) {
      step.anchor = at;
      step.children = children;
      step.scores.resize(children.size());
    }
    std::optional<SeedId> unvisited;
    for (SeedId c : children) {
      if (tree.node(c).n_scheduled == 0 && (!unvisited || c < *unvisited)) {
        unvisited = c;
      }
    }
    SeedId best = children.front();
    if (unvisited && !trace) {
      best = *unvisited;
    } else {
      sets.clear();
      for (SeedId c : children) {
        // For leaves and variants the subtree union is the own set.
        sets.push_back(&tree.node(c).subtree_branches);
      }
      const std::vector<uint64_t> q = UniqueBranchCounts(sets);
      double best_score = -kInfiniteScore;
      for (size_t i = 0; i < children.size(); ++i) {
        const SeedNode &child = tree.node(children[i]);
        const double score =
            SeedScore(q[i], child.n_scheduled, anchor.n_scheduled, k);
        if (trace) {
          step.scores[i] = {q[i], child.n_scheduled, anchor.n_scheduled, score};
        }
        if (score > best_score ||
            (score == best_score && children[i] < best)) {
          best_score = score;
          best = children[i];
        }
      }
    }
    if (trace) {
      step.chosen = best;
      trace->push_back(std::move(step));
    }
    at = best;
    sel.path.push_back(at);
  }
  const SeedNode &terminal = tree.node(at);
  sel.seed_node =
      terminal.kind == NodeKind::kVariant ? *terminal.parent : terminal.id;
  sel.input = *tree.node(sel.seed_node).input_ref;
  return sel;
}

void Backpropagate(SeedMutationTree &tree, std::span<const SeedId> path,
                   const BranchSet &new_branches) {
  auto violation = [](const std::string &what) {
    throw std::logic_error("back-propagation path inconsistent: " + what);
  };
  if (path.empty() || path.front() != tree.root()) {
    violation("path must start at the root");
  }
  for (size_t i = 0; i < path.size(); ++i) {
    if (!tree.Contains(path[i])) violation("unknown node");
    if (i > 0 && tree.node(path[i]).parent != path[i - 1]) {
      violation("node " + std::to_string(path[i]) + " is not a child of " +
                std::to_string(path[i - 1]));
    }
  }
  const SeedNode &terminal = tree.node(path.back());
  if (terminal.kind == NodeKind::kRoot) violation("path ends at the root");
  const SeedId seed_node =
      terminal.kind == NodeKind::kVariant ? *terminal.parent : terminal.id;
  if (!new_branches.IsSubsetOf(tree.node(seed_node).subtree_branches)) {
    violation("new branches did not enter through the scheduled seed");
  }
  for (SeedId id : path) tree.IncrementScheduled(id);
  // The seed was a leaf when selected; if it gained offspring meanwhile its
  // "as itself" count now lives on the variant.
  if (terminal.kind == NodeKind::kSeed && !terminal.IsLeaf()) {
    auto variant = tree.VariantOf(terminal.id);
    if (!variant) violation("internal terminal seed without variant");
    tree.IncrementScheduled(*variant);
  }
  tree.MergeSubtreeBranches(seed_node, new_branches);
}

std::vector<SeedId> PathToSeed(const SeedMutationTree &tree,
                               SeedId seed_node) {
  std::vector<SeedId> path;
  if (auto variant = tree.VariantOf(seed_node)) path.push_back(*variant);
  std::optional<SeedId> at = seed_node;
  while (at) {
    path.push_back(*at);
    at = tree.node(*at).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// ---------------------------------------------------------------------------

Scheduler::Scheduler(Policy policy, double k, Rng rng)
    : policy_(policy), k_(k), rng_(std::move(rng)) {
  if (!(k >= 0.0)) throw std::invalid_argument("k must be >= 0");
}

void Scheduler::OnSeedAdded(const Corpus &corpus, const CorpusEntry &entry) {
  const size_t index = corpus.IndexOf(entry.input.id);
  if (favored_.size() <= index) favored_.resize(index + 1, false);
  const uint64_t cost = static_cast<uint64_t>(entry.size()) *
                        static_cast<uint64_t>(std::max<int64_t>(entry.exec_us, 1));
  for (BranchId b : entry.branches) {
    if (top_rated_.size() <= b) top_rated_.resize(static_cast<size_t>(b) + 1);
    auto &top = top_rated_[b];
    if (!top) {
      rated_branches_.insert(
          std::lower_bound(rated_branches_.begin(), rated_branches_.end(), b),
          b);
    }
    if (!top || cost < top->cost) {
      top = TopRated{index, cost};
      dirty_ = true;
    }
  }
}

void Scheduler::Cull(const Corpus &corpus) {
  std::fill(favored_.begin(), favored_.end(), false);
  favored_.resize(corpus.size(), false);
  nodes_examined_last_ += corpus.size();
  pending_favored_ = 0;
  std::vector<bool> covered(top_rated_.size(), false);
  for (BranchId b : rated_branches_) {
    if (covered[b]) continue;
    const size_t index = top_rated_[b]->index;
    if (!favored_[index]) {
      favored_[index] = true;
      if (corpus.entries()[index].n_scheduled == 0) ++pending_favored_;
    }
    for (BranchId other : corpus.entries()[index].branches) {
      covered[other] = true;
    }
  }
  dirty_ = false;
}

size_t Scheduler::SelectFifo(const Corpus &corpus) {
  if (dirty_) Cull(corpus);
  const size_t n = corpus.size();
  while (true) {
    if (!started_) {
      started_ = true;
      cursor_ = 0;
      cycle_ = 1;
    } else if (++cursor_ >= n) {
      cursor_ = 0;
      ++cycle_;
    }
    ++nodes_examined_last_;
    const CorpusEntry &e = corpus.entries()[cursor_];
    const bool favored = favored_[cursor_];
    const bool fuzzed = e.n_scheduled > 0;
    // AFL's skip probabilities for non-favored and already fuzzed entries.
    bool skip = false;
    if (pending_favored_ > 0) {
      skip = (fuzzed || !favored) && rng_.Below(100) < 99;
    } else if (!favored && n > 10) {
      skip = rng_.Below(100) < (cycle_ > 1 && !fuzzed ? 75u : 95u);
    }
    if (skip) continue;
    if (favored && !fuzzed && pending_favored_ > 0) --pending_favored_;
    return cursor_;
  }
}

size_t Scheduler::SelectLowFrequency(const Corpus &corpus) {
  size_t best = 0;
  auto key = [&](size_t i) {
    const CorpusEntry &e = corpus.entries()[i];
    return std::tuple(e.n_scheduled, corpus.PathFrequency(e.path_hash), i);
  };
  for (size_t i = 1; i < corpus.size(); ++i) {
    if (key(i) < key(best)) best = i;
  }
  nodes_examined_last_ += corpus.size();
  return best;
}

size_t Scheduler::SelectRareBranch(const Corpus &corpus) {
  uint64_t rarest = std::numeric_limits<uint64_t>::max();
  for (const CorpusEntry &e : corpus.entries()) {
    for (BranchId b : e.branches) rarest = std::min(rarest, corpus.BranchHits(b));
  }
  // Branches hit at most this often count as rare.
  const uint64_t cutoff = rarest == 0 ? 0 : std::bit_ceil(rarest);
  size_t best = 0;
  uint64_t best_rare = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const CorpusEntry &e = corpus.entries()[i];
    uint64_t rare = 0;
    for (BranchId b : e.branches) rare += corpus.BranchHits(b) <= cutoff;
    const CorpusEntry &incumbent = corpus.entries()[best];
    if (i == 0 || rare > best_rare ||
        (rare == best_rare && e.n_scheduled < incumbent.n_scheduled)) {
      best = i;
      best_rare = rare;
    }
  }
  nodes_examined_last_ += corpus.size();
  return best;
}

size_t Scheduler::SelectUnfuzzedFirst(const Corpus &corpus) {
  for (size_t i = 0; i < corpus.size(); ++i) {
    ++nodes_examined_last_;
    if (corpus.entries()[i].n_scheduled == 0) return i;
  }
  return SelectFifo(corpus);
}

Selection Scheduler::Select(const SeedMutationTree &tree,
                            const Corpus &corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  nodes_examined_last_ = 0;
  if (policy_ == Policy::kMcts) {
    Selection sel = SelectSeedMcts(tree, k_);
    nodes_examined_last_ = sel.nodes_examined;
    return sel;
  }
  size_t index = 0;
  switch (policy_) {
    case Policy::kFifo:
      index = SelectFifo(corpus);
      break;
    case Policy::kLowFrequency:
      index = SelectLowFrequency(corpus);
      break;
    case Policy::kRareBranch:
      index = SelectRareBranch(corpus);
      break;
    case Policy::kUnfuzzedFirst:
      index = SelectUnfuzzedFirst(corpus);
      break;
    case Policy::kMcts:
      break;
  }
  Selection sel;
  sel.input = corpus.entries()[index].input.id;
  auto node = tree.NodeForInput(sel.input);
  if (!node) throw std::logic_error("corpus entry without tree node");
  sel.seed_node = *node;
  sel.path = PathToSeed(tree, *node);
  sel.nodes_examined = nodes_examined_last_;
  return sel;
}

void Scheduler::Complete(SeedMutationTree &tree, const Selection &selection,
                         const BranchSet &new_branches) {
  Backpropagate(tree, selection.path, new_branches);
}

}  // namespace treefuzz
