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

// The seed mutation tree: every retained input is a node whose parent is the
// seed it was mutated from. An auxiliary root parents the initial seeds.
//
// Internal seed nodes play two roles, "this seed" and "this seed's subtree".
// To keep them apart every internal seed owns exactly one Variant leaf that
// stands for the seed itself. Variants are created lazily, the first time a
// seed gains a child, and inherit the seed's schedule count at that moment
// so that an internal node's count is always the sum of its children's.

#ifndef TREEFUZZ_SEED_TREE_H_
#define TREEFUZZ_SEED_TREE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "treefuzz/coverage.h"
#include "treefuzz/target.h"

namespace treefuzz {

using SeedId = uint32_t;

enum class NodeKind { kRoot, kSeed, kVariant };
std::string_view NodeKindName(NodeKind kind);

// Label of the edge into a node: the mutation that produced it and the
// schedule number during which it was created. Initial seeds carry
// "initial"; variants carry "variant".
struct EdgeLabel {
  std::string mutation_kind;
  uint64_t creating_iteration = 0;
  friend bool operator==(const EdgeLabel &, const EdgeLabel &) = default;
};

struct SeedNode {
  SeedId id = 0;
  NodeKind kind = NodeKind::kSeed;
  std::optional<SeedId> parent;
  std::vector<SeedId> children;
  std::optional<InputId> input_ref;
  BranchSet own_branches;
  BranchSet subtree_branches;
  uint64_t n_scheduled = 0;
  std::optional<EdgeLabel> edge_label;

  bool IsLeaf() const { return children.empty(); }
  friend bool operator==(const SeedNode &, const SeedNode &) = default;
};

struct InitialSeed {
  InputId input = 0;
  BranchSet branches;
};

class TreeParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SeedMutationTree {
 public:
  // Root gets id 0 and the seeds ids 1..n in order. Throws
  // std::invalid_argument on an empty list.
  static SeedMutationTree Init(std::span<const InitialSeed> seeds);

  // Appends a Seed child under `parent` (Root or Seed). When `parent` is a
  // Seed leaf its Variant is inserted first. Branches are folded into the
  // subtree sets of every ancestor. Throws std::invalid_argument for unknown
  // or Variant parents and for an input that already has a node.
  SeedId AddSeed(SeedId parent, InputId input, BranchSet branches,
                 EdgeLabel label);

  SeedId root() const { return 0; }
  size_t size() const { return nodes_.size(); }
  bool Contains(SeedId id) const { return id < nodes_.size(); }
  // Throws std::out_of_range for unknown ids.
  const SeedNode &node(SeedId id) const;
  const std::vector<SeedNode> &nodes() const { return nodes_; }

  const BranchSet &SubtreeUnion(SeedId id) const {
    return node(id).subtree_branches;
  }
  // The Variant child of a Seed node, if it has one.
  std::optional<SeedId> VariantOf(SeedId id) const;
  // The Seed node holding `input`.
  std::optional<SeedId> NodeForInput(InputId input) const;
  size_t SeedCount() const { return by_input_.size(); }
  // Depth of the deepest node; the root is at depth 0.
  size_t Height() const;
  size_t MaxBranching() const;

  // Schedule bookkeeping used by the scheduler's back-propagation.
  void IncrementScheduled(SeedId id);
  // Folds `branches` into the subtree sets of `id` and its ancestors.
  // Variants are skipped since their subtree is their own set.
  void MergeSubtreeBranches(SeedId id, const BranchSet &branches);

  // Full structural check; returns one message per violation.
  std::vector<std::string> CheckInvariants() const;

  // JSON document with nodes sorted by id; identical trees dump to
  // identical bytes.
  nlohmann::json ToJson() const;
  std::string Dump() const;
  // Throws TreeParseError naming the offending location.
  static SeedMutationTree FromJson(const nlohmann::json &doc);
  static SeedMutationTree Load(std::string_view text);

  // Indented outline, one node per line:
  //   <label> kind=<kind> n=<n> own=<|own|> subtree=<|subtree|>
  // Seeds are labelled t<input>, variants t<input>'.
  std::string Outline() const;

  friend bool operator==(const SeedMutationTree &a,
                         const SeedMutationTree &b) {
    return a.nodes_ == b.nodes_;
  }

 private:
  SeedId NewNode(SeedNode node);

  std::vector<SeedNode> nodes_;
  std::unordered_map<InputId, SeedId> by_input_;
};

}  // namespace treefuzz

#endif  // TREEFUZZ_SEED_TREE_H_
