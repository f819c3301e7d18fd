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

#include "treefuzz/seed_tree.h"

#include <algorithm>
#include <functional>
#include <sstream>

namespace treefuzz {

std::string_view NodeKindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kRoot:
      return "root";
    case NodeKind::kSeed:
      return "seed";
    case NodeKind::kVariant:
      return "variant";
  }
  return "unknown";
}

namespace {

std::optional<NodeKind> NodeKindFromName(std::string_view name) {
  for (NodeKind k : {NodeKind::kRoot, NodeKind::kSeed, NodeKind::kVariant}) {
    if (NodeKindName(k) == name) return k;
  }
  return std::nullopt;
}

}  // namespace

SeedId SeedMutationTree::NewNode(SeedNode node) {
  node.id = static_cast<SeedId>(nodes_.size());
  if (node.kind == NodeKind::kSeed) by_input_[*node.input_ref] = node.id;
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

SeedMutationTree SeedMutationTree::Init(std::span<const InitialSeed> seeds) {
  if (seeds.empty()) {
    throw std::invalid_argument("seed tree needs at least one initial seed");
  }
  SeedMutationTree tree;
  SeedNode root;
  root.kind = NodeKind::kRoot;
  tree.NewNode(std::move(root));
  for (const InitialSeed &seed : seeds) {
    tree.AddSeed(0, seed.input, seed.branches, EdgeLabel{"initial", 0});
  }
  return tree;
}

const SeedNode &SeedMutationTree::node(SeedId id) const {
  if (id >= nodes_.size()) {
    throw std::out_of_range("unknown seed node " + std::to_string(id));
  }
  return nodes_[id];
}

std::optional<SeedId> SeedMutationTree::VariantOf(SeedId id) const {
  const SeedNode &n = node(id);
  if (n.kind != NodeKind::kSeed || n.children.empty()) return std::nullopt;
  // The variant is always inserted ahead of the first real child.
  const SeedId first = n.children.front();
  if (nodes_[first].kind == NodeKind::kVariant) return first;
  return std::nullopt;
}

std::optional<SeedId> SeedMutationTree::NodeForInput(InputId input) const {
  auto it = by_input_.find(input);
  if (it == by_input_.end()) return std::nullopt;
  return it->second;
}

SeedId SeedMutationTree::AddSeed(SeedId parent, InputId input,
                                 BranchSet branches, EdgeLabel label) {
  if (parent >= nodes_.size()) {
    throw std::invalid_argument("unknown parent node " +
                                std::to_string(parent));
  }
  if (nodes_[parent].kind == NodeKind::kVariant) {
    throw std::invalid_argument("variant node " + std::to_string(parent) +
                                " cannot have children");
  }
  if (by_input_.contains(input)) {
    throw std::invalid_argument("input " + std::to_string(input) +
                                " already has a tree node");
  }
  if (nodes_[parent].kind == NodeKind::kSeed && nodes_[parent].IsLeaf()) {
    const SeedNode &p = nodes_[parent];
    SeedNode variant;
    variant.kind = NodeKind::kVariant;
    variant.parent = parent;
    variant.input_ref = p.input_ref;
    variant.own_branches = p.own_branches;
    variant.subtree_branches = p.own_branches;
    variant.n_scheduled = p.n_scheduled;
    variant.edge_label = EdgeLabel{"variant", label.creating_iteration};
    const SeedId vid = NewNode(std::move(variant));
    nodes_[parent].children.push_back(vid);
  }
  SeedNode child;
  child.kind = NodeKind::kSeed;
  child.parent = parent;
  child.input_ref = input;
  child.subtree_branches = branches;
  child.own_branches = std::move(branches);
  child.edge_label = std::move(label);
  const SeedId id = NewNode(std::move(child));
  nodes_[parent].children.push_back(id);
  MergeSubtreeBranches(parent, nodes_[id].own_branches);
  return id;
}

void SeedMutationTree::IncrementScheduled(SeedId id) {
  if (id >= nodes_.size()) {
    throw std::out_of_range("unknown seed node " + std::to_string(id));
  }
  ++nodes_[id].n_scheduled;
}

void SeedMutationTree::MergeSubtreeBranches(SeedId id,
                                            const BranchSet &branches) {
  std::optional<SeedId> at = id;
  if (nodes_[id].kind == NodeKind::kVariant) at = nodes_[id].parent;
  while (at) {
    // Ancestors contain this subtree, so nothing new here means nothing new
    // further up.
    if (!nodes_[*at].subtree_branches.MergeFrom(branches)) break;
    at = nodes_[*at].parent;
  }
}

size_t SeedMutationTree::Height() const {
  size_t height = 0;
  std::vector<size_t> depth(nodes_.size(), 0);
  // Parents always have smaller ids than their children.
  for (const SeedNode &n : nodes_) {
    if (n.parent) depth[n.id] = depth[*n.parent] + 1;
    height = std::max(height, depth[n.id]);
  }
  return height;
}

size_t SeedMutationTree::MaxBranching() const {
  size_t widest = 0;
  for (const SeedNode &n : nodes_) widest = std::max(widest, n.children.size());
  return widest;
}

std::vector<std::string> SeedMutationTree::CheckInvariants() const {
  std::vector<std::string> errors;
  auto fail = [&](SeedId id, const std::string &what) {
    errors.push_back("node " + std::to_string(id) + ": " + what);
  };
  if (nodes_.empty()) {
    errors.push_back("tree has no root");
    return errors;
  }
  const SeedNode &root = nodes_[0];
  if (root.kind != NodeKind::kRoot) fail(0, "node 0 is not the root");
  if (root.parent) fail(0, "root has a parent");
  if (root.input_ref) fail(0, "root has an input");
  if (!root.own_branches.empty()) fail(0, "root has own branches");

  size_t seeds = 0;
  for (const SeedNode &n : nodes_) {
    if (n.id != static_cast<SeedId>(&n - nodes_.data())) {
      fail(n.id, "id does not match position");
    }
    if (n.kind == NodeKind::kRoot && n.id != 0) fail(n.id, "second root");
    if (n.kind != NodeKind::kRoot) {
      if (!n.parent || *n.parent >= nodes_.size()) {
        fail(n.id, "missing parent");
        continue;
      }
      if (*n.parent >= n.id) fail(n.id, "parent id not smaller than child id");
      const auto &siblings = nodes_[*n.parent].children;
      if (std::count(siblings.begin(), siblings.end(), n.id) != 1) {
        fail(n.id, "not listed exactly once among its parent's children");
      }
      if (!n.edge_label) fail(n.id, "edge label missing");
      if (!n.input_ref) fail(n.id, "input reference missing");
    }
    for (SeedId c : n.children) {
      if (c >= nodes_.size() || nodes_[c].parent != n.id) {
        fail(n.id, "child " + std::to_string(c) + " does not point back");
      }
    }
    size_t variants = 0, real_children = 0;
    BranchSet recomputed = n.own_branches;
    uint64_t child_n = 0;
    for (SeedId c : n.children) {
      if (c >= nodes_.size()) continue;
      (nodes_[c].kind == NodeKind::kVariant ? variants : real_children)++;
      recomputed = recomputed.Union(nodes_[c].subtree_branches);
      child_n += nodes_[c].n_scheduled;
    }
    if (recomputed != n.subtree_branches) {
      fail(n.id, "cached subtree union differs from recomputation");
    }
    switch (n.kind) {
      case NodeKind::kRoot:
        if (variants) fail(n.id, "root has a variant");
        if (child_n != n.n_scheduled) fail(n.id, "n != sum of children's n");
        break;
      case NodeKind::kVariant: {
        if (!n.IsLeaf()) fail(n.id, "variant is not a leaf");
        if (!n.parent) break;
        const SeedNode &p = nodes_[*n.parent];
        if (p.kind != NodeKind::kSeed) fail(n.id, "variant of a non-seed");
        if (p.input_ref != n.input_ref || p.own_branches != n.own_branches) {
          fail(n.id, "variant differs from its seed");
        }
        break;
      }
      case NodeKind::kSeed:
        ++seeds;
        if (real_children > 0 && variants != 1) {
          fail(n.id, "internal seed needs exactly one variant, has " +
                         std::to_string(variants));
        }
        if (real_children == 0 && variants != 0) {
          fail(n.id, "leaf seed has a variant");
        }
        if (!n.IsLeaf() && child_n != n.n_scheduled) {
          fail(n.id, "n != sum of children's n");
        }
        if (n.input_ref) {
          auto it = by_input_.find(*n.input_ref);
          if (it == by_input_.end() || it->second != n.id) {
            fail(n.id, "input index out of sync");
          }
        }
        break;
    }
  }
  if (seeds != by_input_.size()) errors.push_back("input index size mismatch");
  return errors;
}

nlohmann::json SeedMutationTree::ToJson() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const SeedNode &n : nodes_) {
    auto ids = [](const BranchSet &s) {
      return nlohmann::json(std::vector<BranchId>(s.begin(), s.end()));
    };
    nlohmann::json j;
    j["id"] = n.id;
    j["kind"] = NodeKindName(n.kind);
    j["parent"] = n.parent ? nlohmann::json(*n.parent) : nullptr;
    j["children"] = n.children;
    j["input_ref"] = n.input_ref ? nlohmann::json(*n.input_ref) : nullptr;
    j["own_branches"] = ids(n.own_branches);
    j["subtree_branches"] = ids(n.subtree_branches);
    j["n_scheduled"] = n.n_scheduled;
    if (n.edge_label) {
      j["edge_label"] = {{"mutation_kind", n.edge_label->mutation_kind},
                         {"creating_iteration",
                          n.edge_label->creating_iteration}};
    } else {
      j["edge_label"] = nullptr;
    }
    nodes.push_back(std::move(j));
  }
  return {{"root", 0}, {"nodes", std::move(nodes)}};
}

std::string SeedMutationTree::Dump() const { return ToJson().dump(1) + "\n"; }

SeedMutationTree SeedMutationTree::FromJson(const nlohmann::json &doc) {
  SeedMutationTree tree;
  size_t index = 0;
  std::string field;
  try {
    field = "root";
    if (doc.at("root").get<SeedId>() != 0) {
      throw TreeParseError("root: expected 0");
    }
    field = "nodes";
    for (const auto &j : doc.at("nodes")) {
      SeedNode n;
      field = "id";
      n.id = j.at("id").get<SeedId>();
      if (n.id != index) throw TreeParseError("id out of order");
      field = "kind";
      auto kind = NodeKindFromName(j.at("kind").get<std::string>());
      if (!kind) throw TreeParseError("unknown kind");
      n.kind = *kind;
      field = "parent";
      if (!j.at("parent").is_null()) n.parent = j.at("parent").get<SeedId>();
      field = "children";
      n.children = j.at("children").get<std::vector<SeedId>>();
      field = "input_ref";
      if (!j.at("input_ref").is_null()) {
        n.input_ref = j.at("input_ref").get<InputId>();
      }
      field = "own_branches";
      n.own_branches =
          BranchSet::FromSorted(j.at("own_branches").get<std::vector<BranchId>>());
      field = "subtree_branches";
      n.subtree_branches = BranchSet::FromSorted(
          j.at("subtree_branches").get<std::vector<BranchId>>());
      field = "n_scheduled";
      n.n_scheduled = j.at("n_scheduled").get<uint64_t>();
      field = "edge_label";
      if (!j.at("edge_label").is_null()) {
        n.edge_label = EdgeLabel{
            j.at("edge_label").at("mutation_kind").get<std::string>(),
            j.at("edge_label").at("creating_iteration").get<uint64_t>()};
      }
      if (n.kind == NodeKind::kSeed) {
        if (!n.input_ref) throw TreeParseError("seed without input_ref");
        tree.by_input_[*n.input_ref] = n.id;
      }
      tree.nodes_.push_back(std::move(n));
      ++index;
    }
  } catch (const TreeParseError &e) {
    throw TreeParseError("tree document: nodes[" + std::to_string(index) +
                         "]." + field + ": " + e.what());
  } catch (const std::exception &e) {
    throw TreeParseError("tree document: nodes[" + std::to_string(index) +
                         "]." + field + ": " + e.what());
  }
  auto problems = tree.CheckInvariants();
  if (!problems.empty()) {
    throw TreeParseError("tree document: " + problems.front());
  }
  return tree;
}

SeedMutationTree SeedMutationTree::Load(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw TreeParseError("tree document: parse error at byte " +
                         std::to_string(e.byte) + ": " + e.what());
  }
  return FromJson(doc);
}

std::string SeedMutationTree::Outline() const {
  std::ostringstream out;
  std::function<void(SeedId, int)> visit = [&](SeedId id, int depth) {
    const SeedNode &n = nodes_[id];
    out << std::string(2 * depth, ' ');
    switch (n.kind) {
      case NodeKind::kRoot:
        out << "root";
        break;
      case NodeKind::kSeed:
        out << "t" << *n.input_ref;
        break;
      case NodeKind::kVariant:
        out << "t" << *n.input_ref << "'";
        break;
    }
    out << " kind=" << NodeKindName(n.kind) << " n=" << n.n_scheduled
        << " own=" << n.own_branches.size()
        << " subtree=" << n.subtree_branches.size() << "\n";
    for (SeedId c : n.children) visit(c, depth + 1);
  };
  if (!nodes_.empty()) visit(0, 0);
  return out.str();
}

}  // namespace treefuzz
