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

#ifndef TREEFUZZ_CORPUS_H_
#define TREEFUZZ_CORPUS_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "treefuzz/coverage.h"
#include "treefuzz/target.h"

namespace treefuzz {

// Order-sensitive hash of a branch set; identifies an execution path.
uint64_t PathHash(const BranchSet &hits);

struct CorpusEntry {
  Input input;
  // Branches covered by the input (not only the novel ones).
  BranchSet branches;
  int64_t exec_us = 0;
  uint64_t n_scheduled = 0;
  uint64_t path_hash = 0;

  size_t size() const { return input.bytes.size(); }
};

// The seed pool in retention order, plus execution statistics some
// baseline schedulers consume.
class Corpus {
 public:
  explicit Corpus(size_t map_size = kDefaultMapSize)
      : branch_hits_(map_size, 0) {}

  // Throws std::invalid_argument on a duplicate id.
  const CorpusEntry &Add(Input input, BranchSet branches, int64_t exec_us);

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<CorpusEntry> &entries() const { return entries_; }
  // Position in retention order. Throws std::out_of_range.
  size_t IndexOf(InputId id) const;
  const CorpusEntry &Get(InputId id) const { return entries_[IndexOf(id)]; }
  bool Contains(InputId id) const { return index_.contains(id); }
  void MarkScheduled(InputId id) { ++entries_[IndexOf(id)].n_scheduled; }

  // Per-execution statistics: how often each branch was hit and how often
  // each path was exercised.
  void NoteExecution(const BranchSet &hits);
  uint64_t BranchHits(BranchId id) const { return branch_hits_[id]; }
  void SetBranchHits(BranchId id, uint64_t hits) { branch_hits_[id] = hits; }
  uint64_t PathFrequency(uint64_t path_hash) const;

 private:
  std::vector<CorpusEntry> entries_;
  std::unordered_map<InputId, size_t> index_;
  std::vector<uint64_t> branch_hits_;
  std::unordered_map<uint64_t, uint64_t> path_frequency_;
};

}  // namespace treefuzz

#endif  // TREEFUZZ_CORPUS_H_
