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

#include "treefuzz/corpus.h"

#include <stdexcept>

namespace treefuzz {

uint64_t PathHash(const BranchSet &hits) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (BranchId id : hits) {
    h ^= id;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return h;
}

const CorpusEntry &Corpus::Add(Input input, BranchSet branches,
                               int64_t exec_us) {
  if (index_.contains(input.id)) {
    throw std::invalid_argument("duplicate corpus id " +
                                std::to_string(input.id));
  }
  CorpusEntry entry;
  entry.path_hash = PathHash(branches);
  entry.input = std::move(input);
  entry.branches = std::move(branches);
  entry.exec_us = exec_us;
  index_[entry.input.id] = entries_.size();
  entries_.push_back(std::move(entry));
  return entries_.back();
}

size_t Corpus::IndexOf(InputId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw std::out_of_range("unknown corpus id " + std::to_string(id));
  }
  return it->second;
}

void Corpus::NoteExecution(const BranchSet &hits) {
  for (BranchId id : hits) ++branch_hits_[id];
  ++path_frequency_[PathHash(hits)];
}

uint64_t Corpus::PathFrequency(uint64_t path_hash) const {
  auto it = path_frequency_.find(path_hash);
  return it == path_frequency_.end() ? 0 : it->second;
}

}  // namespace treefuzz
