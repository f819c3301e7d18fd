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

// Edge coverage: branch identifiers, canonical branch sets and the global
// coverage bitmap that drives retention decisions.

#ifndef TREEFUZZ_COVERAGE_H_
#define TREEFUZZ_COVERAGE_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treefuzz {

using BranchId = uint32_t;

inline constexpr size_t kDefaultMapSize = 65536;

// Throws std::invalid_argument unless `map_size` is a nonzero power of two.
void CheckMapSize(size_t map_size);

// AFL-style edge hash: ((prev_block >> 1) ^ cur_block) mod map_size.
BranchId HashEdge(uint64_t prev_block, uint64_t cur_block, size_t map_size);

// A set of branch ids kept sorted ascending without duplicates.
class BranchSet {
 public:
  BranchSet() = default;
  BranchSet(std::initializer_list<BranchId> ids);
  // Sorts and deduplicates.
  static BranchSet FromUnsorted(std::vector<BranchId> ids);
  // `ids` must already be strictly ascending.
  static BranchSet FromSorted(std::vector<BranchId> ids);

  bool empty() const { return ids_.empty(); }
  size_t size() const { return ids_.size(); }
  std::span<const BranchId> ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  bool Contains(BranchId id) const;
  // Returns true if `other` added at least one new member.
  bool MergeFrom(const BranchSet &other);
  BranchSet Union(const BranchSet &other) const;
  BranchSet Minus(const BranchSet &other) const;
  bool IsSubsetOf(const BranchSet &other) const;

  // Newline-separated ascending decimal ids, no trailing newline.
  std::string Serialize() const;
  // Accepts blank lines and a trailing newline; rejects anything that is not
  // a decimal id. Members may repeat and come in any order.
  static BranchSet Parse(std::string_view text);

  friend bool operator==(const BranchSet &, const BranchSet &) = default;

 private:
  std::vector<BranchId> ids_;
};

// Parses trace text into a hit-count list: one entry per distinct id, sorted
// by id, counting repeated lines. Throws std::invalid_argument on bad lines.
struct HitCount {
  BranchId branch;
  uint32_t count;
  friend bool operator==(const HitCount &, const HitCount &) = default;
};
std::vector<HitCount> ParseHitCounts(std::string_view text);

// AFL hit-count bucket index for `count` >= 1:
// 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128+ map to 0..7.
int HitCountBucket(uint32_t count);

// Derived id for (branch, bucket). Bucket 0 maps to `branch` itself and every
// bucket of the same branch maps to a distinct id when map_size >= 8.
BranchId BucketedBranchId(BranchId branch, int bucket, size_t map_size);

// Replaces every hit by its bucketed id.
BranchSet BucketizeHits(std::span<const HitCount> hits, size_t map_size);

// Fixed-size bitmap of covered branches.
class CoverageMap {
 public:
  explicit CoverageMap(size_t map_size = kDefaultMapSize);

  size_t map_size() const { return map_size_; }
  size_t set_count() const { return set_count_; }
  bool Contains(BranchId id) const;

  // Sets every hit and returns the ones that were not set before.
  // Out-of-range ids throw std::out_of_range.
  BranchSet RecordExecution(const BranchSet &hits);
  // Same as RecordExecution but without mutating the map.
  BranchSet Novelty(const BranchSet &hits) const;

  double CoverageRatio() const {
    return static_cast<double>(set_count_) / static_cast<double>(map_size_);
  }

 private:
  size_t map_size_;
  size_t set_count_ = 0;
  std::vector<uint64_t> words_;
};

}  // namespace treefuzz

#endif  // TREEFUZZ_COVERAGE_H_
