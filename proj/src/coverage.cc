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

#include "treefuzz/coverage.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <iterator>
#include <map>
#include <stdexcept>
#include <string>

namespace treefuzz {

void CheckMapSize(size_t map_size) {
  if (map_size == 0 || !std::has_single_bit(map_size)) {
    throw std::invalid_argument("map size must be a nonzero power of two, got " +
                                std::to_string(map_size));
  }
}

BranchId HashEdge(uint64_t prev_block, uint64_t cur_block, size_t map_size) {
  CheckMapSize(map_size);
  return static_cast<BranchId>(((prev_block >> 1) ^ cur_block) &
                               (map_size - 1));
}

BranchSet::BranchSet(std::initializer_list<BranchId> ids)
    : BranchSet(FromUnsorted(std::vector<BranchId>(ids))) {}

BranchSet BranchSet::FromUnsorted(std::vector<BranchId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  BranchSet set;
  set.ids_ = std::move(ids);
  return set;
}

BranchSet BranchSet::FromSorted(std::vector<BranchId> ids) {
  if (std::adjacent_find(ids.begin(), ids.end(), std::greater_equal<>()) !=
      ids.end()) {
    throw std::invalid_argument("branch ids are not strictly ascending");
  }
  BranchSet set;
  set.ids_ = std::move(ids);
  return set;
}

bool BranchSet::Contains(BranchId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

bool BranchSet::MergeFrom(const BranchSet &other) {
  if (other.IsSubsetOf(*this)) return false;
  *this = Union(other);
  return true;
}

BranchSet BranchSet::Union(const BranchSet &other) const {
  BranchSet out;
  out.ids_.reserve(ids_.size() + other.ids_.size());
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                 other.ids_.end(), std::back_inserter(out.ids_));
  return out;
}

BranchSet BranchSet::Minus(const BranchSet &other) const {
  BranchSet out;
  std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(),
                      other.ids_.end(), std::back_inserter(out.ids_));
  return out;
}

bool BranchSet::IsSubsetOf(const BranchSet &other) const {
  return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(),
                       ids_.end());
}

std::string BranchSet::Serialize() const {
  std::string out;
  for (size_t i = 0; i < ids_.size(); ++i) {
    if (i) out.push_back('\n');
    out += std::to_string(ids_[i]);
  }
  return out;
}

namespace {

// Calls `fn(id)` for each nonblank line of `text`.
template <typename Fn>
void ForEachIdLine(std::string_view text, Fn fn) {
  size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view()
                                         : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    BranchId id = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": not a branch id: '" + std::string(line) +
                                  "'");
    }
    fn(id);
  }
}

}  // namespace

BranchSet BranchSet::Parse(std::string_view text) {
  std::vector<BranchId> ids;
  ForEachIdLine(text, [&](BranchId id) { ids.push_back(id); });
  return FromUnsorted(std::move(ids));
}

std::vector<HitCount> ParseHitCounts(std::string_view text) {
  std::map<BranchId, uint32_t> counts;
  ForEachIdLine(text, [&](BranchId id) { ++counts[id]; });
  std::vector<HitCount> out;
  out.reserve(counts.size());
  for (auto [id, count] : counts) out.push_back({id, count});
  return out;
}

int HitCountBucket(uint32_t count) {
  if (count <= 3) return count == 0 ? 0 : static_cast<int>(count) - 1;
  if (count <= 7) return 3;
  if (count <= 15) return 4;
  if (count <= 31) return 5;
  if (count <= 127) return 6;
  return 7;
}

BranchId BucketedBranchId(BranchId branch, int bucket, size_t map_size) {
  constexpr uint64_t kOddMultiplier = 0x9E3779B1u;
  const uint64_t mask = map_size - 1;
  return static_cast<BranchId>(
      (branch ^ (static_cast<uint64_t>(bucket) * kOddMultiplier)) & mask);
}

BranchSet BucketizeHits(std::span<const HitCount> hits, size_t map_size) {
  std::vector<BranchId> ids;
  ids.reserve(hits.size());
  for (const HitCount &hit : hits) {
    ids.push_back(
        BucketedBranchId(hit.branch, HitCountBucket(hit.count), map_size));
  }
  return BranchSet::FromUnsorted(std::move(ids));
}

CoverageMap::CoverageMap(size_t map_size)
    : map_size_(map_size), words_((map_size + 63) / 64, 0) {
  CheckMapSize(map_size);
}

bool CoverageMap::Contains(BranchId id) const {
  if (id >= map_size_) return false;
  return (words_[id >> 6] >> (id & 63)) & 1;
}

BranchSet CoverageMap::Novelty(const BranchSet &hits) const {
  std::vector<BranchId> fresh;
  for (BranchId id : hits) {
    if (id >= map_size_) {
      throw std::out_of_range("branch id " + std::to_string(id) +
                              " outside map of size " +
                              std::to_string(map_size_));
    }
    if (!Contains(id)) fresh.push_back(id);
  }
  return BranchSet::FromSorted(std::move(fresh));
}

BranchSet CoverageMap::RecordExecution(const BranchSet &hits) {
  BranchSet fresh = Novelty(hits);
  for (BranchId id : fresh) words_[id >> 6] |= uint64_t{1} << (id & 63);
  set_count_ += fresh.size();
  return fresh;
}

}  // namespace treefuzz
