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

#include "treefuzz/mutation.h"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

namespace treefuzz {

std::string_view MutationKindName(MutationKind kind) {
  switch (kind) {
    case MutationKind::kBitFlip:
      return "bitflip";
    case MutationKind::kByteFlip:
      return "byteflip";
    case MutationKind::kArith:
      return "arith";
    case MutationKind::kInterestingValue:
      return "interesting";
    case MutationKind::kHavoc:
      return "havoc";
    case MutationKind::kSplice:
      return "splice";
  }
  return "unknown";
}

std::optional<MutationKind> MutationKindFromName(std::string_view name) {
  for (MutationKind kind :
       {MutationKind::kBitFlip, MutationKind::kByteFlip, MutationKind::kArith,
        MutationKind::kInterestingValue, MutationKind::kHavoc,
        MutationKind::kSplice}) {
    if (MutationKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

void MutationOp::Validate() const {
  auto valid_width = [](int w) { return w == 1 || w == 2 || w == 4; };
  switch (kind) {
    case MutationKind::kBitFlip:
    case MutationKind::kByteFlip:
      if (!valid_width(width)) throw std::invalid_argument("bad flip width");
      break;
    case MutationKind::kArith:
      if (!valid_width(width)) throw std::invalid_argument("bad arith width");
      if (delta < -kMaxArithDelta || delta > kMaxArithDelta) {
        throw std::invalid_argument("arith delta outside [-35, 35]");
      }
      break;
    case MutationKind::kInterestingValue:
      if (!valid_width(width)) {
        throw std::invalid_argument("bad interesting width");
      }
      if (value_index < 0 ||
          value_index >= static_cast<int>(kInterestingValues.size())) {
        throw std::invalid_argument("interesting value index out of range");
      }
      break;
    case MutationKind::kHavoc:
      if (stack_count < 1) throw std::invalid_argument("stack_count < 1");
      break;
    case MutationKind::kSplice:
      break;
  }
}

namespace {

// Little-endian load/store of `width` bytes.
uint32_t LoadLe(const uint8_t *p, int width) {
  uint32_t v = 0;
  for (int i = width - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void StoreLe(uint8_t *p, int width, uint32_t v) {
  for (int i = 0; i < width; ++i) {
    p[i] = static_cast<uint8_t>(v);
    v >>= 8;
  }
}

void AddLe(uint8_t *p, int width, int32_t delta) {
  StoreLe(p, width, LoadLe(p, width) + static_cast<uint32_t>(delta));
}

void CheckRange(size_t position, size_t width, size_t limit) {
  if (position + width > limit) {
    throw std::out_of_range("mutation position " + std::to_string(position) +
                            " width " + std::to_string(width) +
                            " outside bound " + std::to_string(limit));
  }
}

void FlipBit(ByteArray &bytes, size_t bit) {
  bytes[bit / 8] ^= static_cast<uint8_t>(128 >> (bit % 8));
}

size_t BlockLen(Rng &rng, size_t limit) {
  return 1 + rng.Below(std::min<size_t>(limit, 32));
}

void ApplyHavocPrimitive(ByteArray &data, int primitive, Rng &rng,
                         const HavocLimits &limits) {
  const size_t len = data.size();
  if (len == 0) {
    // Nothing to mutate in place; grow by one random byte instead.
    if (limits.max_input_len > 0) data.push_back(static_cast<uint8_t>(rng.Next()));
    return;
  }
  // Word-sized primitives fall back to byte width on short inputs.
  auto width_for = [len](int wanted) {
    return static_cast<size_t>(wanted) <= len ? wanted : 1;
  };
  switch (primitive) {
    case 0:
      FlipBit(data, rng.Below(len * 8));
      break;
    case 1:
    case 2:
    case 3: {
      const int width = width_for(primitive == 1 ? 1 : primitive == 2 ? 2 : 4);
      const size_t pos = rng.Below(len - width + 1);
      const int32_t value =
          kInterestingValues[rng.Below(kInterestingValues.size())];
      StoreLe(&data[pos], width, static_cast<uint32_t>(value));
      break;
    }
    case 4:
    case 5:
    case 6:
    case 7:
    case 8:
    case 9: {
      const int wanted = primitive <= 5 ? 1 : primitive <= 7 ? 2 : 4;
      const int width = width_for(wanted);
      const size_t pos = rng.Below(len - width + 1);
      const int32_t amount = static_cast<int32_t>(1 + rng.Below(kMaxArithDelta));
      AddLe(&data[pos], width, primitive % 2 == 0 ? -amount : amount);
      break;
    }
    case 10:
      data[rng.Below(len)] ^= static_cast<uint8_t>(1 + rng.Below(255));
      break;
    case 11: {
      if (len < 2) break;
      const size_t del = BlockLen(rng, len - 1);
      const size_t pos = rng.Below(len - del + 1);
      data.erase(data.begin() + pos, data.begin() + pos + del);
      break;
    }
    case 12: {
      if (len >= limits.max_input_len) break;
      const size_t add = BlockLen(rng, std::min(len, limits.max_input_len - len));
      const size_t to = rng.Below(len + 1);
      ByteArray block;
      if (rng.Below(4) != 0) {
        const size_t from = rng.Below(len - add + 1);
        block.assign(data.begin() + from, data.begin() + from + add);
      } else {
        block.assign(add, static_cast<uint8_t>(rng.Next()));
      }
      data.insert(data.begin() + to, block.begin(), block.end());
      break;
    }
    case 13: {
      const size_t copy = BlockLen(rng, len);
      const size_t from = rng.Below(len - copy + 1);
      const size_t to = rng.Below(len - copy + 1);
      if (rng.Below(4) != 0) {
        std::memmove(&data[to], &data[from], copy);
      } else {
        std::memset(&data[to], static_cast<uint8_t>(rng.Next()), copy);
      }
      break;
    }
    default:
      throw std::logic_error("unknown havoc primitive");
  }
}

}  // namespace

ByteArray Mutate(std::span<const uint8_t> seed, const MutationOp &op,
                 size_t position, Rng &rng, const HavocLimits &limits) {
  op.Validate();
  ByteArray out(seed.begin(), seed.end());
  switch (op.kind) {
    case MutationKind::kBitFlip:
      CheckRange(position, op.width, seed.size() * 8);
      for (int i = 0; i < op.width; ++i) FlipBit(out, position + i);
      break;
    case MutationKind::kByteFlip:
      CheckRange(position, op.width, seed.size());
      for (int i = 0; i < op.width; ++i) out[position + i] ^= 0xFF;
      break;
    case MutationKind::kArith:
      CheckRange(position, op.width, seed.size());
      AddLe(&out[position], op.width, op.delta);
      break;
    case MutationKind::kInterestingValue:
      CheckRange(position, op.width, seed.size());
      StoreLe(&out[position], op.width,
              static_cast<uint32_t>(kInterestingValues[op.value_index]));
      break;
    case MutationKind::kHavoc:
      return Havoc(seed, rng, op.stack_count, limits);
    case MutationKind::kSplice:
      throw std::invalid_argument("splice needs two inputs; call Splice()");
  }
  return out;
}

ByteArray Havoc(std::span<const uint8_t> seed, Rng &rng, int stack_count,
                const HavocLimits &limits) {
  ByteArray data(seed.begin(), seed.end());
  if (data.size() > limits.max_input_len) data.resize(limits.max_input_len);
  for (int i = 0; i < stack_count; ++i) {
    ApplyHavocPrimitive(
        data, static_cast<int>(rng.Below(kHavocPrimitiveCount)), rng, limits);
  }
  return data;
}

ByteArray SpliceAt(std::span<const uint8_t> first,
                   std::span<const uint8_t> second, size_t split_first,
                   size_t split_second) {
  if (split_first > first.size() || split_second > second.size()) {
    throw std::out_of_range("splice split point beyond input");
  }
  ByteArray out(first.begin(), first.begin() + split_first);
  out.insert(out.end(), second.begin() + split_second, second.end());
  return out;
}

std::optional<SpliceResult> Splice(const Input &first, const Input &second,
                                   Rng &rng) {
  if (first.bytes.size() < 2 || second.bytes.size() < 2) return std::nullopt;
  const size_t split_first = 1 + rng.Below(first.bytes.size() - 1);
  const size_t split_second = 1 + rng.Below(second.bytes.size() - 1);
  return SpliceResult{
      SpliceAt(first.bytes, second.bytes, split_first, split_second),
      first.id};
}

void ForEachDeterministicMutation(
    std::span<const uint8_t> seed,
    const std::function<bool(ByteArray &&, const MutationOp &)> &visit) {
  Rng unused;
  const size_t bits = seed.size() * 8;
  for (int width : {1, 2, 4}) {
    const MutationOp op = MutationOp::BitFlip(width);
    for (size_t pos = 0; pos + width <= bits; ++pos) {
      if (!visit(Mutate(seed, op, pos, unused), op)) return;
    }
  }
  for (int width : {1, 2, 4}) {
    const MutationOp op = MutationOp::ByteFlip(width);
    for (size_t pos = 0; pos + width <= seed.size(); ++pos) {
      if (!visit(Mutate(seed, op, pos, unused), op)) return;
    }
  }
}

size_t DeterministicMutationCount(size_t len) {
  size_t total = 0;
  for (size_t width : {1, 2, 4}) {
    if (len * 8 >= width) total += len * 8 - width + 1;
    if (len >= width) total += len - width + 1;
  }
  return total;
}

}  // namespace treefuzz
