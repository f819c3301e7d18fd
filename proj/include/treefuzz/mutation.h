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

// AFL-style byte mutators: deterministic flips and arithmetic, stacked havoc
// and two-input splice. All functions return fresh byte arrays and never
// touch their inputs.

#ifndef TREEFUZZ_MUTATION_H_
#define TREEFUZZ_MUTATION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "treefuzz/rng.h"
#include "treefuzz/target.h"

namespace treefuzz {

enum class MutationKind {
  kBitFlip,
  kByteFlip,
  kArith,
  kInterestingValue,
  kHavoc,
  kSplice,
};

std::string_view MutationKindName(MutationKind kind);
std::optional<MutationKind> MutationKindFromName(std::string_view name);

inline constexpr std::array<int32_t, 16> kInterestingValues = {
    0, 1, -1, 16, 32, 64, 100, 127, -128, 255, 256, 512, 1024, 4096, 32767,
    -32768};

inline constexpr int kMaxArithDelta = 35;

struct MutationOp {
  MutationKind kind = MutationKind::kBitFlip;
  // Bits for kBitFlip, bytes for the other fixed-width kinds: 1, 2 or 4.
  int width = 1;
  // kArith only, in [-35, 35].
  int delta = 0;
  // kInterestingValue only: index into kInterestingValues.
  int value_index = 0;
  // kHavoc only, >= 1.
  int stack_count = 1;

  static MutationOp BitFlip(int width) { return {MutationKind::kBitFlip, width}; }
  static MutationOp ByteFlip(int width) {
    return {MutationKind::kByteFlip, width};
  }
  static MutationOp Arith(int delta, int width = 1) {
    return {MutationKind::kArith, width, delta};
  }
  static MutationOp Interesting(int value_index, int width = 1) {
    return {MutationKind::kInterestingValue, width, 0, value_index};
  }
  static MutationOp Havoc(int stack_count) {
    return {MutationKind::kHavoc, 1, 0, 0, stack_count};
  }
  static MutationOp Splice() { return {MutationKind::kSplice}; }

  // Throws std::invalid_argument when a parameter is outside its range.
  void Validate() const;
};

struct HavocLimits {
  size_t max_input_len = 1024;
};

// Applies one mutation. `position` is a bit index for kBitFlip and a byte
// index otherwise; bits are numbered MSB-first within each byte. The rng is
// only consulted by kHavoc. Out-of-range positions throw std::out_of_range;
// kSplice throws std::invalid_argument (use Splice()).
ByteArray Mutate(std::span<const uint8_t> seed, const MutationOp &op,
                 size_t position, Rng &rng, const HavocLimits &limits = {});

// Applies `stack_count` randomly chosen primitives in sequence. The result is
// never longer than limits.max_input_len.
ByteArray Havoc(std::span<const uint8_t> seed, Rng &rng, int stack_count,
                const HavocLimits &limits);

// Number of distinct havoc primitives; the first rng draw of each stacked
// step selects one of them and primitive 0 is a single random bit flip.
inline constexpr int kHavocPrimitiveCount = 14;

struct SpliceResult {
  ByteArray bytes;
  // Tree attribution: always the first (scheduled) input.
  InputId parent = 0;
};

// first[0, split_first) followed by second[split_second, end).
ByteArray SpliceAt(std::span<const uint8_t> first,
                   std::span<const uint8_t> second, size_t split_first,
                   size_t split_second);

// Picks split points in [1, len-1] of each input. Returns nullopt (the op is
// skipped) when either input is shorter than two bytes.
std::optional<SpliceResult> Splice(const Input &first, const Input &second,
                                   Rng &rng);

// Enumerates the deterministic stage: walking bit flips of width 1, 2, 4 then
// byte flips of width 1, 2, 4 over every valid position. Stops early when
// `visit` returns false.
void ForEachDeterministicMutation(
    std::span<const uint8_t> seed,
    const std::function<bool(ByteArray &&, const MutationOp &)> &visit);

// Number of mutants ForEachDeterministicMutation produces for `len` bytes.
size_t DeterministicMutationCount(size_t len);

}  // namespace treefuzz

#endif  // TREEFUZZ_MUTATION_H_
