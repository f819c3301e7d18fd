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

#ifndef TREEFUZZ_RNG_H_
#define TREEFUZZ_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace treefuzz {

// Seedable deterministic generator. Bounded draws use plain modulo so that
// streams do not depend on the standard library's distribution algorithms.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  // Independent stream derived from (seed, name); used to give each consumer
  // (havoc, splice partner choice, scheduler) its own sequence.
  static Rng Substream(uint64_t seed, std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
      h ^= static_cast<uint8_t>(c);
      h *= 0x100000001b3ULL;
    }
    return Rng(SplitMix(seed ^ h));
  }

  uint64_t Next() { return engine_(); }
  // Uniform-ish in [0, bound); bound must be nonzero.
  uint64_t Below(uint64_t bound) { return engine_() % bound; }
  // Uniform in [lo, hi].
  int64_t Range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(Below(static_cast<uint64_t>(hi - lo) + 1));
  }
  // Uniform double in [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool Chance(double p) { return Uniform() < p; }

  friend bool operator==(const Rng &, const Rng &) = default;

 private:
  static uint64_t SplitMix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace treefuzz

#endif  // TREEFUZZ_RNG_H_
