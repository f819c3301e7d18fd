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

// Execution targets. A target maps an input to the branches it covers plus
// an exit status. Two kinds exist: seeded synthetic programs, which are
// acyclic decision graphs over input bytes evaluated in-process, and external
// commands that report their coverage through a trace file.

#ifndef TREEFUZZ_TARGET_H_
#define TREEFUZZ_TARGET_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "treefuzz/coverage.h"

namespace treefuzz {

using InputId = uint64_t;
using ByteArray = std::vector<uint8_t>;

struct Input {
  InputId id = 0;
  ByteArray bytes;
};

enum class ExecStatus { kOk, kCrash, kTimeout };
std::string_view ExecStatusName(ExecStatus status);

struct ExecutionResult {
  BranchSet hits;
  // Per-branch hit counts, sorted by branch; same members as `hits`.
  std::vector<HitCount> hit_counts;
  ExecStatus status = ExecStatus::kOk;
  // Wall-clock microseconds for external targets. Synthetic targets report
  // the number of blocks visited so that results stay deterministic.
  int64_t duration_us = 0;

  friend bool operator==(const ExecutionResult &,
                         const ExecutionResult &) = default;
};

// Bad target setup: unparsable program file, command that cannot be spawned.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The target ran but its result cannot be read (missing or bad trace file).
class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Target {
 public:
  virtual ~Target() = default;
  virtual ExecutionResult Execute(const Input &input) const = 0;
  virtual size_t map_size() const = 0;
  // Inputs longer than this are never produced by the mutators.
  virtual size_t max_input_len() const = 0;
};

// ---------------------------------------------------------------------------
// Synthetic programs

enum class ConditionKind {
  kEquals,  // input[offset] == value ("magic byte")
  kLess,    // input[offset] < value
};

struct Condition {
  ConditionKind kind = ConditionKind::kEquals;
  uint32_t offset = 0;
  uint8_t value = 0;

  bool Holds(std::span<const uint8_t> bytes) const {
    const uint8_t byte = offset < bytes.size() ? bytes[offset] : 0;
    return kind == ConditionKind::kEquals ? byte == value : byte < value;
  }
  friend bool operator==(const Condition &, const Condition &) = default;
};

// One basic block. Successors are indices into the program's block list.
// A block with a condition has both successors; a block without one either
// jumps unconditionally to `on_true` or, with no successor, terminates.
struct Block {
  // Random tag fed to HashEdge, like an AFL compile-time location.
  uint32_t location = 0;
  std::optional<Condition> condition;
  std::optional<uint32_t> on_true;
  std::optional<uint32_t> on_false;
  bool crash = false;

  bool IsTerminal() const { return !on_true.has_value(); }
  friend bool operator==(const Block &, const Block &) = default;
};

struct GenParams {
  int depth = 8;
  int fanout = 2;
  double magic_byte_fraction = 0.5;
  double crash_fraction = 0.05;
  uint32_t max_input_len = 16;

  // Throws std::invalid_argument when a field is out of range.
  void Validate() const;
};

class SyntheticProgram {
 public:
  // Validates successor references, acyclicity from `entry` and condition
  // offsets; throws std::invalid_argument on violation.
  SyntheticProgram(uint64_t generation_seed, uint32_t max_input_len,
                   std::vector<Block> blocks, uint32_t entry);

  // Deterministic in (generation_seed, params). Builds a full decision tree
  // of the given depth; each decision with fanout F is a chain of F-1
  // conditional blocks.
  static SyntheticProgram Generate(uint64_t generation_seed,
                                   const GenParams &params);

  // Blocks b0..b10 of the two-function motivating example:
  //   b0: in[0]=='x' ? b1 : b2        (func2 side : func1 side)
  //   b1: in[1] < 1  ? b3 : b4        b3 terminal
  //   b4: in[1]=='a' ? b5 : b9        b5 -> b6, b9 -> b10, both terminal
  //   b2: in[1]=='z' ? b7 : b8        b7 terminal and crashing, b8 terminal
  // Block index i is b_i.
  static SyntheticProgram MotivatingExample();

  uint64_t generation_seed() const { return generation_seed_; }
  uint32_t max_input_len() const { return max_input_len_; }
  uint32_t entry() const { return entry_; }
  const std::vector<Block> &blocks() const { return blocks_; }
  size_t BranchNodeCount() const;

  // Branch id of the transition from block `from` to block `to`.
  BranchId EdgeId(uint32_t from, uint32_t to, size_t map_size) const {
    return HashEdge(blocks_[from].location, blocks_[to].location, map_size);
  }

  nlohmann::json ToJson() const;
  // Throws ConfigError on malformed documents.
  static SyntheticProgram FromJson(const nlohmann::json &doc);
  static SyntheticProgram LoadFile(const std::string &path);
  void SaveFile(const std::string &path) const;

  friend bool operator==(const SyntheticProgram &,
                         const SyntheticProgram &) = default;

 private:
  uint64_t generation_seed_;
  uint32_t max_input_len_;
  std::vector<Block> blocks_;
  uint32_t entry_;
};

// Walks the program from entry to a terminal block. Bytes past the end of the
// input read as zero.
ExecutionResult ExecuteSynthetic(const SyntheticProgram &program,
                                 const Input &input,
                                 size_t map_size = kDefaultMapSize);

class SyntheticTarget : public Target {
 public:
  explicit SyntheticTarget(SyntheticProgram program,
                           size_t map_size = kDefaultMapSize);
  ExecutionResult Execute(const Input &input) const override {
    return ExecuteSynthetic(program_, input, map_size_);
  }
  size_t map_size() const override { return map_size_; }
  size_t max_input_len() const override { return program_.max_input_len(); }
  const SyntheticProgram &program() const { return program_; }

 private:
  SyntheticProgram program_;
  size_t map_size_;
};

// ---------------------------------------------------------------------------
// External commands

// Environment variable naming the trace file the target must write.
inline constexpr const char kTraceEnvVar[] = "COVERAGE_TRACE_PATH";
// Placeholder replaced by the path of the input file.
inline constexpr const char kInputPlaceholder[] = "@@";

// Runs `command` through /bin/sh with every "@@" replaced by a temporary file
// holding the input bytes and COVERAGE_TRACE_PATH set to a fresh trace path.
// Abnormal termination by a signal is kCrash; exceeding `timeout` kills the
// process group and yields kTimeout. A normal exit without a readable trace
// throws ExecutionError; a shell exit status of 127 (command not found) or a
// failed spawn throws ConfigError.
ExecutionResult ExecuteExternal(std::string_view command, const Input &input,
                                std::chrono::milliseconds timeout,
                                size_t map_size = kDefaultMapSize);

class ExternalTarget : public Target {
 public:
  ExternalTarget(std::string command, std::chrono::milliseconds timeout,
                 size_t map_size = kDefaultMapSize,
                 size_t max_input_len = 1024);
  ExecutionResult Execute(const Input &input) const override {
    return ExecuteExternal(command_, input, timeout_, map_size_);
  }
  size_t map_size() const override { return map_size_; }
  size_t max_input_len() const override { return max_input_len_; }

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
  size_t map_size_;
  size_t max_input_len_;
};

}  // namespace treefuzz

#endif  // TREEFUZZ_TARGET_H_
