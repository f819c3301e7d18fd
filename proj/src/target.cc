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

#include "treefuzz/target.h"

#include <fcntl.h>
#include <signal.h>
#include <stdlib.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "treefuzz/rng.h"

extern char **environ;

namespace treefuzz {

std::string_view ExecStatusName(ExecStatus status) {
  switch (status) {
    case ExecStatus::kOk:
      return "ok";
    case ExecStatus::kCrash:
      return "crash";
    case ExecStatus::kTimeout:
      return "timeout";
  }
  return "unknown";
}

void GenParams::Validate() const {
  auto fail = [](const std::string &what) {
    throw std::invalid_argument("invalid generator parameter: " + what);
  };
  if (depth < 1) fail("depth must be >= 1");
  if (fanout < 2 || fanout > 256) fail("fanout must be in [2, 256]");
  if (!(magic_byte_fraction >= 0.0 && magic_byte_fraction <= 1.0)) {
    fail("magic_byte_fraction must be in [0, 1]");
  }
  if (!(crash_fraction >= 0.0 && crash_fraction <= 1.0)) {
    fail("crash_fraction must be in [0, 1]");
  }
  if (max_input_len < 1) fail("max_input_len must be >= 1");
  // Full trees grow as fanout^depth; refuse anything past a few million blocks.
  if (std::pow(static_cast<double>(fanout), depth) > 4.0e6) {
    fail("fanout^depth too large");
  }
}

SyntheticProgram::SyntheticProgram(uint64_t generation_seed,
                                   uint32_t max_input_len,
                                   std::vector<Block> blocks, uint32_t entry)
    : generation_seed_(generation_seed),
      max_input_len_(max_input_len),
      blocks_(std::move(blocks)),
      entry_(entry) {
  auto fail = [](const std::string &what) {
    throw std::invalid_argument("invalid synthetic program: " + what);
  };
  const size_t n = blocks_.size();
  if (n == 0) fail("no blocks");
  if (entry_ >= n) fail("entry out of range");
  if (max_input_len_ < 1) fail("max_input_len must be >= 1");
  for (size_t i = 0; i < n; ++i) {
    const Block &b = blocks_[i];
    const std::string where = "block " + std::to_string(i) + ": ";
    if (b.on_true && *b.on_true >= n) fail(where + "on_true out of range");
    if (b.on_false && *b.on_false >= n) fail(where + "on_false out of range");
    if (b.condition) {
      if (!b.on_true || !b.on_false) {
        fail(where + "conditional block needs both successors");
      }
      if (b.condition->offset >= max_input_len_) {
        fail(where + "condition offset beyond max_input_len");
      }
    } else if (b.on_false) {
      fail(where + "unconditional block cannot have on_false");
    }
  }
  // Iterative DFS with colors: 0 unvisited, 1 on stack, 2 done.
  std::vector<uint8_t> color(n, 0);
  std::vector<std::pair<uint32_t, int>> stack = {{entry_, 0}};
  color[entry_] = 1;
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    const Block &b = blocks_[node];
    std::optional<uint32_t> succ;
    if (next == 0) succ = b.on_true;
    if (next == 1) succ = b.on_false;
    if (next >= 2) {
      color[node] = 2;
      stack.pop_back();
      continue;
    }
    ++next;
    if (!succ) continue;
    if (color[*succ] == 1) fail("cycle through block " + std::to_string(*succ));
    if (color[*succ] == 0) {
      color[*succ] = 1;
      stack.push_back({*succ, 0});
    }
  }
}

size_t SyntheticProgram::BranchNodeCount() const {
  return std::count_if(blocks_.begin(), blocks_.end(),
                       [](const Block &b) { return b.condition.has_value(); });
}

namespace {

class ProgramBuilder {
 public:
  ProgramBuilder(uint64_t seed, const GenParams &params)
      : params_(params), rng_(seed) {}

  uint32_t Build(int depth_left) {
    if (depth_left == 0) {
      uint32_t leaf = NewBlock();
      leaves_.push_back(leaf);
      return leaf;
    }
    // One decision: a chain of fanout-1 tests over the same byte, like a
    // switch statement with a default arm.
    const int arms = params_.fanout - 1;
    const bool magic = rng_.Chance(params_.magic_byte_fraction);
    const uint32_t offset =
        static_cast<uint32_t>(rng_.Below(params_.max_input_len));
    const uint32_t first = static_cast<uint32_t>(blocks_.size());
    for (int j = 0; j < arms; ++j) NewBlock();
    std::vector<uint8_t> used;
    for (int j = 0; j < arms; ++j) {
      Condition cond;
      cond.offset = offset;
      cond.kind = magic ? ConditionKind::kEquals : ConditionKind::kLess;
      uint8_t value;
      do {
        value = static_cast<uint8_t>(1 + rng_.Below(255));
      } while (std::find(used.begin(), used.end(), value) != used.end());
      used.push_back(value);
      cond.value = value;
      blocks_[first + j].condition = cond;
    }
    for (int j = 0; j < arms; ++j) {
      uint32_t taken = Build(depth_left - 1);
      blocks_[first + j].on_true = taken;
      uint32_t fallthrough =
          j + 1 < arms ? first + j + 1 : Build(depth_left - 1);
      blocks_[first + j].on_false = fallthrough;
    }
    return first;
  }

  void MarkCrashes() {
    // Fisher-Yates over the leaves, then mark a prefix.
    for (size_t i = leaves_.size(); i > 1; --i) {
      std::swap(leaves_[i - 1], leaves_[rng_.Below(i)]);
    }
    const size_t crashes = static_cast<size_t>(
        std::llround(params_.crash_fraction * leaves_.size()));
    for (size_t i = 0; i < crashes; ++i) blocks_[leaves_[i]].crash = true;
  }

  std::vector<Block> TakeBlocks() { return std::move(blocks_); }

 private:
  uint32_t NewBlock() {
    Block b;
    b.location = static_cast<uint32_t>(rng_.Next());
    blocks_.push_back(b);
    return static_cast<uint32_t>(blocks_.size() - 1);
  }

  const GenParams &params_;
  Rng rng_;
  std::vector<Block> blocks_;
  std::vector<uint32_t> leaves_;
};

}  // namespace

SyntheticProgram SyntheticProgram::Generate(uint64_t generation_seed,
                                            const GenParams &params) {
  params.Validate();
  ProgramBuilder builder(generation_seed, params);
  const uint32_t entry = builder.Build(params.depth);
  builder.MarkCrashes();
  return SyntheticProgram(generation_seed, params.max_input_len,
                          builder.TakeBlocks(), entry);
}

SyntheticProgram SyntheticProgram::MotivatingExample() {
  std::vector<Block> b(11);
  Rng rng(0x51ed);
  for (Block &block : b) block.location = static_cast<uint32_t>(rng.Next());
  auto branch = [&](int at, ConditionKind kind, uint32_t offset, uint8_t value,
                    uint32_t on_true, uint32_t on_false) {
    b[at].condition = Condition{kind, offset, value};
    b[at].on_true = on_true;
    b[at].on_false = on_false;
  };
  branch(0, ConditionKind::kEquals, 0, 'x', 1, 2);
  branch(1, ConditionKind::kLess, 1, 1, 3, 4);
  branch(4, ConditionKind::kEquals, 1, 'a', 5, 9);
  b[5].on_true = 6;
  b[9].on_true = 10;
  branch(2, ConditionKind::kEquals, 1, 'z', 7, 8);
  b[7].crash = true;
  return SyntheticProgram(0, 2, std::move(b), 0);
}

nlohmann::json SyntheticProgram::ToJson() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Block &b : blocks_) {
    nlohmann::json node;
    node["location"] = b.location;
    if (b.condition) {
      node["condition"] = {
          {"kind", b.condition->kind == ConditionKind::kEquals ? "eq" : "lt"},
          {"offset", b.condition->offset},
          {"value", b.condition->value}};
    } else {
      node["condition"] = nullptr;
    }
    node["on_true"] = b.on_true ? nlohmann::json(*b.on_true) : nullptr;
    node["on_false"] = b.on_false ? nlohmann::json(*b.on_false) : nullptr;
    node["crash"] = b.crash;
    nodes.push_back(std::move(node));
  }
  return {{"seed", generation_seed_},
          {"max_input_len", max_input_len_},
          {"entry", entry_},
          {"nodes", std::move(nodes)}};
}

SyntheticProgram SyntheticProgram::FromJson(const nlohmann::json &doc) {
  try {
    std::vector<Block> blocks;
    for (const auto &node : doc.at("nodes")) {
      Block b;
      b.location = node.at("location").get<uint32_t>();
      const auto &cond = node.at("condition");
      if (!cond.is_null()) {
        Condition c;
        const std::string kind = cond.at("kind").get<std::string>();
        if (kind == "eq") {
          c.kind = ConditionKind::kEquals;
        } else if (kind == "lt") {
          c.kind = ConditionKind::kLess;
        } else {
          throw ConfigError("unknown condition kind '" + kind + "'");
        }
        c.offset = cond.at("offset").get<uint32_t>();
        c.value = cond.at("value").get<uint8_t>();
        b.condition = c;
      }
      if (!node.at("on_true").is_null()) {
        b.on_true = node.at("on_true").get<uint32_t>();
      }
      if (!node.at("on_false").is_null()) {
        b.on_false = node.at("on_false").get<uint32_t>();
      }
      b.crash = node.value("crash", false);
      blocks.push_back(b);
    }
    return SyntheticProgram(doc.at("seed").get<uint64_t>(),
                            doc.at("max_input_len").get<uint32_t>(),
                            std::move(blocks), doc.at("entry").get<uint32_t>());
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("malformed synthetic program: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
}

SyntheticProgram SyntheticProgram::LoadFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synthetic program '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
  return FromJson(doc);
}

void SyntheticProgram::SaveFile(const std::string &path) const {
  std::ofstream out(path);
  out << ToJson().dump(1) << "\n";
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

ExecutionResult ExecuteSynthetic(const SyntheticProgram &program,
                                 const Input &input, size_t map_size) {
  const auto &blocks = program.blocks();
  ExecutionResult result;
  std::vector<BranchId> ids;
  uint32_t at = program.entry();
  int64_t visited = 1;
  bool crashed = blocks[at].crash;
  while (!blocks[at].IsTerminal()) {
    const Block &b = blocks[at];
    uint32_t next = *b.on_true;
    if (b.condition && !b.condition->Holds(input.bytes)) next = *b.on_false;
    ids.push_back(program.EdgeId(at, next, map_size));
    at = next;
    ++visited;
    crashed = crashed || blocks[at].crash;
  }
  std::sort(ids.begin(), ids.end());
  for (size_t i = 0; i < ids.size();) {
    size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    result.hit_counts.push_back({ids[i], static_cast<uint32_t>(j - i)});
    i = j;
  }
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  result.hits = BranchSet::FromSorted(std::move(ids));
  result.status = crashed ? ExecStatus::kCrash : ExecStatus::kOk;
  result.duration_us = visited;
  return result;
}

SyntheticTarget::SyntheticTarget(SyntheticProgram program, size_t map_size)
    : program_(std::move(program)), map_size_(map_size) {
  CheckMapSize(map_size);
}

// ---------------------------------------------------------------------------

namespace {

// Removes the file on destruction.
class TempPath {
 public:
  explicit TempPath(const char *prefix) {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / prefix).string() + "XXXXXX";
    int fd = mkstemp(tmpl.data());
    if (fd < 0) throw ConfigError("cannot create temporary file " + tmpl);
    close(fd);
    path_ = tmpl;
  }
  ~TempPath() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempPath(const TempPath &) = delete;
  TempPath &operator=(const TempPath &) = delete;
  const std::string &path() const { return path_; }

 private:
  std::string path_;
};

std::string SubstituteInputPath(std::string_view command,
                                const std::string &path) {
  std::string out;
  size_t pos = 0;
  while (true) {
    size_t hit = command.find(kInputPlaceholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(command.substr(pos, hit - pos));
    out += path;
    pos = hit + 2;
  }
  out.append(command.substr(pos));
  return out;
}

}  // namespace

ExecutionResult ExecuteExternal(std::string_view command, const Input &input,
                                std::chrono::milliseconds timeout,
                                size_t map_size) {
  CheckMapSize(map_size);
  TempPath input_file("treefuzz-input-");
  TempPath trace_file("treefuzz-trace-");
  {
    std::ofstream out(input_file.path(), std::ios::binary);
    out.write(reinterpret_cast<const char *>(input.bytes.data()),
              static_cast<std::streamsize>(input.bytes.size()));
    if (!out) throw ConfigError("cannot write " + input_file.path());
  }
  std::filesystem::remove(trace_file.path());

  const std::string shell_command =
      SubstituteInputPath(command, input_file.path());
  // Environment is assembled before fork; the child only calls exec.
  std::vector<std::string> env_strings;
  for (char **e = environ; e && *e; ++e) {
    if (std::string_view(*e).starts_with(std::string(kTraceEnvVar) + "=")) {
      continue;
    }
    env_strings.emplace_back(*e);
  }
  env_strings.push_back(std::string(kTraceEnvVar) + "=" + trace_file.path());
  std::vector<char *> envp;
  for (auto &s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) throw ConfigError("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    int devnull = open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      dup2(devnull, STDIN_FILENO);
      dup2(devnull, STDOUT_FILENO);
      dup2(devnull, STDERR_FILENO);
    }
    execle("/bin/sh", "sh", "-c", shell_command.c_str(),
           static_cast<char *>(nullptr), envp.data());
    _exit(127);
  }
  setpgid(pid, pid);

  int wstatus = 0;
  bool timed_out = false;
  while (true) {
    pid_t r = waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw ConfigError("waitpid failed");
    if (std::chrono::steady_clock::now() - start >= timeout) {
      timed_out = true;
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &wstatus, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }

  ExecutionResult result;
  result.duration_us = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  if (timed_out) {
    result.status = ExecStatus::kTimeout;
  } else if (WIFSIGNALED(wstatus)) {
    result.status = ExecStatus::kCrash;
  } else if (WIFEXITED(wstatus) && WEXITSTATUS(wstatus) == 127) {
    throw ConfigError("command not found or not executable: " +
                      std::string(command));
  }

  std::ifstream trace(trace_file.path());
  if (!trace) {
    if (result.status != ExecStatus::kOk) return result;
    throw ExecutionError("target wrote no coverage trace (expected " +
                         std::string(kTraceEnvVar) + " file)");
  }
  std::stringstream text;
  text << trace.rdbuf();
  try {
    result.hit_counts = ParseHitCounts(text.str());
  } catch (const std::invalid_argument &e) {
    throw ExecutionError(std::string("unparsable coverage trace: ") + e.what());
  }
  std::vector<BranchId> ids;
  for (const HitCount &h : result.hit_counts) {
    if (h.branch >= map_size) {
      throw ExecutionError("trace branch id " + std::to_string(h.branch) +
                           " outside map of size " + std::to_string(map_size));
    }
    ids.push_back(h.branch);
  }
  result.hits = BranchSet::FromSorted(std::move(ids));
  return result;
}

ExternalTarget::ExternalTarget(std::string command,
                               std::chrono::milliseconds timeout,
                               size_t map_size, size_t max_input_len)
    : command_(std::move(command)),
      timeout_(timeout),
      map_size_(map_size),
      max_input_len_(max_input_len) {
  CheckMapSize(map_size);
  if (command_.find(kInputPlaceholder) == std::string::npos) {
    throw ConfigError("command template lacks the @@ placeholder: " +
                      command_);
  }
}

}  // namespace treefuzz
