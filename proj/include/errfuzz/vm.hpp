// Copyright 2026 The errfuzz Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Derived supergraph and the interpreter.
//
// derive_cfg() inlines calls per calling context: every function body is
// materialized once per call-site stack of length <= context_depth, and a
// call that would go deeper becomes a single summary node. Blocks are split
// after each plain `call`, so a segment ends either in a call or in the
// block's terminator. Names:
//
//   root function        label, label.1, ...
//   inlined callee       main:b#0/f:label        (site = caller:block#call)
//   summarized call      main:b#0/f:x#1/~g
//
// Machine executes a Program against that graph and reports the block path
// in derived BlockIds, so traces and static analyses share one id space.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "errfuzz/cfg.hpp"
#include "errfuzz/ir.hpp"

namespace errfuzz {

inline constexpr std::uint32_t kNone = UINT32_MAX;

struct DeriveOptions {
  std::uint32_t context_depth = 4;
  std::size_t block_budget = 100000;
};

struct ContextInfo {
  std::uint32_t parent = kNone;    // kNone for the root context
  std::uint32_t function = 0;      // function executing in this context
  std::vector<std::string> stack;  // call-site labels from the entry function
  std::uint64_t hash = 0;
  bool truncated = false;          // summary context: deeper calls collapsed
};

struct BlockOrigin {
  std::uint32_t context = 0;
  std::uint32_t function = 0;
  std::uint32_t block = 0;    // index into Function::blocks
  std::uint32_t segment = 0;  // 0 for the block head
  bool summary = false;       // summary node for a call collapsed at depth
};

struct DerivedCfg {
  Cfg cfg;
  std::vector<BlockOrigin> origins;  // indexed by BlockId
  std::vector<ContextInfo> contexts;  // contexts[0] is the entry context

  // Non-summary derived blocks for one segment of an IR block, over all
  // contexts, in id order.
  std::vector<BlockId> instances(std::uint32_t function, std::uint32_t block,
                                 std::uint32_t segment = 0) const;
};

// Plain-call split points: for each block, the body indices of its
// `call` instructions. Segment s covers body indices (calls[s-1], calls[s]].
std::vector<std::uint32_t> call_positions(const Block& block);
std::uint32_t segment_of(const Block& block, std::uint32_t inst);

// Throws ValidationError when more than block_budget blocks would be
// materialized.
DerivedCfg derive_cfg(const Program& program, const DeriveOptions& options = {});

// Stable 64-bit hash of a call-site stack; `truncated` appends a marker.
std::uint64_t context_hash(std::span<const std::string> stack, bool truncated);

enum class Outcome : std::uint8_t { Ok, Crash, Exit, BudgetExceeded };

std::string_view to_string(Outcome outcome);

// Positional fault decisions: bit i drives the i-th fallible-call encounter.
using ErrorSequence = std::vector<std::uint8_t>;

struct Encounter {
  std::uint32_t point = 0;    // fallible-call index in program text order
  std::uint32_t context = 0;  // DerivedCfg::contexts index
  bool injected = false;

  bool operator==(const Encounter&) const = default;
};

struct ExecutionTrace {
  std::vector<BlockId> path;
  std::vector<Encounter> encounters;
  std::vector<std::uint8_t> edge_hits;  // one byte per derived edge, 0 or 1
  Outcome outcome = Outcome::Ok;
  std::uint32_t bug = kNone;  // Machine::bug_label index when outcome is Crash
  BlockId crash_block;
  std::uint64_t steps = 0;

  std::vector<EdgeId> covered_edges() const;
  PathSpec path_spec() const { return PathSpec{path}; }
  bool operator==(const ExecutionTrace&) const = default;
};

struct ExecOptions {
  std::uint64_t step_budget = 1000000;
  bool record_path = true;
};

namespace detail {
struct CompiledProgram;
}

class Machine {
 public:
  Machine(const Program& program, const DerivedCfg& derived);
  ~Machine();
  Machine(Machine&&) noexcept;
  Machine& operator=(Machine&&) noexcept;

  // Reuses `out`'s buffers. Never throws on program behavior.
  void execute(std::span<const std::uint8_t> input, std::span<const std::uint8_t> errors,
               const ExecOptions& options, ExecutionTrace& out) const;
  ExecutionTrace execute(std::span<const std::uint8_t> input,
                         std::span<const std::uint8_t> errors,
                         const ExecOptions& options = {}) const;

  std::size_t point_count() const;
  const std::string& point_label(std::uint32_t point) const;
  std::optional<std::uint32_t> find_point(std::string_view label) const;
  std::size_t bug_count() const;
  const std::string& bug_label(std::uint32_t bug) const;
  std::optional<std::uint32_t> find_bug(std::string_view label) const;
  std::uint64_t context_hash(std::uint32_t context) const;
  std::size_t edge_count() const;

  const detail::CompiledProgram& compiled() const { return *code_; }

 private:
  std::unique_ptr<detail::CompiledProgram> code_;
};

// A loaded target: the program, its derived graph and a compiled machine.
class Target {
 public:
  explicit Target(Program program, const DeriveOptions& options = {});
  static Target parse(std::string_view text, const DeriveOptions& options = {});
  static Target load(const std::string& path, const DeriveOptions& options = {});

  const Program& program() const { return program_; }
  const DerivedCfg& derived() const { return derived_; }
  const Cfg& cfg() const { return derived_.cfg; }
  const Machine& machine() const { return machine_; }

 private:
  Program program_;
  DerivedCfg derived_;
  Machine machine_;
};

}  // namespace errfuzz
