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

// Flat program form executed by Machine, shared by the concrete and the
// symbolic interpreters. Internal to the library.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errfuzz/vm.hpp"

namespace errfuzz::detail {

enum class Op : std::uint8_t { Input, Copy, Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, FCall, Handle, CrashIf };

struct Inst {
  Op op = Op::Copy;
  bool a_imm = false;
  bool b_imm = false;
  std::uint32_t dst = 0;
  std::int64_t a = 0;  // register index or immediate; offset / point / kind
  std::int64_t b = 0;  // register index or immediate; bug index for CrashIf
};

enum class TermKind : std::uint8_t { Jump, Branch, Switch, Ret, Halt, Crash };

struct Segment {
  std::uint32_t begin = 0;  // instruction range
  std::uint32_t end = 0;
  bool is_call = false;
  std::uint32_t callee = 0;
  std::uint32_t call_dst = kNone;
  TermKind term = TermKind::Halt;
  std::uint32_t reg = kNone;  // branch / switch / ret register
  std::uint32_t targets_begin = 0;  // into CompiledFunction::targets
  std::uint32_t targets_end = 0;
  std::uint32_t bug = kNone;
};

struct CompiledFunction {
  std::uint32_t registers = 0;
  std::vector<Inst> code;
  std::vector<Segment> segments;
  std::vector<std::uint32_t> targets;       // target segment indices
  std::vector<std::int64_t> case_values;    // parallel to targets for switches
  std::vector<std::uint32_t> block_segment;  // first segment of each IR block
};

struct PointInfo {
  std::string label;
  std::int64_t ok = 0;
  std::int64_t err = 0;
};

struct CompiledProgram {
  std::vector<CompiledFunction> functions;
  std::uint32_t entry = 0;
  std::vector<PointInfo> points;
  std::vector<std::string> bugs;

  // Per context: derived block of each segment (kNone if never reached).
  std::vector<std::vector<std::uint32_t>> segment_block;
  // Per context: child context entered by the call ending each segment.
  std::vector<std::vector<std::uint32_t>> call_child;
  std::vector<std::uint32_t> summary_block;  // per context, kNone unless truncated
  std::vector<std::uint8_t> truncated;
  std::vector<std::uint64_t> context_hash;

  // Out-edges of each derived block in Cfg order (CSR).
  std::vector<std::uint32_t> out_begin;
  std::vector<EdgeId> out_edges;
  std::size_t edge_count = 0;
};

}  // namespace errfuzz::detail
