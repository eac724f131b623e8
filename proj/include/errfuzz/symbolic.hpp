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

// Concolic tracing: a concrete run that also tracks each register as a
// linear function of the input bytes and records, per conditional edge
// taken, the constraint the input satisfied there.

#include <span>
#include <vector>

#include "errfuzz/constraint.hpp"
#include "errfuzz/vm.hpp"

namespace errfuzz {

struct PathCondition {
  EdgeId edge = kNone;  // kNone for branches inside a summarized call
  ByteConstraint constraint;
};

struct SymbolicTrace {
  ExecutionTrace trace;
  std::vector<PathCondition> conditions;

  ByteConstraint conjunction() const;
};

// Values outside the linear fragment (byte * byte, comparisons fed into
// arithmetic, wrapped overflow) are concretized: the involved bytes are
// pinned to their current values with atoms flagged `concretized`.
// Fallible-call results are concrete for a fixed error sequence.
SymbolicTrace symbolic_trace(const Target& target, std::span<const std::uint8_t> input,
                             std::span<const std::uint8_t> errors = {},
                             const ExecOptions& options = {});

}  // namespace errfuzz
