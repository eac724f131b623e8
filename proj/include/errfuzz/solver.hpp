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

#include <cstdint>
#include <span>
#include <vector>

#include "errfuzz/constraint.hpp"

namespace errfuzz {

enum class SolveStatus { Sat, Unsat, Unknown };

struct SolverOptions {
  std::size_t max_len = 4096;
  // Candidate byte assignments tried by the search before giving up.
  std::uint64_t budget = 100000;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  std::vector<std::uint8_t> input;  // set when status == Sat
  std::uint64_t candidates = 0;
};

// Bounds propagation over byte domains [0, 255] followed by a depth-first
// search that branches on the most constrained byte first. Bytes the
// constraint does not mention keep their value from `hint`. A Sat answer is
// re-evaluated against every atom before it is returned.
//
// Unsat is reported only when propagation refutes every branch of a
// complete search; running out of budget yields Unknown.
SolveResult solve(const ByteConstraint& constraint, const SolverOptions& options = {},
                  std::span<const std::uint8_t> hint = {});

}  // namespace errfuzz
