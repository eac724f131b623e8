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

// Immediate dominators over a small adjacency-list graph (Cooper, Harvey,
// Kennedy iterative scheme). Used on per-function block graphs, which are
// tiny, so the simple algorithm is plenty.

#include <cstdint>
#include <vector>

namespace errfuzz {

inline constexpr std::int32_t kNoDominator = -1;

// idom[root] == root; blocks unreachable from root get kNoDominator.
std::vector<std::int32_t> immediate_dominators(const std::vector<std::vector<std::uint32_t>>& succ,
                                               std::uint32_t root);

// Post-dominators of a graph whose exits are the nodes without successors.
// A virtual exit with index succ.size() is added; it appears in the result
// as the post-dominator of every exit node.
std::vector<std::int32_t> immediate_post_dominators(
    const std::vector<std::vector<std::uint32_t>>& succ);

// True when a dominates b under `idom` (reflexive).
bool dominates(const std::vector<std::int32_t>& idom, std::uint32_t a, std::uint32_t b);

}  // namespace errfuzz
