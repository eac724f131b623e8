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

#include "errfuzz/dominators.hpp"

#include <algorithm>

namespace errfuzz {

std::vector<std::int32_t> immediate_dominators(const std::vector<std::vector<std::uint32_t>>& succ,
                                               std::uint32_t root) {
  const std::size_t n = succ.size();
  // Reverse postorder from root.
  std::vector<std::uint32_t> order;
  std::vector<std::int32_t> rpo_index(n, -1);
  {
    std::vector<std::uint8_t> state(n, 0);
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < succ[node].size()) {
        const std::uint32_t s = succ[node][next++];
        if (!state[s]) {
          state[s] = 1;
          stack.emplace_back(s, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
    std::reverse(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) rpo_index[order[i]] = static_cast<std::int32_t>(i);
  }
  std::vector<std::vector<std::uint32_t>> pred(n);
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b : succ[a])
      if (rpo_index[a] >= 0) pred[b].push_back(a);

  std::vector<std::int32_t> idom(n, kNoDominator);
  idom[root] = static_cast<std::int32_t>(root);
  auto intersect = [&](std::int32_t a, std::int32_t b) {
    while (a != b) {
      while (rpo_index[a] > rpo_index[b]) a = idom[a];
      while (rpo_index[b] > rpo_index[a]) b = idom[b];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 1; i < order.size(); ++i) {
      const std::uint32_t b = order[i];
      std::int32_t new_idom = kNoDominator;
      for (std::uint32_t p : pred[b]) {
        if (idom[p] == kNoDominator) continue;
        new_idom = new_idom == kNoDominator ? static_cast<std::int32_t>(p)
                                            : intersect(static_cast<std::int32_t>(p), new_idom);
      }
      if (idom[b] != new_idom) {
        idom[b] = new_idom;
        changed = true;
      }
    }
  }
  return idom;
}

std::vector<std::int32_t> immediate_post_dominators(
    const std::vector<std::vector<std::uint32_t>>& succ) {
  const auto n = static_cast<std::uint32_t>(succ.size());
  std::vector<std::vector<std::uint32_t>> rev(n + 1);
  for (std::uint32_t a = 0; a < n; ++a) {
    if (succ[a].empty()) rev[n].push_back(a);
    for (std::uint32_t b : succ[a]) rev[b].push_back(a);
  }
  return immediate_dominators(rev, n);
}

bool dominates(const std::vector<std::int32_t>& idom, std::uint32_t a, std::uint32_t b) {
  if (idom[b] == kNoDominator) return false;
  std::uint32_t cur = b;
  for (;;) {
    if (cur == a) return true;
    const auto up = static_cast<std::uint32_t>(idom[cur]);
    if (up == cur) return false;
    cur = up;
  }
}

}  // namespace errfuzz
