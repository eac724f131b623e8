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

// Control-flow graph with predicate-labeled edges.
//
// A Cfg is built once through CfgBuilder and is immutable afterwards; every
// analysis below is a pure query, so one graph can be shared freely between
// the fuzzer and the scheduler.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "errfuzz/constraint.hpp"

namespace errfuzz {

struct BlockId {
  std::uint32_t value = 0;

  auto operator<=>(const BlockId&) const = default;
};

using EdgeId = std::uint32_t;

struct EdgePredicate {
  std::string id;  // e.g. "c1"
  ByteConstraint constraint;

  bool operator==(const EdgePredicate&) const = default;
};

struct Edge {
  BlockId from;
  BlockId to;
  std::optional<EdgePredicate> predicate;
};

// Ordered block list starting at the entry block.
struct PathSpec {
  std::vector<BlockId> blocks;

  bool operator==(const PathSpec&) const = default;
};

class Cfg {
 public:
  std::size_t size() const { return names_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  BlockId entry() const { return entry_; }

  bool contains(BlockId b) const { return b.value < names_.size(); }
  const std::string& name(BlockId b) const;
  std::optional<BlockId> find(std::string_view name) const;
  // Like find() but throws GraphError for unknown names.
  BlockId at(std::string_view name) const;

  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const EdgeId> out_edges(BlockId b) const;
  std::span<const EdgeId> in_edges(BlockId b) const;
  std::optional<EdgeId> find_edge(BlockId from, BlockId to) const;

  // Throws GraphError when `b` is not a block of this graph.
  void require(BlockId b) const;

  std::string describe(const PathSpec& path) const;

 private:
  friend class CfgBuilder;

  std::vector<std::string> names_;
  std::unordered_map<std::string, BlockId> by_name_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
  BlockId entry_;
};

class CfgBuilder {
 public:
  // Returns the existing id when the name was already added.
  BlockId add_block(std::string name);
  void add_edge(BlockId from, BlockId to, std::optional<EdgePredicate> predicate = {});
  void set_entry(BlockId b);
  std::size_t size() const { return graph_.names_.size(); }
  std::optional<BlockId> find(std::string_view name) const { return graph_.find(name); }

  // Validates the graph: entry set, every block reachable from entry, at
  // most one edge per ordered pair, and sibling predicates pairwise
  // exclusive. Violations throw ValidationError.
  Cfg build() &&;

 private:
  Cfg graph_;
  bool has_entry_ = false;
};

// Blocks reachable from `b` over 1..k reverse edges, excluding `b` itself.
// Sorted by id.
std::vector<BlockId> k_hop_ancestors(const Cfg& cfg, BlockId b, std::uint32_t k);

std::optional<std::uint32_t> shortest_distance(const Cfg& cfg, BlockId from, BlockId to);

// Edge-hop distance from `from` to every block; nullopt marks unreachable.
std::vector<std::optional<std::uint32_t>> distances_from(const Cfg& cfg, BlockId from);

// Multi-source variant: distance from the nearest block of `sources`.
std::vector<std::optional<std::uint32_t>> distances_from(const Cfg& cfg,
                                                         std::span<const BlockId> sources);

// Throws GraphError unless the path starts at entry and follows edges.
void validate_path(const Cfg& cfg, const PathSpec& path);

// Minimum over path blocks p of shortest_distance(p, target).
std::optional<std::uint32_t> path_distance(const Cfg& cfg, const PathSpec& path,
                                           BlockId target);

// True when `to` is reachable from `from` (a block reaches itself).
bool reaches(const Cfg& cfg, BlockId from, BlockId to);

// Shortest entry -> target path; among equally short paths the
// lexicographically smallest id sequence. nullopt when unreachable.
std::optional<PathSpec> shortest_entry_path(const Cfg& cfg, BlockId target);

// Conjunction of edge predicates along the path (unlabeled edges add nothing).
ByteConstraint path_constraints(const Cfg& cfg, const PathSpec& path);

// Edge predicate ids along the path, in order.
std::vector<std::string> path_predicate_ids(const Cfg& cfg, const PathSpec& path);

}  // namespace errfuzz

template <>
struct std::hash<errfuzz::BlockId> {
  std::size_t operator()(const errfuzz::BlockId& b) const noexcept {
    return std::hash<std::uint32_t>{}(b.value);
  }
};
