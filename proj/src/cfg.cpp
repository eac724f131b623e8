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

#include "errfuzz/cfg.hpp"

#include <algorithm>
#include <deque>

#include "errfuzz/error.hpp"
#include "errfuzz/solver.hpp"

namespace errfuzz {

const std::string& Cfg::name(BlockId b) const {
  require(b);
  return names_[b.value];
}

std::optional<BlockId> Cfg::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

BlockId Cfg::at(std::string_view name) const {
  auto b = find(name);
  if (!b) throw GraphError("unknown block '" + std::string(name) + "'");
  return *b;
}

std::span<const EdgeId> Cfg::out_edges(BlockId b) const {
  require(b);
  return out_[b.value];
}

std::span<const EdgeId> Cfg::in_edges(BlockId b) const {
  require(b);
  return in_[b.value];
}

std::optional<EdgeId> Cfg::find_edge(BlockId from, BlockId to) const {
  for (EdgeId e : out_edges(from))
    if (edges_[e].to == to) return e;
  return std::nullopt;
}

void Cfg::require(BlockId b) const {
  if (!contains(b))
    throw GraphError("block id " + std::to_string(b.value) + " is not in the graph (size " +
                     std::to_string(size()) + ")");
}

std::string Cfg::describe(const PathSpec& path) const {
  std::string out = "[";
  for (std::size_t i = 0; i < path.blocks.size(); ++i) {
    if (i) out += ", ";
    out += name(path.blocks[i]);
  }
  return out + "]";
}

BlockId CfgBuilder::add_block(std::string name) {
  if (auto existing = graph_.find(name)) return *existing;
  BlockId id{static_cast<std::uint32_t>(graph_.names_.size())};
  graph_.by_name_.emplace(name, id);
  graph_.names_.push_back(std::move(name));
  graph_.out_.emplace_back();
  graph_.in_.emplace_back();
  return id;
}

void CfgBuilder::add_edge(BlockId from, BlockId to, std::optional<EdgePredicate> predicate) {
  graph_.require(from);
  graph_.require(to);
  if (graph_.find_edge(from, to))
    throw ValidationError("duplicate edge " + graph_.name(from) + " -> " + graph_.name(to));
  const auto id = static_cast<EdgeId>(graph_.edges_.size());
  graph_.edges_.push_back({from, to, std::move(predicate)});
  graph_.out_[from.value].push_back(id);
  graph_.in_[to.value].push_back(id);
}

void CfgBuilder::set_entry(BlockId b) {
  graph_.require(b);
  if (has_entry_ && graph_.entry_ != b)
    throw ValidationError("multiple entry blocks: '" + graph_.name(graph_.entry_) + "' and '" +
                          graph_.name(b) + "'");
  graph_.entry_ = b;
  has_entry_ = true;
}

Cfg CfgBuilder::build() && {
  if (graph_.names_.empty()) throw ValidationError("graph has no blocks");
  if (!has_entry_) throw ValidationError("graph has no entry block");
  const auto dist = distances_from(graph_, graph_.entry_);
  for (std::size_t b = 0; b < dist.size(); ++b)
    if (!dist[b])
      throw ValidationError("block '" + graph_.names_[b] + "' is unreachable from entry");

  // Sibling predicates of a fully labeled conditional block must exclude
  // each other; a satisfiable conjunction is rejected.
  for (std::size_t b = 0; b < graph_.size(); ++b) {
    const auto& outs = graph_.out_[b];
    if (outs.size() < 2) continue;
    const bool all_labeled = std::all_of(outs.begin(), outs.end(), [&](EdgeId e) {
      return graph_.edges_[e].predicate.has_value();
    });
    if (!all_labeled) continue;
    for (std::size_t i = 0; i < outs.size(); ++i) {
      for (std::size_t j = i + 1; j < outs.size(); ++j) {
        ByteConstraint both = graph_.edges_[outs[i]].predicate->constraint;
        both.conjoin(graph_.edges_[outs[j]].predicate->constraint);
        SolverOptions opts;
        opts.budget = 10000;
        if (solve(both, opts).status == SolveStatus::Sat)
          throw ValidationError("out-edges of '" + graph_.names_[b] +
                                "' carry overlapping predicates " +
                                graph_.edges_[outs[i]].predicate->id + " and " +
                                graph_.edges_[outs[j]].predicate->id);
      }
    }
  }
  return std::move(graph_);
}

std::vector<BlockId> k_hop_ancestors(const Cfg& cfg, BlockId b, std::uint32_t k) {
  cfg.require(b);
  std::vector<std::uint32_t> depth(cfg.size(), UINT32_MAX);
  std::deque<BlockId> queue{b};
  depth[b.value] = 0;
  std::vector<BlockId> out;
  while (!queue.empty()) {
    const BlockId cur = queue.front();
    queue.pop_front();
    if (depth[cur.value] == k) continue;
    for (EdgeId e : cfg.in_edges(cur)) {
      const BlockId pred = cfg.edge(e).from;
      if (depth[pred.value] != UINT32_MAX) continue;
      depth[pred.value] = depth[cur.value] + 1;
      out.push_back(pred);
      queue.push_back(pred);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::optional<std::uint32_t>> distances_from(const Cfg& cfg,
                                                         std::span<const BlockId> sources) {
  std::vector<std::optional<std::uint32_t>> dist(cfg.size());
  std::deque<BlockId> queue;
  for (BlockId s : sources) {
    cfg.require(s);
    if (dist[s.value]) continue;
    dist[s.value] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const BlockId cur = queue.front();
    queue.pop_front();
    for (EdgeId e : cfg.out_edges(cur)) {
      const BlockId next = cfg.edge(e).to;
      if (dist[next.value]) continue;
      dist[next.value] = *dist[cur.value] + 1;
      queue.push_back(next);
    }
  }
  return dist;
}

std::vector<std::optional<std::uint32_t>> distances_from(const Cfg& cfg, BlockId from) {
  return distances_from(cfg, std::span<const BlockId>(&from, 1));
}

std::optional<std::uint32_t> shortest_distance(const Cfg& cfg, BlockId from, BlockId to) {
  cfg.require(to);
  return distances_from(cfg, from)[to.value];
}

void validate_path(const Cfg& cfg, const PathSpec& path) {
  if (path.blocks.empty()) throw GraphError("empty path");
  if (path.blocks.front() != cfg.entry())
    throw GraphError("path does not start at entry '" + cfg.name(cfg.entry()) + "'");
  for (std::size_t i = 0; i + 1 < path.blocks.size(); ++i)
    if (!cfg.find_edge(path.blocks[i], path.blocks[i + 1]))
      throw GraphError("path step " + cfg.name(path.blocks[i]) + " -> " +
                       cfg.name(path.blocks[i + 1]) + " is not an edge");
}

std::optional<std::uint32_t> path_distance(const Cfg& cfg, const PathSpec& path,
                                           BlockId target) {
  validate_path(cfg, path);
  cfg.require(target);
  return distances_from(cfg, path.blocks)[target.value];
}

bool reaches(const Cfg& cfg, BlockId from, BlockId to) {
  return shortest_distance(cfg, from, to).has_value();
}

std::optional<PathSpec> shortest_entry_path(const Cfg& cfg, BlockId target) {
  cfg.require(target);
  const auto from_entry = distances_from(cfg, cfg.entry());
  if (!from_entry[target.value]) return std::nullopt;
  // Reverse BFS gives the remaining distance to the target from any block.
  std::vector<std::optional<std::uint32_t>> to_target(cfg.size());
  std::deque<BlockId> queue{target};
  to_target[target.value] = 0;
  while (!queue.empty()) {
    const BlockId cur = queue.front();
    queue.pop_front();
    for (EdgeId e : cfg.in_edges(cur)) {
      const BlockId prev = cfg.edge(e).from;
      if (to_target[prev.value]) continue;
      to_target[prev.value] = *to_target[cur.value] + 1;
      queue.push_back(prev);
    }
  }
  const std::uint32_t len = *from_entry[target.value];
  PathSpec path;
  path.blocks.push_back(cfg.entry());
  BlockId cur = cfg.entry();
  for (std::uint32_t step = 1; step <= len; ++step) {
    std::optional<BlockId> best;
    for (EdgeId e : cfg.out_edges(cur)) {
      const BlockId next = cfg.edge(e).to;
      if (from_entry[next.value] != step || to_target[next.value] != len - step) continue;
      if (!best || next < *best) best = next;
    }
    cur = *best;
    path.blocks.push_back(cur);
  }
  return path;
}

ByteConstraint path_constraints(const Cfg& cfg, const PathSpec& path) {
  ByteConstraint out;
  for (std::size_t i = 0; i + 1 < path.blocks.size(); ++i) {
    auto e = cfg.find_edge(path.blocks[i], path.blocks[i + 1]);
    if (!e)
      throw GraphError("path step " + cfg.name(path.blocks[i]) + " -> " +
                       cfg.name(path.blocks[i + 1]) + " is not an edge");
    if (const auto& pred = cfg.edge(*e).predicate) out.conjoin(pred->constraint);
  }
  return out;
}

std::vector<std::string> path_predicate_ids(const Cfg& cfg, const PathSpec& path) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i + 1 < path.blocks.size(); ++i) {
    auto e = cfg.find_edge(path.blocks[i], path.blocks[i + 1]);
    if (!e) throw GraphError("path is not a walk in the graph");
    if (const auto& pred = cfg.edge(*e).predicate) ids.push_back(pred->id);
  }
  return ids;
}

}  // namespace errfuzz
