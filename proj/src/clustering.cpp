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

#include "errfuzz/clustering.hpp"

#include <algorithm>
#include <random>

#include "errfuzz/error.hpp"

namespace errfuzz {

std::string_view to_string(ClusteringMode mode) {
  return mode == ClusteringMode::Strict ? "strict" : "pivot";
}

ClusteringMode clustering_mode_from(std::string_view name) {
  if (name == "strict") return ClusteringMode::Strict;
  if (name == "pivot") return ClusteringMode::Pivot;
  throw ConfigError("clustering mode must be 'strict' or 'pivot', got '" + std::string(name) + "'");
}

std::vector<PointLocation> locations(const std::vector<ErrorPoint>& points) {
  std::vector<PointLocation> out;
  for (const auto& p : points) {
    if (!p.primary) throw GraphError("error point '" + p.label + "' is not located in the graph");
    out.push_back({p.label, *p.primary});
  }
  return out;
}

std::uint32_t ClusterSet::cluster_of(std::uint32_t point) const {
  for (const auto& c : clusters)
    if (std::binary_search(c.members.begin(), c.members.end(), point)) return c.id;
  throw Error("point " + std::to_string(point) + " is in no cluster");
}

bool same_path(const Cfg& cfg, BlockId a, BlockId b) {
  return reaches(cfg, a, b) || reaches(cfg, b, a);
}

BlockId deepest_block(const Cfg& cfg, const std::vector<BlockId>& blocks) {
  const auto dist = distances_from(cfg, cfg.entry());
  BlockId best = blocks.at(0);
  for (BlockId b : blocks) {
    const auto db = dist[b.value].value_or(0);
    const auto dbest = dist[best.value].value_or(0);
    if (db > dbest || (db == dbest && b < best)) best = b;
  }
  return best;
}

namespace {

using BlockSet = std::vector<BlockId>;  // sorted

BlockSet intersect(const BlockSet& a, const BlockSet& b) {
  BlockSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool meets(const BlockSet& a, const BlockSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

}  // namespace

ClusterSet cluster_error_points(const std::vector<PointLocation>& points, const Cfg& cfg,
                                std::uint32_t k, ClusteringMode mode, std::uint64_t seed) {
  ClusterSet out;
  out.k = k;
  out.mode = mode;
  out.seed = seed;
  const auto n = static_cast<std::uint32_t>(points.size());
  for (const auto& p : points) cfg.require(p.block);

  auto finish = [&](std::vector<std::uint32_t> members, BlockId parent) {
    std::sort(members.begin(), members.end());
    Cluster c;
    c.id = static_cast<std::uint32_t>(out.clusters.size());
    for (auto m : members) c.labels.push_back(points[m].label);
    c.members = std::move(members);
    c.parent = parent;
    c.common_path = *shortest_entry_path(cfg, parent);
    out.clusters.push_back(std::move(c));
  };

  if (k == 0) {
    for (std::uint32_t i = 0; i < n; ++i) finish({i}, points[i].block);
    return out;
  }

  std::vector<BlockSet> bbk(n), ext(n);
  std::vector<std::vector<std::optional<std::uint32_t>>> reach(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    bbk[i] = k_hop_ancestors(cfg, points[i].block, k);
    ext[i] = bbk[i];
    ext[i].insert(std::lower_bound(ext[i].begin(), ext[i].end(), points[i].block), points[i].block);
    reach[i] = distances_from(cfg, points[i].block);
  }
  auto on_same_path = [&](std::uint32_t a, std::uint32_t b) {
    return reach[a][points[b].block.value].has_value() ||
           reach[b][points[a].block.value].has_value();
  };

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> unvisited(n);
  for (std::uint32_t i = 0; i < n; ++i) unvisited[i] = i;

  while (!unvisited.empty()) {
    const std::size_t pick = rng() % unvisited.size();
    const std::uint32_t pivot = unvisited[pick];
    unvisited.erase(unvisited.begin() + static_cast<std::ptrdiff_t>(pick));

    std::vector<std::uint32_t> members{pivot};
    BlockSet common_ext = ext[pivot];
    BlockSet common_bbk = bbk[pivot];
    auto absorb = [&](auto&& accept) {
      for (auto it = unvisited.begin(); it != unvisited.end();) {
        if (!accept(*it)) {
          ++it;
          continue;
        }
        if (mode == ClusteringMode::Strict) common_ext = intersect(common_ext, ext[*it]);
        common_bbk = intersect(common_bbk, bbk[*it]);
        members.push_back(*it);
        it = unvisited.erase(it);
      }
    };
    // Same-path points first, then points sharing an ancestor with the pivot.
    if (mode == ClusteringMode::Strict) {
      absorb([&](std::uint32_t j) {
        return on_same_path(pivot, j) && meets(common_ext, ext[j]);
      });
      absorb([&](std::uint32_t j) { return meets(bbk[pivot], bbk[j]) && meets(common_ext, ext[j]); });
    } else {
      absorb([&](std::uint32_t j) { return on_same_path(pivot, j); });
      absorb([&](std::uint32_t j) { return meets(bbk[pivot], bbk[j]); });
    }

    BlockId parent;
    if (!common_bbk.empty()) {
      parent = deepest_block(cfg, common_bbk);
    } else if (mode == ClusteringMode::Strict) {
      parent = deepest_block(cfg, common_ext);
    } else {
      BlockSet all = ext[members[0]];
      for (auto m : members) all = intersect(all, ext[m]);
      if (!all.empty()) {
        parent = deepest_block(cfg, all);
      } else {
        // Nothing within k is shared; fall back to the end of the longest
        // common entry prefix.
        std::vector<PathSpec> paths;
        for (auto m : members) paths.push_back(*shortest_entry_path(cfg, points[m].block));
        std::size_t len = paths[0].blocks.size();
        for (const auto& p : paths) {
          std::size_t i = 0;
          while (i < len && i < p.blocks.size() && p.blocks[i] == paths[0].blocks[i]) ++i;
          len = i;
        }
        parent = paths[0].blocks[len - 1];
      }
    }
    finish(std::move(members), parent);
  }
  return out;
}

PathSpec longest_common_path(const Cfg& cfg, const Cluster& cluster,
                             const std::vector<ErrorPointPath>& paths) {
  std::vector<const PathSpec*> member_paths;
  for (const auto& label : cluster.labels) {
    auto it = std::find_if(paths.begin(), paths.end(),
                           [&](const ErrorPointPath& p) { return p.point == label; });
    if (it == paths.end() || !it->path)
      throw GraphError("no entry path for cluster member '" + label + "'");
    member_paths.push_back(&*it->path);
  }
  PathSpec out{{cfg.entry()}};
  if (member_paths.empty()) return out;
  out = *member_paths[0];
  for (const PathSpec* p : member_paths) {
    std::size_t i = 0;
    while (i < out.blocks.size() && i < p->blocks.size() && out.blocks[i] == p->blocks[i]) ++i;
    out.blocks.resize(std::max<std::size_t>(i, 1));
  }
  return out;
}

nlohmann::json to_json(const ClusterSet& set, const Cfg& cfg,
                       const std::vector<ErrorPointPath>& paths) {
  auto names = [&](const PathSpec& p) {
    nlohmann::json a = nlohmann::json::array();
    for (BlockId b : p.blocks) a.push_back(cfg.name(b));
    return a;
  };
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : set.clusters) {
    nlohmann::json j = {{"id", c.id},
                        {"members", c.labels},
                        {"parent", cfg.name(c.parent)},
                        {"common_path", names(c.common_path)}};
    if (!paths.empty()) j["longest_common_path"] = names(longest_common_path(cfg, c, paths));
    clusters.push_back(std::move(j));
  }
  return {{"k", set.k},
          {"mode", std::string(to_string(set.mode))},
          {"seed", set.seed},
          {"clusters", clusters}};
}

}  // namespace errfuzz
