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

// Grouping of error points that share an ancestor block within k hops.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "errfuzz/cfg.hpp"
#include "errfuzz/extractor.hpp"
#include "json.hpp"

namespace errfuzz {

enum class ClusteringMode : std::uint8_t { Strict, Pivot };

std::string_view to_string(ClusteringMode mode);
ClusteringMode clustering_mode_from(std::string_view name);

// The clustering view of an error point: its label and its block.
struct PointLocation {
  std::string label;
  BlockId block;
};

std::vector<PointLocation> locations(const std::vector<ErrorPoint>& points);

struct Cluster {
  std::uint32_t id = 0;
  std::vector<std::uint32_t> members;  // indices into the clustered points, ascending
  std::vector<std::string> labels;     // parallel to members
  BlockId parent;
  PathSpec common_path;  // shortest entry path to parent

  bool operator==(const Cluster&) const = default;
};

struct ClusterSet {
  std::vector<Cluster> clusters;
  std::uint32_t k = 0;
  ClusteringMode mode = ClusteringMode::Strict;
  std::uint64_t seed = 0;

  // Cluster holding point index `point`.
  std::uint32_t cluster_of(std::uint32_t point) const;
  bool operator==(const ClusterSet&) const = default;
};

// strict: a point joins the pivot's cluster only while the intersection of
// every member's (ancestors within k, plus the member's own block) stays
// non-empty. pivot: the pivot absorbs every same-path point and every point
// whose ancestor set meets its own.
//
// Pivots are drawn from the unvisited points (ascending order) with
// std::mt19937_64(seed). k == 0 yields singletons in point order.
ClusterSet cluster_error_points(const std::vector<PointLocation>& points, const Cfg& cfg,
                                std::uint32_t k, ClusteringMode mode = ClusteringMode::Strict,
                                std::uint64_t seed = 0);

// True when one block reaches the other (a block is on a path with itself).
bool same_path(const Cfg& cfg, BlockId a, BlockId b);

// Longest common prefix of the members' entry paths.
PathSpec longest_common_path(const Cfg& cfg, const Cluster& cluster,
                             const std::vector<ErrorPointPath>& paths);

// Deepest block of a set: greatest distance from entry, then smallest id.
BlockId deepest_block(const Cfg& cfg, const std::vector<BlockId>& blocks);

nlohmann::json to_json(const ClusterSet& set, const Cfg& cfg,
                       const std::vector<ErrorPointPath>& paths = {});

}  // namespace errfuzz
