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

// Cluster scoring: uncovered-member count against closeness of the
// cluster's common parent to the current execution path.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "errfuzz/cfg.hpp"
#include "errfuzz/clustering.hpp"

namespace errfuzz {

enum class DistanceTerm : std::uint8_t { Proximity, Raw };

std::string_view to_string(DistanceTerm term);
DistanceTerm distance_term_from(std::string_view name);

struct WeightConfig {
  double w1 = 0.5;
  double w2 = 0.5;
  DistanceTerm term = DistanceTerm::Proximity;

  // Rescales so that w1 + w2 == 1. Throws ConfigError on negative weights
  // or a zero sum.
  static WeightConfig normalized(double w1, double w2,
                                 DistanceTerm term = DistanceTerm::Proximity);
};

// Per cluster, one flag per member (parallel to Cluster::members).
using MemberLedger = std::vector<std::vector<std::uint8_t>>;

MemberLedger empty_ledger(const ClusterSet& clusters);

struct ClusterScore {
  std::uint32_t cluster = 0;
  std::uint32_t ep_num = 0;  // uncovered members
  std::optional<std::uint32_t> raw_distance;
  double proximity = 0.0;  // 1 / (1 + raw_distance), 0 when unreachable
  double weight = 0.0;
};

// One score per cluster with an uncovered member, skipping `excluded`
// (sorted ids). With DistanceTerm::Raw the distance itself is weighted,
// unreachable counting as the graph size.
std::vector<ClusterScore> score_clusters(const ClusterSet& clusters, const PathSpec& current,
                                         const MemberLedger& covered, const Cfg& cfg,
                                         const WeightConfig& wc,
                                         const std::vector<std::uint32_t>& excluded = {});

// Highest weight, ties to the smaller cluster id; nullopt for no scores.
std::optional<std::uint32_t> select_next_cluster(const std::vector<ClusterScore>& scores);

}  // namespace errfuzz
