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

#include "errfuzz/weighting.hpp"

#include <algorithm>

#include "errfuzz/error.hpp"

namespace errfuzz {

std::string_view to_string(DistanceTerm term) {
  return term == DistanceTerm::Proximity ? "proximity" : "raw";
}

DistanceTerm distance_term_from(std::string_view name) {
  if (name == "proximity") return DistanceTerm::Proximity;
  if (name == "raw") return DistanceTerm::Raw;
  throw ConfigError("distance term must be 'proximity' or 'raw', got '" + std::string(name) + "'");
}

WeightConfig WeightConfig::normalized(double w1, double w2, DistanceTerm term) {
  if (w1 < 0 || w2 < 0) throw ConfigError("weights must be non-negative");
  const double sum = w1 + w2;
  if (sum <= 0) throw ConfigError("weights must not both be zero");
  return WeightConfig{w1 / sum, w2 / sum, term};
}

MemberLedger empty_ledger(const ClusterSet& clusters) {
  MemberLedger out;
  for (const auto& c : clusters.clusters) out.emplace_back(c.members.size(), 0);
  return out;
}

std::vector<ClusterScore> score_clusters(const ClusterSet& clusters, const PathSpec& current,
                                         const MemberLedger& covered, const Cfg& cfg,
                                         const WeightConfig& wc,
                                         const std::vector<std::uint32_t>& excluded) {
  std::vector<ClusterScore> out;
  std::vector<std::optional<std::uint32_t>> dist(cfg.size());
  if (!current.blocks.empty()) dist = distances_from(cfg, current.blocks);
  std::uint32_t max_ep = 0;
  for (const auto& c : clusters.clusters) {
    if (std::binary_search(excluded.begin(), excluded.end(), c.id)) continue;
    ClusterScore s;
    s.cluster = c.id;
    for (auto flag : covered.at(c.id)) s.ep_num += flag ? 0 : 1;
    if (s.ep_num == 0) continue;
    s.raw_distance = dist[c.parent.value];
    s.proximity = s.raw_distance ? 1.0 / (1.0 + *s.raw_distance) : 0.0;
    max_ep = std::max(max_ep, s.ep_num);
    out.push_back(s);
  }
  for (auto& s : out) {
    const double size_term = static_cast<double>(s.ep_num) / max_ep;
    const double distance_term =
        wc.term == DistanceTerm::Proximity
            ? s.proximity
            : static_cast<double>(s.raw_distance.value_or(static_cast<std::uint32_t>(cfg.size())));
    s.weight = wc.w1 * size_term + wc.w2 * distance_term;
  }
  return out;
}

std::optional<std::uint32_t> select_next_cluster(const std::vector<ClusterScore>& scores) {
  const ClusterScore* best = nullptr;
  for (const auto& s : scores)
    if (!best || s.weight > best->weight || (s.weight == best->weight && s.cluster < best->cluster))
      best = &s;
  if (!best) return std::nullopt;
  return best->cluster;
}

}  // namespace errfuzz
