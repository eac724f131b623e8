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

// One fuzzing campaign end to end: extraction, clustering, the scheduler
// (unless detached) and the fuzz loop, driven by a flat key=value config.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errfuzz/clustering.hpp"
#include "errfuzz/extractor.hpp"
#include "errfuzz/fuzzer.hpp"
#include "errfuzz/weighting.hpp"

namespace errfuzz {

enum class CampaignMode : std::uint8_t { HuntFuzz, BaselineK0, NoConcolic };

std::string_view to_string(CampaignMode mode);
CampaignMode campaign_mode_from(std::string_view name);

struct Budget {
  std::uint64_t executions = 100000;
  std::optional<double> seconds;

  // "<N>execs", "<N>" or "<S>s".
  static Budget parse(std::string_view text);
  std::string str() const;
};

struct CampaignConfig {
  CampaignMode mode = CampaignMode::HuntFuzz;
  std::uint32_t k = 2;
  double w1 = 0.5;
  double w2 = 0.5;
  std::uint32_t mutate_threshold = 10000;
  ClusteringMode clustering = ClusteringMode::Strict;
  DistanceTerm distance = DistanceTerm::Proximity;
  Budget budget;
  std::uint64_t seed = 0;
  std::uint32_t repeats = 1;
  bool context_insensitive = false;
  bool record_wall_time = false;
  std::uint64_t concolic_cost = 1000;
  std::uint64_t sample_every = 100;
  std::size_t max_len = 4096;
  EnergyConfig energy;

  // k actually used for clustering (0 in baseline-k0 mode).
  std::uint32_t effective_k() const { return mode == CampaignMode::BaselineK0 ? 0 : k; }
  // Throws ConfigError on out-of-range values.
  void check() const;
};

// Sets one field by its flag name (without dashes), e.g. "mutate-threshold".
// Throws ConfigError for unknown keys or bad values.
void apply_setting(CampaignConfig& config, std::string_view key, std::string_view value);

// Keys the campaign config understands.
const std::vector<std::string>& campaign_keys();

// `key = value` lines, `#` comments. Unknown keys are returned rather than
// rejected so callers can accept their own (target, out, sweep, ...).
std::map<std::string, std::string> parse_config_file(std::string_view text);

struct CampaignResult {
  FuzzResult fuzz;
  std::vector<ErrorPoint> points;  // realistic points, in clustering order
  std::optional<ClusterSet> clusters;
  std::string decision_log;
  std::size_t unsolvable = 0;
};

CampaignResult run_campaign(const Target& target, const CampaignConfig& config,
                            const Overrides& overrides = {}, std::vector<Seed> seeds = {});

nlohmann::json summary_json(const Target& target, const CampaignConfig& config,
                            const CampaignResult& result);

}  // namespace errfuzz
