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

// Campaign matrices (targets x modes x sweep points x repeats) and their
// median summaries, plus the CSV aggregation behind `report`.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errfuzz/campaign.hpp"
#include "json.hpp"

namespace errfuzz {

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;

  // "k=0,1,2"
  static SweepAxis parse(std::string_view text);
};

struct BenchTarget {
  std::string name;
  const Target* target = nullptr;
};

struct BenchConfig {
  CampaignConfig base;
  std::vector<CampaignMode> modes{CampaignMode::HuntFuzz};
  std::vector<SweepAxis> sweeps;
  std::optional<std::filesystem::path> out_dir;  // per-cell CSVs and summaries
  unsigned jobs = 1;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

struct CellSummary {
  std::uint64_t executions = 0;
  std::uint64_t error_sequences = 0;
  std::uint64_t branch_edges = 0;
  std::uint64_t bugs = 0;
  std::uint64_t fault_covered = 0;
  std::map<std::string, std::optional<std::uint64_t>> first_fault;  // by point label
};

struct BenchCell {
  std::string target;
  CampaignMode mode = CampaignMode::HuntFuzz;
  Settings settings;  // sweep values applied on top of the base config
  std::uint32_t repeat = 0;
  std::uint64_t seed = 0;
  CellSummary summary;
  std::string csv;

  // "<mode>[_<key>=<value>...]_r<repeat>"
  std::string id() const;
};

// Repeat r runs with rng seed base.seed + r.
std::vector<BenchCell> run_bench(const std::vector<BenchTarget>& targets, const BenchConfig& config);

// Median of the samples; an even count averages the middle pair.
double median(std::vector<double> values);
// Median where nullopt ranks above every value; nullopt when the median
// falls on (or averages with) a missing entry.
std::optional<double> median_first_cover(std::vector<std::optional<std::uint64_t>> values);

struct BenchRow {
  std::string target;
  std::string group;  // cell id without the repeat suffix
  std::uint32_t repeats = 0;
  double error_sequences = 0;
  double branch_edges = 0;
  double bugs = 0;
  double fault_covered = 0;
  std::map<std::string, std::optional<double>> first_fault;
};

std::vector<BenchRow> aggregate(const std::vector<BenchCell>& cells);

nlohmann::json to_json(const std::vector<BenchRow>& rows);
std::string summary_table(const std::vector<BenchRow>& rows);

// Reads every time-series CSV under `dir` (as laid out by run_bench:
// <target>/<cell id>.csv) and aggregates final rows by target and group.
std::vector<BenchRow> aggregate_csv_dir(const std::filesystem::path& dir);

// Error sequences over executions, one polyline per CSV.
std::string svg_plot(const std::vector<std::pair<std::string, std::vector<Sample>>>& series);

std::vector<Sample> parse_csv(std::string_view text);

}  // namespace errfuzz
