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

#include "errfuzz/campaign.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "errfuzz/error.hpp"
#include "errfuzz/scheduler.hpp"

namespace errfuzz {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty())
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(v) + "'");
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out))
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + s + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false, got '" + std::string(v) +
                    "'");
}

std::uint32_t to_u32(std::string_view key, std::string_view v) {
  const auto x = to_uint(key, v);
  if (x > UINT32_MAX) throw ConfigError("'" + std::string(key) + "' is out of range");
  return static_cast<std::uint32_t>(x);
}

}  // namespace

std::string_view to_string(CampaignMode mode) {
  switch (mode) {
    case CampaignMode::HuntFuzz: return "huntfuzz";
    case CampaignMode::BaselineK0: return "baseline-k0";
    case CampaignMode::NoConcolic: return "no-concolic";
  }
  return "?";
}

CampaignMode campaign_mode_from(std::string_view name) {
  if (name == "huntfuzz") return CampaignMode::HuntFuzz;
  if (name == "baseline-k0") return CampaignMode::BaselineK0;
  if (name == "no-concolic") return CampaignMode::NoConcolic;
  throw ConfigError("mode must be huntfuzz, baseline-k0 or no-concolic, got '" +
                    std::string(name) + "'");
}

Budget Budget::parse(std::string_view text) {
  const std::string t = trim(text);
  std::string_view v = t;
  Budget b;
  if (v.size() > 5 && v.substr(v.size() - 5) == "execs") {
    b.executions = to_uint("budget", v.substr(0, v.size() - 5));
  } else if (v.size() > 1 && v.back() == 's') {
    b.seconds = to_real("budget", v.substr(0, v.size() - 1));
    if (*b.seconds <= 0) throw ConfigError("budget must be positive");
  } else {
    b.executions = to_uint("budget", v);
  }
  if (!b.seconds && b.executions == 0) throw ConfigError("budget must be positive");
  return b;
}

std::string Budget::str() const {
  if (seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%gs", *seconds);
    return buf;
  }
  return std::to_string(executions) + "execs";
}

void CampaignConfig::check() const {
  if (mutate_threshold < 1) throw ConfigError("mutate-threshold must be at least 1");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (sample_every < 1) throw ConfigError("sample-every must be at least 1");
  if (max_len < 1) throw ConfigError("max-len must be at least 1");
  WeightConfig::normalized(w1, w2, distance);
}

const std::vector<std::string>& campaign_keys() {
  static const std::vector<std::string> keys = {
      "mode",         "k",           "w1",          "w2",
      "mutate-threshold", "clustering-mode", "distance-term", "budget",
      "seed",         "repeats",     "context-insensitive", "record-wall-time",
      "concolic-cost", "sample-every", "max-len",   "energy-concolic",
      "energy-new-edges", "energy-other"};
  return keys;
}

void apply_setting(CampaignConfig& c, std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  if (key == "mode") c.mode = campaign_mode_from(value);
  else if (key == "k") c.k = to_u32(key, value);
  else if (key == "w1") c.w1 = to_real(key, value);
  else if (key == "w2") c.w2 = to_real(key, value);
  else if (key == "mutate-threshold") c.mutate_threshold = to_u32(key, value);
  else if (key == "clustering-mode") c.clustering = clustering_mode_from(value);
  else if (key == "distance-term") c.distance = distance_term_from(value);
  else if (key == "budget") c.budget = Budget::parse(value);
  else if (key == "seed") c.seed = to_uint(key, value);
  else if (key == "repeats") c.repeats = to_u32(key, value);
  else if (key == "context-insensitive") c.context_insensitive = to_bool(key, value);
  else if (key == "record-wall-time") c.record_wall_time = to_bool(key, value);
  else if (key == "concolic-cost") c.concolic_cost = to_uint(key, value);
  else if (key == "sample-every") c.sample_every = to_uint(key, value);
  else if (key == "max-len") c.max_len = to_uint(key, value);
  else if (key == "energy-concolic") c.energy.concolic = to_u32(key, value);
  else if (key == "energy-new-edges") c.energy.new_edges = to_u32(key, value);
  else if (key == "energy-other") c.energy.other = to_u32(key, value);
  else throw ConfigError("unknown setting '" + std::string(key) + "'");
}

std::map<std::string, std::string> parse_config_file(std::string_view text) {
  std::map<std::string, std::string> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, 1, "expected 'key = value'");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ParseError(line_no, 1, "empty key");
    out[key] = value;
  }
  return out;
}

CampaignResult run_campaign(const Target& target, const CampaignConfig& config,
                            const Overrides& overrides, std::vector<Seed> seeds) {
  config.check();
  CampaignResult out;
  FuzzConfig fc;
  fc.executions = config.budget.executions;
  fc.seconds = config.budget.seconds;
  fc.rng_seed = config.seed;
  fc.max_len = config.max_len;
  fc.sample_every = config.sample_every;
  fc.energy = config.energy;
  fc.context_insensitive = config.context_insensitive;
  fc.record_wall_time = config.record_wall_time;
  fc.concolic_cost = config.concolic_cost;

  out.points = realistic_points(extract_error_points(target, overrides));
  if (config.mode == CampaignMode::NoConcolic) {
    out.fuzz = fuzz_loop(target, std::move(seeds), fc);
    return out;
  }
  out.clusters = cluster_error_points(locations(out.points), target.cfg(), config.effective_k(),
                                      config.clustering, config.seed);
  SchedulerConfig sc;
  sc.mutate_threshold = config.mutate_threshold;
  sc.weights = WeightConfig::normalized(config.w1, config.w2, config.distance);
  Scheduler scheduler(*out.clusters, target.cfg(), target.machine(),
                      Scheduler::point_indices(*out.clusters, target.machine()), sc);
  out.fuzz = fuzz_loop(target, std::move(seeds), fc, &scheduler);
  out.decision_log = scheduler.decision_log();
  out.unsolvable = scheduler.unsolvable().size();
  return out;
}

nlohmann::json summary_json(const Target& target, const CampaignConfig& config,
                            const CampaignResult& result) {
  const auto& f = result.fuzz;
  nlohmann::json first = nlohmann::json::object();
  for (std::uint32_t p = 0; p < f.ledger.first_fault.size(); ++p)
    first[target.machine().point_label(p)] =
        f.ledger.first_fault[p] ? nlohmann::json(*f.ledger.first_fault[p]) : nlohmann::json(nullptr);
  return {{"mode", to_string(config.mode)},
          {"k", config.effective_k()},
          {"seed", config.seed},
          {"budget", config.budget.str()},
          {"executions", f.executions},
          {"runs", f.runs},
          {"solves", f.solves},
          {"branch_edges", f.ledger.branch_edges},
          {"error_sequences", f.ledger.sequences.size()},
          {"bugs", f.bugs.size()},
          {"fault_covered_points", f.ledger.fault_covered_points()},
          {"realistic_points", result.points.size()},
          {"clusters", result.clusters ? result.clusters->clusters.size() : 0},
          {"unsolvable_clusters", result.unsolvable},
          {"first_fault", first}};
}

}  // namespace errfuzz
