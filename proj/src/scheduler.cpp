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

#include "errfuzz/scheduler.hpp"

#include <algorithm>

#include "errfuzz/error.hpp"

namespace errfuzz {

std::string_view to_string(SchedulerPhase phase) {
  switch (phase) {
    case SchedulerPhase::Idle: return "idle";
    case SchedulerPhase::Awaiting: return "awaiting";
    case SchedulerPhase::Done: return "done";
  }
  return "?";
}

Scheduler::Scheduler(const ClusterSet& clusters, const Cfg& cfg, const Machine& machine,
                     std::vector<std::uint32_t> points, SchedulerConfig config)
    : clusters_(clusters),
      cfg_(cfg),
      machine_(machine),
      points_(std::move(points)),
      config_(config),
      owners_(machine.point_count()),
      ledger_(empty_ledger(clusters)) {
  if (config_.mutate_threshold < 1) throw ConfigError("mutate threshold must be at least 1");
  for (const auto& c : clusters_.clusters) {
    for (std::uint32_t slot = 0; slot < c.members.size(); ++slot) {
      const auto member = c.members[slot];
      if (member >= points_.size() || points_[member] >= owners_.size())
        throw GraphError("cluster " + std::to_string(c.id) + " member " +
                         std::to_string(member) + " has no machine point");
      owners_[points_[member]].emplace_back(c.id, slot);
    }
  }
}

std::vector<std::uint32_t> Scheduler::point_indices(const ClusterSet& clusters,
                                                    const Machine& machine) {
  std::vector<std::uint32_t> out;
  for (const auto& c : clusters.clusters) {
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      const auto member = c.members[i];
      auto p = machine.find_point(c.labels[i]);
      if (!p) throw GraphError("error point '" + c.labels[i] + "' is not a fallible call");
      if (out.size() <= member) out.resize(member + 1, 0);
      out[member] = *p;
    }
  }
  return out;
}

std::vector<SchedulerAction> Scheduler::step(const SchedulerEvent& event) {
  std::vector<SchedulerAction> actions;
  ++events_;
  if (const auto* start = std::get_if<CampaignStart>(&event)) {
    if (phase_ != SchedulerPhase::Idle)
      throw ProtocolError("campaign start while " + std::string(to_string(phase_)));
    record(start->trace);
    select(start->input, start->trace, actions);
    return actions;
  }
  const auto& in = std::get<FuzzerInput>(event);
  if (phase_ != SchedulerPhase::Awaiting)
    throw ProtocolError("fuzzer input while " + std::string(to_string(phase_)));
  ++count_;
  record(in.trace);
  if (cluster_covered(*current_)) {
    log("covered", current_);
    select(in.input, in.trace, actions);
  } else if (count_ > config_.mutate_threshold) {
    log("abandon", current_);
    select(in.input, in.trace, actions);
  }
  return actions;
}

void Scheduler::record(const ExecutionTrace& trace) {
  for (const auto& e : trace.encounters) {
    if (!e.injected || e.point >= owners_.size()) continue;
    for (auto [c, slot] : owners_[e.point]) ledger_[c][slot] = 1;
  }
}

bool Scheduler::cluster_covered(std::uint32_t cluster) const {
  const auto& flags = ledger_[cluster];
  return std::all_of(flags.begin(), flags.end(), [](std::uint8_t f) { return f != 0; });
}

void Scheduler::select(std::span<const std::uint8_t> input, const ExecutionTrace& trace,
                       std::vector<SchedulerAction>& actions) {
  phase_ = SchedulerPhase::Idle;
  current_.reset();
  count_ = 0;
  const PathSpec here = trace.path_spec();
  for (;;) {
    std::vector<std::uint32_t> excluded(unsolvable_.begin(), unsolvable_.end());
    excluded.insert(excluded.end(), visited_.begin(), visited_.end());
    std::sort(excluded.begin(), excluded.end());
    const auto scores =
        score_clusters(clusters_, here, ledger_, cfg_, config_.weights, excluded);
    const auto pick = select_next_cluster(scores);
    if (!pick) {
      bool remaining = false;
      for (const auto& c : clusters_.clusters)
        remaining |= !unsolvable_.count(c.id) && !cluster_covered(c.id);
      if (!remaining || visited_.empty()) {
        phase_ = SchedulerPhase::Done;
        log("complete", std::nullopt);
        actions.emplace_back(CampaignComplete{});
        return;
      }
      visited_.clear();
      ++rotation_;
      log("rotate", std::nullopt);
      continue;
    }
    visited_.insert(*pick);
    auto emit = solve_cluster(*pick, input, trace);
    if (!emit) {
      unsolvable_.insert(*pick);
      log("unsolvable", pick);
      continue;
    }
    phase_ = SchedulerPhase::Awaiting;
    current_ = *pick;
    log("emit", pick);
    actions.emplace_back(std::move(*emit));
    return;
  }
}

std::optional<EmitTestCase> Scheduler::solve_cluster(std::uint32_t cluster,
                                                     std::span<const std::uint8_t> hint,
                                                     const ExecutionTrace& trace) {
  const Cluster& c = clusters_.clusters.at(cluster);
  ++solves_;
  const auto result = solve(path_constraints(cfg_, c.common_path), config_.solver, hint);
  if (result.status != SolveStatus::Sat) return std::nullopt;

  // The static predicates say nothing about fault decisions, so the answer
  // is replayed fault-free first and then under the hint's own faults.
  ErrorSequence hinted;
  for (const auto& e : trace.encounters) hinted.push_back(e.injected ? 1 : 0);
  const bool any_fault = std::any_of(hinted.begin(), hinted.end(), [](auto b) { return b != 0; });
  std::vector<ErrorSequence> attempts{ErrorSequence{}};
  if (any_fault) attempts.push_back(std::move(hinted));
  ExecutionTrace replay;
  for (auto& seq : attempts) {
    machine_.execute(result.input, seq, ExecOptions{}, replay);
    if (std::find(replay.path.begin(), replay.path.end(), c.parent) != replay.path.end())
      return EmitTestCase{cluster, result.input, std::move(seq)};
  }
  return std::nullopt;
}

void Scheduler::log(std::string_view action, std::optional<std::uint32_t> cluster) {
  nlohmann::json j;
  j["event"] = events_;
  j["action"] = action;
  j["cluster"] = cluster ? nlohmann::json(*cluster) : nlohmann::json(nullptr);
  j["count"] = count_;
  j["phase"] = to_string(phase_);
  j["rotation"] = rotation_;
  log_.push_back(std::move(j));
}

std::string Scheduler::decision_log() const {
  std::string out;
  for (const auto& j : log_) out += j.dump() + "\n";
  return out;
}

}  // namespace errfuzz
