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

// The concolic scheduler: picks the heaviest cluster, solves its common
// path, hands the solution to the fuzzer and watches the fuzzer's traces
// until the cluster is covered or its input budget runs out.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errfuzz/clustering.hpp"
#include "errfuzz/solver.hpp"
#include "errfuzz/vm.hpp"
#include "errfuzz/weighting.hpp"
#include "json.hpp"

namespace errfuzz {

struct SchedulerConfig {
  std::uint32_t mutate_threshold = 10000;
  WeightConfig weights;
  SolverOptions solver;
};

enum class SchedulerPhase : std::uint8_t { Idle, Awaiting, Done };

std::string_view to_string(SchedulerPhase phase);

struct CampaignStart {
  std::span<const std::uint8_t> input;
  const ExecutionTrace& trace;
};

struct FuzzerInput {
  std::span<const std::uint8_t> input;
  const ExecutionTrace& trace;
};

using SchedulerEvent = std::variant<CampaignStart, FuzzerInput>;

struct EmitTestCase {
  std::uint32_t cluster = 0;
  std::vector<std::uint8_t> input;
  ErrorSequence errors;  // the sequence the replay check used
};

struct CampaignComplete {};

using SchedulerAction = std::variant<EmitTestCase, CampaignComplete>;

class Scheduler {
 public:
  // `points[i]` is the machine point index of clustered point i. The
  // referenced objects must outlive the scheduler.
  Scheduler(const ClusterSet& clusters, const Cfg& cfg, const Machine& machine,
            std::vector<std::uint32_t> points, SchedulerConfig config = {});

  // Maps cluster labels to machine points; throws GraphError for a label the
  // machine does not know.
  static std::vector<std::uint32_t> point_indices(const ClusterSet& clusters,
                                                  const Machine& machine);

  // CampaignStart is valid only while Idle, FuzzerInput only while
  // Awaiting; anything else throws ProtocolError.
  std::vector<SchedulerAction> step(const SchedulerEvent& event);

  SchedulerPhase phase() const { return phase_; }
  std::optional<std::uint32_t> current() const { return current_; }
  std::uint32_t count() const { return count_; }
  const MemberLedger& ledger() const { return ledger_; }
  const std::set<std::uint32_t>& unsolvable() const { return unsolvable_; }
  std::uint64_t solve_count() const { return solves_; }
  std::uint64_t rotation() const { return rotation_; }

  // One JSON object per line, in transition order.
  const std::vector<nlohmann::json>& decisions() const { return log_; }
  std::string decision_log() const;

 private:
  void record(const ExecutionTrace& trace);
  bool cluster_covered(std::uint32_t cluster) const;
  void select(std::span<const std::uint8_t> input, const ExecutionTrace& trace,
              std::vector<SchedulerAction>& actions);
  std::optional<EmitTestCase> solve_cluster(std::uint32_t cluster,
                                            std::span<const std::uint8_t> hint,
                                            const ExecutionTrace& trace);
  void log(std::string_view action, std::optional<std::uint32_t> cluster);

  const ClusterSet& clusters_;
  const Cfg& cfg_;
  const Machine& machine_;
  std::vector<std::uint32_t> points_;
  SchedulerConfig config_;

  // point -> (cluster, member slot)
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> owners_;

  SchedulerPhase phase_ = SchedulerPhase::Idle;
  std::optional<std::uint32_t> current_;
  std::uint32_t count_ = 0;
  MemberLedger ledger_;
  std::set<std::uint32_t> unsolvable_;
  std::set<std::uint32_t> visited_;  // selected during the current rotation
  std::uint64_t rotation_ = 0;
  std::uint64_t solves_ = 0;
  std::uint64_t events_ = 0;
  std::vector<nlohmann::json> log_;
};

}  // namespace errfuzz
