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

#include <cstdlib>
#include <map>

#include "doctest.h"
#include "errfuzz/error.hpp"
#include "errfuzz/extractor.hpp"
#include "errfuzz/scheduler.hpp"
#include "support.hpp"

using namespace errfuzz;
using namespace errfuzz::test;

namespace {

struct Rig {
  Target target;
  std::vector<ErrorPoint> points;
  ClusterSet clusters;
  std::vector<std::uint32_t> indices;

  Rig(const std::string& file, std::uint32_t k)
      : target(Target::load(fixture(file))),
        points(realistic_points(extract_error_points(target))),
        clusters(cluster_error_points(locations(points), target.cfg(), k)),
        indices(Scheduler::point_indices(clusters, target.machine())) {}

  Scheduler make(std::uint32_t threshold = 10000) const {
    SchedulerConfig sc;
    sc.mutate_threshold = threshold;
    return Scheduler(clusters, target.cfg(), target.machine(), indices, sc);
  }
  ExecutionTrace run(const std::vector<std::uint8_t>& in, const ErrorSequence& es = {}) const {
    return target.machine().execute(in, es);
  }
  std::uint32_t cluster_with(const std::string& label) const {
    for (const auto& c : clusters.clusters)
      if (std::find(c.labels.begin(), c.labels.end(), label) != c.labels.end()) return c.id;
    throw std::runtime_error("no cluster for " + label);
  }
};

std::vector<SchedulerAction> start(Scheduler& s, const Rig& rig, const std::vector<std::uint8_t>& in) {
  const auto t = rig.run(in);
  return s.step(CampaignStart{in, t});
}

std::vector<SchedulerAction> feed(Scheduler& s, const Rig& rig, const std::vector<std::uint8_t>& in,
                                  const ErrorSequence& es = {}) {
  const auto t = rig.run(in, es);
  return s.step(FuzzerInput{in, t});
}

const EmitTestCase* emitted(const std::vector<SchedulerAction>& actions) {
  for (const auto& a : actions)
    if (const auto* e = std::get_if<EmitTestCase>(&a)) return e;
  return nullptr;
}

bool completed(const std::vector<SchedulerAction>& actions) {
  for (const auto& a : actions)
    if (std::holds_alternative<CampaignComplete>(a)) return true;
  return false;
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("fig2 fresh start targets the three-member cluster") {
  Rig rig("fig2.ir", 2);
  auto s = rig.make();
  const auto actions = start(s, rig, {0, 0, 0, 0});
  const auto* e = emitted(actions);
  REQUIRE(e);
  CHECK(e->cluster == rig.cluster_with("EP1"));
  CHECK(rig.clusters.clusters[e->cluster].labels ==
        std::vector<std::string>{"EP1", "EP2", "EP3"});
  CHECK(parse_constraint("b0 == 1 && b1 < 128").holds(e->input));
  const auto replay = rig.run(e->input, e->errors);
  CHECK(std::find(replay.path.begin(), replay.path.end(), rig.target.cfg().at("B")) !=
        replay.path.end());
  CHECK(s.phase() == SchedulerPhase::Awaiting);
  CHECK(s.current() == e->cluster);
  CHECK(s.solve_count() == 1);
}

TEST_CASE("fig2 covering inputs walk the campaign to completion") {
  Rig rig("fig2.ir", 2);
  auto s = rig.make();
  REQUIRE(emitted(start(s, rig, {0, 0, 0, 0})));
  const auto big = rig.cluster_with("EP1");
  CHECK(feed(s, rig, {1, 0, 7}, {1}).empty());  // EP1
  CHECK(feed(s, rig, {1, 0, 7}, {0, 1}).empty());  // EP2
  CHECK(s.count() == 2);
  const auto next = feed(s, rig, {1, 0, 0}, {1});  // EP3 completes the cluster
  const auto* e = emitted(next);
  REQUIRE(e);
  CHECK(e->cluster == rig.cluster_with("EP4"));
  CHECK(e->cluster != big);
  CHECK(parse_constraint("b0 == 1 && b1 >= 128").holds(e->input));
  const auto done = feed(s, rig, {1, 200, 0, 201}, {1});
  CHECK(completed(done));
  CHECK(s.phase() == SchedulerPhase::Done);
  for (const auto& flags : s.ledger())
    for (auto f : flags) CHECK(f == 1);
  CHECK_THROWS_AS(feed(s, rig, {0}), ProtocolError);
}

TEST_CASE("threshold one abandons after two non-covering inputs") {
  Rig rig("fig2.ir", 2);
  auto s = rig.make(1);
  const auto first = emitted(start(s, rig, {0, 0, 0, 0}))->cluster;
  CHECK(feed(s, rig, {0}).empty());
  const auto again = feed(s, rig, {0});
  const auto* e = emitted(again);
  REQUIRE(e);
  CHECK(e->cluster != first);
  CHECK(s.count() == 0);
  const auto& log = s.decisions();
  REQUIRE(log.size() >= 3);
  CHECK(log[log.size() - 2]["action"] == "abandon");
  CHECK(log.back()["action"] == "emit");
}

TEST_CASE("protocol errors") {
  Rig rig("fig2.ir", 2);
  auto s = rig.make();
  CHECK_THROWS_AS(feed(s, rig, {0}), ProtocolError);
  start(s, rig, {0});
  CHECK_THROWS_AS(start(s, rig, {0}), ProtocolError);
  SchedulerConfig bad;
  bad.mutate_threshold = 0;
  CHECK_THROWS_AS(Scheduler(rig.clusters, rig.target.cfg(), rig.target.machine(), rig.indices, bad),
                  ConfigError);
}

TEST_CASE("nothing to target completes at once") {
  const Target t = Target::parse("func main:\nblock main:\n  x = input 0\n  halt\n");
  const ClusterSet empty;
  Scheduler s(empty, t.cfg(), t.machine(), {});
  const std::vector<std::uint8_t> in{0};
  const auto trace = t.machine().execute(in, {});
  CHECK(completed(s.step(CampaignStart{in, trace})));
  CHECK(s.phase() == SchedulerPhase::Done);
}

TEST_CASE("rotation with a non-covering fuzzer") {
  Rig rig("scheduler.ir", 2);
  REQUIRE(rig.clusters.clusters.size() == 3);
  const auto unsolvable = rig.cluster_with("ep_c");
  auto s = rig.make(1);
  std::vector<std::vector<std::uint32_t>> per_rotation(1);
  auto note = [&](const std::vector<SchedulerAction>& actions) {
    if (const auto* e = emitted(actions)) {
      if (per_rotation.size() <= s.rotation()) per_rotation.resize(s.rotation() + 1);
      per_rotation[s.rotation()].push_back(e->cluster);
    }
  };
  note(start(s, rig, {0}));
  const std::size_t events = rig.clusters.clusters.size() * 2;
  std::set<std::uint32_t> settled;
  for (int i = 0; i < 40; ++i) {
    note(feed(s, rig, {0}));
    if (i + 2 == static_cast<int>(events)) settled = s.unsolvable();
  }
  CHECK(settled == std::set<std::uint32_t>{unsolvable});
  CHECK(s.unsolvable() == settled);
  REQUIRE(s.rotation() >= 3);
  for (std::uint64_t r = 0; r < s.rotation(); ++r) {
    auto got = per_rotation[r];
    std::sort(got.begin(), got.end());
    std::vector<std::uint32_t> want;
    for (const auto& c : rig.clusters.clusters)
      if (c.id != unsolvable) want.push_back(c.id);
    CHECK(got == want);
  }
  CHECK(s.phase() == SchedulerPhase::Awaiting);
}

TEST_CASE("decision log matches the golden file") {
  Rig rig("scheduler.ir", 2);
  auto s = rig.make(3);
  auto actions = start(s, rig, {0});
  // Replay each emitted input with every encounter faulted, then idle inputs.
  for (int i = 0; i < 30 && !completed(actions); ++i) {
    const auto* e = emitted(actions);
    if (e) {
      const auto input = e->input;
      actions = feed(s, rig, input, ErrorSequence(8, 1));
      if (actions.empty()) actions = feed(s, rig, input, ErrorSequence{0, 1});
    } else {
      actions = feed(s, rig, {0});
    }
  }
  const std::string golden = std::string(ERRFUZZ_GOLDEN_DIR) + "/scheduler_contract.jsonl";
  if (std::getenv("ERRFUZZ_UPDATE_GOLDEN")) write_file(golden, s.decision_log());
  CHECK(s.decision_log() == read_file(golden));
  CHECK(s.phase() == SchedulerPhase::Done);
}

TEST_CASE("random programs: every emitted input reaches its cluster parent") {
  Rng rng(91);
  int emits = 0;
  for (int iter = 0; iter < 150; ++iter) {
    RandomProgramOptions o;
    o.functions = 1 + static_cast<std::uint32_t>(pick(rng, 3));
    o.blocks = 3 + static_cast<std::uint32_t>(pick(rng, 5));
    const Target t = Target::parse(random_program(rng, o));
    const auto pts = realistic_points(extract_error_points(t));
    const auto clusters = cluster_error_points(locations(pts), t.cfg(), 2);
    SchedulerConfig sc;
    sc.mutate_threshold = 1;
    Scheduler s(clusters, t.cfg(), t.machine(), Scheduler::point_indices(clusters, t.machine()), sc);
    std::vector<std::uint8_t> in(4, 0);
    auto trace = t.machine().execute(in, {});
    auto actions = s.step(CampaignStart{in, trace});
    for (int i = 0; i < 60 && !completed(actions); ++i) {
      if (const auto* e = emitted(actions)) {
        ++emits;
        const auto replay = t.machine().execute(e->input, e->errors);
        const BlockId parent = clusters.clusters[e->cluster].parent;
        CHECK(std::find(replay.path.begin(), replay.path.end(), parent) != replay.path.end());
        in = e->input;
      }
      trace = t.machine().execute(in, {});
      actions = s.step(FuzzerInput{in, trace});
    }
  }
  CHECK(emits > 50);
}

}  // TEST_SUITE
