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

#include "doctest.h"
#include "errfuzz/campaign.hpp"
#include "errfuzz/error.hpp"
#include "support.hpp"

using namespace errfuzz;
using namespace errfuzz::test;

TEST_SUITE("campaign") {

TEST_CASE("budget parsing") {
  CHECK(Budget::parse("5000execs").executions == 5000);
  CHECK(Budget::parse("42").executions == 42);
  const auto timed = Budget::parse("1.5s");
  REQUIRE(timed.seconds);
  CHECK(*timed.seconds == doctest::Approx(1.5));
  CHECK(Budget::parse("100execs").str() == "100execs");
  CHECK(Budget::parse("2s").str() == "2s");
  for (const char* bad : {"", "0", "0execs", "-3", "fast", "0s", "12xs"})
    CHECK_THROWS_AS(Budget::parse(bad), ConfigError);
}

TEST_CASE("settings by key") {
  CampaignConfig c;
  apply_setting(c, "mode", "no-concolic");
  apply_setting(c, "k", "4");
  apply_setting(c, "w1", "0.25");
  apply_setting(c, "mutate-threshold", "7");
  apply_setting(c, "clustering-mode", "pivot");
  apply_setting(c, "distance-term", "raw");
  apply_setting(c, "budget", "900execs");
  apply_setting(c, "context-insensitive", "yes");
  apply_setting(c, "energy-concolic", "3");
  CHECK(c.mode == CampaignMode::NoConcolic);
  CHECK(c.k == 4);
  CHECK(c.w1 == doctest::Approx(0.25));
  CHECK(c.mutate_threshold == 7);
  CHECK(c.clustering == ClusteringMode::Pivot);
  CHECK(c.distance == DistanceTerm::Raw);
  CHECK(c.budget.executions == 900);
  CHECK(c.context_insensitive);
  CHECK(c.energy.concolic == 3);
  for (const auto& key : campaign_keys()) CHECK_FALSE(key.empty());

  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "k", "-1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "k", "two"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "k", "99999999999"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "w2", "x"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "record-wall-time", "maybe"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "mode", "turbo"), ConfigError);

  CampaignConfig k0;
  k0.mode = CampaignMode::BaselineK0;
  k0.k = 5;
  CHECK(k0.effective_k() == 0);
  CampaignConfig zero;
  zero.mutate_threshold = 0;
  CHECK_THROWS_AS(zero.check(), ConfigError);
}

TEST_CASE("config files") {
  const auto kv = parse_config_file("# campaign\nk = 3\n\nmode=huntfuzz  # trailing\ntarget = \"a b.ir\"\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("k") == "3");
  CHECK(kv.at("mode") == "huntfuzz");
  CHECK(kv.at("target") == "a b.ir");
  try {
    parse_config_file("k = 1\nnonsense\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config_file(" = 4\n"), ParseError);
}

TEST_CASE("modes") {
  const Target t = Target::load(fixture("fig2.ir"));
  CampaignConfig c;
  c.budget.executions = 4000;
  const auto hunt = run_campaign(t, c);
  REQUIRE(hunt.clusters);
  CHECK(hunt.clusters->clusters.size() == 2);
  CHECK(hunt.points.size() == 4);
  CHECK(hunt.fuzz.solves > 0);
  CHECK_FALSE(hunt.decision_log.empty());
  CHECK(hunt.fuzz.executions == 4000);

  c.mode = CampaignMode::BaselineK0;
  const auto k0 = run_campaign(t, c);
  REQUIRE(k0.clusters);
  CHECK(k0.clusters->clusters.size() == 4);
  CHECK(k0.clusters->k == 0);

  c.mode = CampaignMode::NoConcolic;
  const auto plain = run_campaign(t, c);
  CHECK_FALSE(plain.clusters);
  CHECK(plain.fuzz.solves == 0);
  CHECK(plain.decision_log.empty());

  const auto j = summary_json(t, c, plain);
  CHECK(j["mode"] == "no-concolic");
  CHECK(j["executions"] == 4000);
  CHECK(j["first_fault"].size() == 4);

  // Overrides feed extraction.
  const auto denied = run_campaign(t, CampaignConfig{}, Overrides::parse("deny EP4\n"));
  CHECK(denied.points.size() == 3);
}

}  // TEST_SUITE
