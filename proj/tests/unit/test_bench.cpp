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
#include "errfuzz/bench.hpp"
#include "errfuzz/error.hpp"
#include "support.hpp"

using namespace errfuzz;
using namespace errfuzz::test;

TEST_SUITE("bench") {

TEST_CASE("medians") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(median({7}) == 7);
  using O = std::optional<std::uint64_t>;
  CHECK(median_first_cover({O(5), O(1), O(9)}) == 5.0);
  CHECK(median_first_cover({O(5), std::nullopt, O(9)}) == 9.0);
  CHECK_FALSE(median_first_cover({O(5), std::nullopt, std::nullopt}).has_value());
  CHECK(median_first_cover({O(2), O(4), O(6), std::nullopt}) == 5.0);
  CHECK_FALSE(median_first_cover({O(2), O(4), std::nullopt, std::nullopt}).has_value());
}

TEST_CASE("sweep parsing") {
  const auto axis = SweepAxis::parse("k=0,1,2,4,8");
  CHECK(axis.key == "k");
  CHECK(axis.values == std::vector<std::string>{"0", "1", "2", "4", "8"});
  CHECK_THROWS_AS(SweepAxis::parse("k"), ConfigError);
  CHECK_THROWS_AS(SweepAxis::parse("colour=1"), ConfigError);
  CHECK_THROWS_AS(SweepAxis::parse("k="), ConfigError);
}

TEST_CASE("a k sweep yields one cell per value and repeat") {
  const Target fig2 = Target::load(fixture("fig2.ir"));
  const Target sw = Target::load(fixture("switch3.ir"));
  BenchConfig bc;
  bc.base.budget.executions = 200;
  bc.base.repeats = 5;
  bc.sweeps = {SweepAxis::parse("k=0,1,2,4,8")};
  TempDir dir;
  bc.out_dir = dir.path();
  const auto cells = run_bench({{"fig2", &fig2}, {"switch3", &sw}}, bc);
  CHECK(cells.size() == 50);
  std::set<std::string> ids;
  for (const auto& c : cells) {
    CHECK(c.summary.executions == 200);
    CHECK(c.seed == bc.base.seed + c.repeat);
    ids.insert(c.target + "/" + c.id());
    CHECK(std::filesystem::exists(std::filesystem::path(dir.path()) / c.target / (c.id() + ".csv")));
  }
  CHECK(ids.size() == 50);
  CHECK(ids.count("fig2/huntfuzz_k=4_r3") == 1);

  const auto rows = aggregate(cells);
  CHECK(rows.size() == 10);
  for (const auto& r : rows) CHECK(r.repeats == 5);
  const auto from_disk = aggregate_csv_dir(dir.path());
  REQUIRE(from_disk.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(from_disk[i].group == rows[i].group);
    CHECK(from_disk[i].error_sequences == rows[i].error_sequences);
  }
  CHECK(summary_table(rows).find("huntfuzz_k=2") != std::string::npos);
  CHECK(to_json(rows).size() == 10);

  // The run is reproducible cell by cell.
  bc.out_dir.reset();
  const auto again = run_bench({{"fig2", &fig2}, {"switch3", &sw}}, bc);
  REQUIRE(again.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(again[i].csv == cells[i].csv);
}

TEST_CASE("first cover only moves earlier as the budget grows") {
  const Target t = Target::load(fixture("switch3.ir"));
  BenchConfig bc;
  bc.modes = {CampaignMode::HuntFuzz, CampaignMode::NoConcolic};
  bc.base.repeats = 3;
  std::vector<std::vector<BenchCell>> runs;
  for (std::uint64_t budget : {100, 1000, 5000}) {
    bc.base.budget.executions = budget;
    runs.push_back(run_bench({{"switch3", &t}}, bc));
  }
  for (std::size_t r = 1; r < runs.size(); ++r)
    for (std::size_t i = 0; i < runs[r].size(); ++i)
      for (const auto& [label, at] : runs[r - 1][i].summary.first_fault) {
        const auto later = runs[r][i].summary.first_fault.at(label);
        if (at) CHECK(later == at);
        CHECK(runs[r][i].summary.fault_covered >= runs[r - 1][i].summary.fault_covered);
      }
}

TEST_CASE("csv round trip and plot") {
  const std::vector<Sample> s{{100, 0, 4, 2, 0}, {200, 0, 6, 5, 1}};
  CHECK(parse_csv(to_csv(s)) == s);
  CHECK_THROWS_AS(parse_csv("wrong,header\n1,2\n"), ParseError);
  const auto svg = svg_plot({{"a", s}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
}

}  // TEST_SUITE
