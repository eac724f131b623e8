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

#include "errfuzz/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "errfuzz/error.hpp"

namespace errfuzz {
namespace fs = std::filesystem;

SweepAxis SweepAxis::parse(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size())
    throw ConfigError("sweep must look like key=v1,v2,..., got '" + std::string(text) + "'");
  SweepAxis axis;
  axis.key = std::string(text.substr(0, eq));
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    if (item.empty()) throw ConfigError("empty value in sweep '" + std::string(text) + "'");
    axis.values.emplace_back(item);
    rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
  }
  // Reject bad keys and values before any campaign runs.
  CampaignConfig probe;
  for (const auto& v : axis.values) apply_setting(probe, axis.key, v);
  return axis;
}

std::string BenchCell::id() const {
  std::string out(to_string(mode));
  for (const auto& [k, v] : settings) out += "_" + k + "=" + v;
  return out + "_r" + std::to_string(repeat);
}

namespace {

std::vector<Settings> combinations(const std::vector<SweepAxis>& axes) {
  std::vector<Settings> out{{}};
  for (const auto& axis : axes) {
    std::vector<Settings> next;
    for (const auto& prefix : out)
      for (const auto& v : axis.values) {
        Settings s = prefix;
        s.emplace_back(axis.key, v);
        next.push_back(std::move(s));
      }
    out = std::move(next);
  }
  return out;
}

std::string group_of(const std::string& id) {
  const auto pos = id.rfind("_r");
  if (pos == std::string::npos) return id;
  const auto digits = id.substr(pos + 2);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return id;
  return id.substr(0, pos);
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error("cannot write " + path.string());
}

}  // namespace

std::vector<BenchCell> run_bench(const std::vector<BenchTarget>& targets, const BenchConfig& config) {
  config.base.check();
  struct Job {
    const BenchTarget* target;
    BenchCell cell;
    CampaignConfig campaign;
  };
  std::vector<Job> jobs;
  const auto combos = combinations(config.sweeps);
  for (const auto& t : targets)
    for (auto mode : config.modes)
      for (const auto& settings : combos)
        for (std::uint32_t r = 0; r < config.base.repeats; ++r) {
          Job job{&t, {}, config.base};
          job.campaign.mode = mode;
          for (const auto& [k, v] : settings) apply_setting(job.campaign, k, v);
          job.campaign.seed = config.base.seed + r;
          job.campaign.repeats = 1;
          job.cell.target = t.name;
          job.cell.mode = job.campaign.mode;
          job.cell.settings = settings;
          job.cell.repeat = r;
          job.cell.seed = job.campaign.seed;
          jobs.push_back(std::move(job));
        }

  auto run_one = [](Job& job) {
    const Target& target = *job.target->target;
    const auto result = run_campaign(target, job.campaign);
    auto& s = job.cell.summary;
    const auto& f = result.fuzz;
    s.executions = f.executions;
    s.error_sequences = f.ledger.sequences.size();
    s.branch_edges = f.ledger.branch_edges;
    s.bugs = f.bugs.size();
    s.fault_covered = f.ledger.fault_covered_points();
    for (std::uint32_t p = 0; p < f.ledger.first_fault.size(); ++p)
      s.first_fault[target.machine().point_label(p)] = f.ledger.first_fault[p];
    job.cell.csv = to_csv(f.samples);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.jobs, jobs.size()));
  if (workers == 1) {
    for (auto& j : jobs) run_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i; (i = next++) < jobs.size();) run_one(jobs[i]);
        } catch (const std::exception& e) {
          errors[w] = e.what();
          next = jobs.size();
        }
      });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (!e.empty()) throw Error(e);
  }

  std::vector<BenchCell> cells;
  for (auto& j : jobs) cells.push_back(std::move(j.cell));
  if (config.out_dir) {
    for (const auto& c : cells) write_file(*config.out_dir / c.target / (c.id() + ".csv"), c.csv);
    const auto rows = aggregate(cells);
    write_file(*config.out_dir / "summary.json", to_json(rows).dump(2) + "\n");
    write_file(*config.out_dir / "summary.csv", summary_table(rows));
  }
  return cells;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
}

std::optional<double> median_first_cover(std::vector<std::optional<std::uint64_t>> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  const auto n = values.size();
  const auto& hi = values[n / 2];
  if (n % 2) return hi ? std::optional<double>(static_cast<double>(*hi)) : std::nullopt;
  const auto& lo = values[n / 2 - 1];
  if (!lo || !hi) return std::nullopt;
  return (static_cast<double>(*lo) + static_cast<double>(*hi)) / 2;
}

std::vector<BenchRow> aggregate(const std::vector<BenchCell>& cells) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<const BenchCell*>> groups;
  for (const auto& c : cells) {
    const std::pair<std::string, std::string> key{c.target, group_of(c.id())};
    auto& g = groups[key];
    if (g.empty()) order.push_back(key);
    g.push_back(&c);
  }
  std::vector<BenchRow> rows;
  for (const auto& key : order) {
    const auto& g = groups[key];
    BenchRow row;
    row.target = key.first;
    row.group = key.second;
    row.repeats = static_cast<std::uint32_t>(g.size());
    std::vector<double> seqs, edges, bugs, covered;
    std::map<std::string, std::vector<std::optional<std::uint64_t>>> firsts;
    for (const auto* c : g) {
      seqs.push_back(static_cast<double>(c->summary.error_sequences));
      edges.push_back(static_cast<double>(c->summary.branch_edges));
      bugs.push_back(static_cast<double>(c->summary.bugs));
      covered.push_back(static_cast<double>(c->summary.fault_covered));
      for (const auto& [label, first] : c->summary.first_fault) firsts[label].push_back(first);
    }
    row.error_sequences = median(seqs);
    row.branch_edges = median(edges);
    row.bugs = median(bugs);
    row.fault_covered = median(covered);
    for (auto& [label, values] : firsts) row.first_fault[label] = median_first_cover(values);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const std::vector<BenchRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json first = nlohmann::json::object();
    for (const auto& [label, v] : r.first_fault)
      first[label] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    out.push_back({{"target", r.target},
                   {"group", r.group},
                   {"repeats", r.repeats},
                   {"median_error_sequences", r.error_sequences},
                   {"median_branch_edges", r.branch_edges},
                   {"median_bugs", r.bugs},
                   {"median_fault_covered", r.fault_covered},
                   {"median_first_fault", first}});
  }
  return out;
}

std::string summary_table(const std::vector<BenchRow>& rows) {
  std::string out = "target,group,repeats,error_sequences,branch_edges,bugs,fault_covered\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%u,%g,%g,%g,%g\n", r.repeats, r.error_sequences,
                  r.branch_edges, r.bugs, r.fault_covered);
    out += r.target + "," + r.group + "," + buf;
  }
  return out;
}

std::vector<Sample> parse_csv(std::string_view text) {
  std::vector<Sample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "executions,wall_ms,branch_edges,error_sequences,bugs")
        throw ParseError(1, 1, "not a time-series CSV header");
      continue;
    }
    if (line.empty()) continue;
    Sample s;
    unsigned long long v[5];
    char extra;
    if (std::sscanf(line.c_str(), "%llu,%llu,%llu,%llu,%llu%c", &v[0], &v[1], &v[2], &v[3], &v[4],
                    &extra) != 5)
      throw ParseError(line_no, 1, "expected five unsigned columns");
    s.executions = v[0];
    s.wall_ms = v[1];
    s.branch_edges = v[2];
    s.error_sequences = v[3];
    s.bugs = v[4];
    out.push_back(s);
  }
  if (line_no == 0) throw ParseError(1, 1, "empty CSV");
  return out;
}

std::vector<BenchRow> aggregate_csv_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "summary.csv")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<Sample>> groups;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto samples = parse_csv(ss.str());
    const auto rel = fs::relative(f.parent_path(), dir).string();
    const std::pair<std::string, std::string> key{rel == "." ? "" : rel,
                                                  group_of(f.stem().string())};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(samples.empty() ? Sample{} : samples.back());
  }
  std::vector<BenchRow> rows;
  for (const auto& key : order) {
    BenchRow row;
    row.target = key.first;
    row.group = key.second;
    std::vector<double> seqs, edges, bugs;
    for (const auto& last : groups[key]) {
      seqs.push_back(static_cast<double>(last.error_sequences));
      edges.push_back(static_cast<double>(last.branch_edges));
      bugs.push_back(static_cast<double>(last.bugs));
    }
    row.repeats = static_cast<std::uint32_t>(seqs.size());
    row.error_sequences = median(seqs);
    row.branch_edges = median(edges);
    row.bugs = median(bugs);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string svg_plot(const std::vector<std::pair<std::string, std::vector<Sample>>>& series) {
  constexpr double kW = 720, kH = 420, kLeft = 60, kRight = 200, kTop = 20, kBottom = 40;
  std::uint64_t max_x = 1, max_y = 1;
  for (const auto& [name, samples] : series)
    for (const auto& s : samples) {
      max_x = std::max(max_x, s.executions);
      max_y = std::max(max_y, s.error_sequences);
    }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "font-family=\"sans-serif\" font-size=\"11\">\n",
                kW, kH);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#444\"/>\n",
                kLeft, kTop, pw, ph);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\">executions (max %llu)</text>\n",
                kLeft, kH - 10, static_cast<unsigned long long>(max_x));
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"12\" y=\"%g\" transform=\"rotate(-90 12 %g)\">error sequences (max %llu)</text>\n",
                kTop + ph, kTop + ph, static_cast<unsigned long long>(max_y));
  out += buf;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"";
    for (const auto& s : series[i].second) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ",
                    kLeft + pw * static_cast<double>(s.executions) / static_cast<double>(max_x),
                    kTop + ph - ph * static_cast<double>(s.error_sequences) / static_cast<double>(max_y));
      out += buf;
    }
    out += "\"/>\n";
    std::string name;
    for (char c : series[i].first) {
      if (c == '<') name += "&lt;";
      else if (c == '>') name += "&gt;";
      else if (c == '&') name += "&amp;";
      else name += c;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">", kW - kRight + 10,
                  kTop + 14 * static_cast<double>(i + 1), color);
    out += buf + name + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace errfuzz
