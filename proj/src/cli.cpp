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

#include "errfuzz/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "errfuzz/bench.hpp"
#include "errfuzz/campaign.hpp"
#include "errfuzz/clustering.hpp"
#include "errfuzz/dot.hpp"
#include "errfuzz/error.hpp"
#include "errfuzz/extractor.hpp"
#include "errfuzz/fuzzer.hpp"
#include "errfuzz/generator.hpp"

namespace errfuzz {
namespace {

namespace fs = std::filesystem;

// Anything wrong with the target or another input file.
struct TargetFailure : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TargetFailure("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error("cannot write " + path.string());
}

Target load_target(const std::string& path) {
  if (path.empty()) throw ConfigError("--target is required");
  try {
    return Target::parse(read_file(path));
  } catch (const TargetFailure&) {
    throw;
  } catch (const Error& e) {
    throw TargetFailure(path + ": " + e.what());
  }
}

Overrides load_overrides(const std::string& path) {
  if (path.empty()) return {};
  try {
    return Overrides::parse(read_file(path));
  } catch (const TargetFailure&) {
    throw;
  } catch (const Error& e) {
    throw TargetFailure(path + ": " + e.what());
  }
}

// Flags shared by fuzz and bench; each mirrors a config-file key.
struct CampaignFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config;
  bool context_insensitive = false;
  bool record_wall_time = false;

  void add(CLI::App* app) {
    for (const auto& key : campaign_keys()) {
      if (key == "context-insensitive" || key == "record-wall-time") continue;
      options[key] = app->add_option("--" + key, values[key]);
    }
    app->add_flag("--context-insensitive", context_insensitive,
                  "collapse calling contexts in error-sequence digests");
    app->add_flag("--record-wall-time", record_wall_time, "fill the wall_ms CSV column");
    app->add_option("--config", config, "key=value file; flags take precedence");
  }

  // File settings first, then flags. Returns the file's non-campaign keys,
  // which must be among `extra`.
  std::map<std::string, std::string> apply(CampaignConfig& c,
                                           std::initializer_list<std::string_view> extra) const {
    std::map<std::string, std::string> rest;
    if (!config.empty()) {
      std::map<std::string, std::string> file;
      try {
        file = parse_config_file(read_file(config));
      } catch (const ParseError& e) {
        throw ConfigError(config + ": " + e.what());
      }
      const auto& keys = campaign_keys();
      for (const auto& [k, v] : file) {
        if (std::find(keys.begin(), keys.end(), k) != keys.end())
          apply_setting(c, k, v);
        else if (std::find(extra.begin(), extra.end(), k) != extra.end())
          rest[k] = v;
        else
          throw ConfigError(config + ": unknown setting '" + k + "'");
      }
    }
    for (const auto& [key, opt] : options)
      if (opt->count()) apply_setting(c, key, values.at(key));
    if (context_insensitive) c.context_insensitive = true;
    if (record_wall_time) c.record_wall_time = true;
    c.check();
    return rest;
  }
};

std::string pick(const std::string& flag, const std::map<std::string, std::string>& file,
                 const std::string& key) {
  if (!flag.empty()) return flag;
  auto it = file.find(key);
  return it == file.end() ? "" : it->second;
}

int cmd_extract(const std::string& target_path, const std::string& overrides,
                const std::string& out_path, std::ostream& out) {
  const Target target = load_target(target_path);
  const auto points = extract_error_points(target, load_overrides(overrides));
  const std::string text = to_json(points, target).dump(2) + "\n";
  if (out_path.empty())
    out << text;
  else
    write_file(out_path, text);
  return kExitOk;
}

DotNodeAttributes overlay(const ClusterSet& set, const std::vector<ErrorPoint>& points) {
  static constexpr const char* kColors[] = {"#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f",
                                            "#cab2d6", "#ffff99", "#1f78b4", "#33a02c"};
  std::map<BlockId, std::vector<std::string>> labels, clusters;
  DotNodeAttributes attrs;
  for (const auto& c : set.clusters) {
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      const BlockId b = *points[c.members[i]].primary;
      labels[b].push_back(c.labels[i]);
      clusters[b].push_back(std::to_string(c.id));
    }
    attrs[c.parent].emplace_back("cluster_parent", std::to_string(c.id));
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  for (const auto& [b, l] : labels) {
    attrs[b].emplace_back("error_points", join(l));
    attrs[b].emplace_back("cluster", join(clusters[b]));
    attrs[b].emplace_back("style", "filled");
    const auto first = std::stoul(clusters[b].front());
    attrs[b].emplace_back("fillcolor", kColors[first % std::size(kColors)]);
  }
  for (const auto& c : set.clusters) attrs[c.parent].emplace_back("peripheries", "2");
  return attrs;
}

int cmd_cluster(const std::string& target_path, const std::string& overrides, std::uint32_t k,
                const std::string& mode, std::uint64_t seed, const std::string& out_dir,
                std::ostream& out) {
  const auto m = clustering_mode_from(mode);
  const Target target = load_target(target_path);
  const auto points = realistic_points(extract_error_points(target, load_overrides(overrides)));
  const auto set = cluster_error_points(locations(points), target.cfg(), k, m, seed);
  const std::string json = to_json(set, target.cfg(), error_point_paths(target.cfg(), points)).dump(2) + "\n";
  if (out_dir.empty()) {
    out << json;
    return kExitOk;
  }
  write_file(fs::path(out_dir) / "clusters.json", json);
  write_file(fs::path(out_dir) / "clusters.dot", export_dot(target.cfg(), overlay(set, points)));
  out << set.clusters.size() << " clusters written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_replay(const std::string& target_path, const std::string& repro_path, std::ostream& out,
               std::ostream& err) {
  const Target target = load_target(target_path);
  Repro repro;
  try {
    repro = read_repro(read_file(repro_path));
  } catch (const ParseError& e) {
    throw TargetFailure(repro_path + ": " + e.what());
  }
  ExecutionTrace trace;
  if (replay_repro(target, repro, &trace)) {
    out << "reproduced " << repro.label << "\n";
    return kExitOk;
  }
  err << "did not reproduce " << repro.label << ": outcome " << to_string(trace.outcome);
  if (trace.outcome == Outcome::Crash && trace.bug != kNone)
    err << " (" << target.machine().bug_label(trace.bug) << ")";
  err << "\n";
  return kExitTarget;
}

int cmd_fuzz(const CampaignFlags& flags, const std::string& target_flag, const std::string& out_flag,
             const std::string& overrides, const std::vector<std::string>& seed_files,
             std::ostream& out) {
  CampaignConfig config;
  const auto file = flags.apply(config, {"target", "out"});
  const Target target = load_target(pick(target_flag, file, "target"));
  const std::string out_dir = pick(out_flag, file, "out");
  std::vector<Seed> seeds;
  for (const auto& f : seed_files) {
    const std::string bytes = read_file(f);
    seeds.push_back(Seed{std::vector<std::uint8_t>(bytes.begin(), bytes.end()), {}});
  }
  const auto result = run_campaign(target, config, load_overrides(overrides), std::move(seeds));
  const std::string csv = to_csv(result.fuzz.samples);
  if (out_dir.empty()) {
    out << csv;
    return kExitOk;
  }
  const fs::path dir(out_dir);
  write_file(dir / "timeseries.csv", csv);
  std::string bugs;
  std::map<std::string, int> seen;
  for (const auto& b : result.fuzz.bugs) {
    bugs += to_json(b).dump() + "\n";
    const int n = ++seen[b.label];
    const std::string name = n == 1 ? b.label : b.label + "-" + std::to_string(n);
    write_file(dir / "repro" / (name + ".repro"), write_repro(b));
  }
  write_file(dir / "bugs.jsonl", bugs);
  if (config.mode != CampaignMode::NoConcolic) write_file(dir / "decisions.jsonl", result.decision_log);
  write_file(dir / "summary.json", summary_json(target, config, result).dump(2) + "\n");
  out << "executions " << result.fuzz.executions << ", error sequences "
      << result.fuzz.ledger.sequences.size() << ", branch edges " << result.fuzz.ledger.branch_edges
      << ", bugs " << result.fuzz.bugs.size() << "\n";
  return kExitOk;
}

struct GenerateFlags {
  GeneratorSpec spec;
  std::string corpus;
  std::size_t count = 20;
  std::uint64_t corpus_seed = 1;
  std::string name = "gen";

  void add(CLI::App* app, bool with_spec) {
    app->add_option("--corpus", corpus, "motif or deep-magic");
    app->add_option("--count,--corpus-size", count, "targets in the corpus");
    app->add_option("--corpus-seed", corpus_seed);
    if (!with_spec) return;
    app->add_option("--name", name, "file stem for a single target");
    app->add_option("--spec-seed", spec.seed);
    app->add_option("--functions", spec.functions);
    app->add_option("--switch-dispatch", spec.switch_dispatch);
    app->add_option("--chain", spec.chain);
    app->add_option("--deep-magic", spec.deep_magic);
    app->add_option("--diamond", spec.diamond);
    app->add_option("--arms", spec.arms);
    app->add_option("--chain-length", spec.chain_length);
    app->add_option("--magic-bytes", spec.magic_bytes);
    app->add_option("--depth", spec.depth);
    app->add_option("--density", spec.density);
    app->add_option("--bug-rate", spec.bug_rate);
    app->add_option("--spacer", spec.spacer);
  }

  std::vector<std::pair<std::string, GeneratorSpec>> specs() const {
    std::vector<GeneratorSpec> list;
    if (corpus.empty()) return {{name, spec}};
    if (corpus == "motif")
      list = motif_corpus(corpus_seed, count);
    else if (corpus == "deep-magic")
      list = deep_magic_corpus(corpus_seed, count);
    else
      throw ConfigError("corpus must be motif or deep-magic, got '" + corpus + "'");
    std::vector<std::pair<std::string, GeneratorSpec>> out;
    char buf[32];
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%02zu", corpus == "motif" ? "motif" : "deep", i);
      out.emplace_back(buf, list[i]);
    }
    return out;
  }
};

int cmd_generate(const GenerateFlags& flags, const std::string& out_dir, std::ostream& out) {
  if (out_dir.empty()) throw ConfigError("--out is required");
  for (const auto& [name, spec] : flags.specs()) {
    const auto g = generate_target(spec, name);
    write_file(fs::path(out_dir) / (name + ".ir"), serialize(g.program));
    nlohmann::json truth = to_json(g.truth);
    truth["spec"] = to_json(spec);
    write_file(fs::path(out_dir) / (name + ".truth.json"), truth.dump(2) + "\n");
    out << name << ": " << g.truth.points.size() << " points, " << g.truth.bugs.size()
        << " bugs\n";
  }
  return kExitOk;
}

int cmd_bench(const CampaignFlags& flags, const std::vector<std::string>& target_paths,
              const GenerateFlags& corpus, const std::vector<std::string>& modes,
              const std::vector<std::string>& sweeps, const std::string& out_flag, unsigned jobs,
              std::ostream& out) {
  BenchConfig bench;
  const auto file = flags.apply(bench.base, {"target", "out", "sweep"});
  std::vector<std::string> sweep_list = sweeps;
  if (sweep_list.empty())
    if (auto it = file.find("sweep"); it != file.end()) sweep_list.push_back(it->second);
  for (const auto& s : sweep_list) bench.sweeps.push_back(SweepAxis::parse(s));
  bench.modes.clear();
  for (const auto& m : modes) bench.modes.push_back(campaign_mode_from(m));
  if (bench.modes.empty()) bench.modes.push_back(bench.base.mode);
  const std::string out_dir = pick(out_flag, file, "out");
  if (!out_dir.empty()) bench.out_dir = out_dir;
  bench.jobs = jobs;

  std::vector<std::pair<std::string, Target>> owned;
  std::vector<std::string> paths = target_paths;
  if (paths.empty() && corpus.corpus.empty())
    if (auto it = file.find("target"); it != file.end()) paths.push_back(it->second);
  for (const auto& p : paths) owned.emplace_back(fs::path(p).stem().string(), load_target(p));
  if (!corpus.corpus.empty())
    for (const auto& [name, spec] : corpus.specs())
      owned.emplace_back(name, Target(generate_target(spec, name).program));
  if (owned.empty()) throw ConfigError("bench needs --target or --corpus");
  std::vector<BenchTarget> targets;
  for (const auto& [name, t] : owned) targets.push_back({name, &t});

  const auto cells = run_bench(targets, bench);
  out << summary_table(aggregate(cells));
  return kExitOk;
}

int cmd_report(const std::string& in_dir, const std::string& out_path, const std::string& svg_path,
               std::ostream& out) {
  if (in_dir.empty()) throw ConfigError("--in is required");
  if (!fs::is_directory(in_dir)) throw TargetFailure("not a directory: " + in_dir);
  const auto rows = aggregate_csv_dir(in_dir);
  const std::string json = to_json(rows).dump(2) + "\n";
  if (out_path.empty())
    out << json;
  else
    write_file(out_path, json);
  if (!svg_path.empty()) {
    std::vector<std::pair<std::string, std::vector<Sample>>> series;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(in_dir))
      if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "summary.csv")
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      series.emplace_back(fs::relative(f, in_dir).replace_extension().string(),
                          parse_csv(read_file(f.string())));
    write_file(svg_path, svg_plot(series));
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fault-injection fuzzing with error-point clustering", "errfuzz"};
  app.require_subcommand(1);

  std::string target, overrides, out_path;
  std::uint32_t k = 2;
  std::string cmode = "strict";
  std::uint64_t cseed = 0;

  auto* extract = app.add_subcommand("extract", "list error points as JSON");
  extract->add_option("--target", target)->required();
  extract->add_option("--overrides", overrides, "allow/deny file");
  extract->add_option("--out", out_path, "output file (default stdout)");

  auto* cluster = app.add_subcommand("cluster", "cluster error points; JSON plus a DOT overlay");
  cluster->add_option("--target", target)->required();
  cluster->add_option("--overrides", overrides);
  cluster->add_option("--k", k);
  cluster->add_option("--clustering-mode", cmode);
  cluster->add_option("--seed", cseed);
  cluster->add_option("--out", out_path, "directory for clusters.json and clusters.dot");

  CampaignFlags fuzz_flags;
  std::string replay;
  std::vector<std::string> seed_files;
  auto* fuzz = app.add_subcommand("fuzz", "run one campaign");
  fuzz->add_option("--target", target);
  fuzz->add_option("--overrides", overrides);
  fuzz->add_option("--out", out_path, "output directory (default: CSV to stdout)");
  fuzz->add_option("--replay", replay, "re-execute a .repro file instead of fuzzing");
  fuzz->add_option("--input-seed", seed_files, "initial input file, repeatable");
  fuzz_flags.add(fuzz);

  CampaignFlags bench_flags;
  GenerateFlags bench_corpus;
  std::vector<std::string> targets, modes, sweeps;
  unsigned jobs = 1;
  auto* bench = app.add_subcommand("bench", "run a matrix of campaigns");
  bench->add_option("--target", targets, "target file, repeatable");
  bench->add_option("--modes", modes, "comma-separated modes")->delimiter(',');
  bench->add_option("--sweep", sweeps, "key=v1,v2,..., repeatable");
  bench->add_option("--out", out_path);
  bench->add_option("--jobs", jobs);
  bench_corpus.add(bench, false);
  bench_flags.add(bench);

  std::string in_dir, svg;
  auto* report = app.add_subcommand("report", "aggregate bench CSVs");
  report->add_option("--in", in_dir)->required();
  report->add_option("--out", out_path, "summary JSON file (default stdout)");
  report->add_option("--svg", svg, "also plot error sequences over executions");

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "write synthetic targets and ground truth");
  generate->add_option("--out", out_path)->required();
  gen.add(generate, true);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    try {
      app.parse(argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "errfuzz: " << e.what() << "\n";
      return kExitUsage;
    }
    if (*extract) return cmd_extract(target, overrides, out_path, out);
    if (*cluster) return cmd_cluster(target, overrides, k, cmode, cseed, out_path, out);
    if (*fuzz) {
      if (!replay.empty()) return cmd_replay(target, replay, out, err);
      return cmd_fuzz(fuzz_flags, target, out_path, overrides, seed_files, out);
    }
    if (*bench) return cmd_bench(bench_flags, targets, bench_corpus, modes, sweeps, out_path, jobs, out);
    if (*report) return cmd_report(in_dir, out_path, svg, out);
    if (*generate) return cmd_generate(gen, out_path, out);
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "errfuzz: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TargetFailure& e) {
    err << "errfuzz: " << e.what() << "\n";
    return kExitTarget;
  } catch (const std::exception& e) {
    err << "errfuzz: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace errfuzz
