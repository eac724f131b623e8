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

#include "errfuzz/fuzzer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>

#include "errfuzz/bitmap.hpp"
#include "errfuzz/error.hpp"

namespace errfuzz {
namespace {

constexpr std::uint8_t kInteresting[] = {0, 1, 2, 4, 8, 16, 32, 64, 100, 127, 128, 200, 254, 255};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint8_t random_byte(Rng& rng) {
  if (below(rng, 2) == 0) return kInteresting[below(rng, std::size(kInteresting))];
  return static_cast<std::uint8_t>(rng());
}

ErrorSequence fit(const ErrorSequence& errors, std::size_t n) {
  ErrorSequence out(errors.begin(), errors.begin() + std::min(errors.size(), n));
  out.resize(n, 0);
  return out;
}

bool all_zero(std::span<const std::uint8_t> bits) {
  return std::none_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Initial: return "initial";
    case Provenance::Mutation: return "mutation";
    case Provenance::Concolic: return "concolic";
  }
  return "?";
}

std::vector<std::uint8_t> mutate_input(const Seed& seed, std::span<const Seed> corpus, Rng& rng,
                                       std::size_t max_len) {
  const auto op = kAllInputMutations[below(rng, std::size(kAllInputMutations))];
  return mutate_input(seed, corpus, rng, max_len, op);
}

std::vector<std::uint8_t> mutate_input(const Seed& seed, std::span<const Seed> corpus, Rng& rng,
                                       std::size_t max_len, InputMutation op) {
  std::vector<std::uint8_t> out(seed.input.begin(),
                                seed.input.begin() + std::min(seed.input.size(), max_len));
  if (max_len == 0) return {};
  if (out.empty() && op != InputMutation::Resize && op != InputMutation::Splice)
    op = InputMutation::ByteSet;
  switch (op) {
    case InputMutation::BitFlip:
      out[below(rng, out.size())] ^= static_cast<std::uint8_t>(1u << below(rng, 8));
      break;
    case InputMutation::ByteSet:
      if (out.empty())
        out.push_back(random_byte(rng));
      else
        out[below(rng, out.size())] = random_byte(rng);
      break;
    case InputMutation::ByteDelta: {
      const auto delta = static_cast<int>(1 + below(rng, 35));
      auto& b = out[below(rng, out.size())];
      b = static_cast<std::uint8_t>(below(rng, 2) ? b + delta : b - delta);
      break;
    }
    case InputMutation::Splice: {
      const Seed& other = corpus.empty() ? seed : corpus[below(rng, corpus.size())];
      if (!out.empty() || !other.input.empty()) {
        const std::size_t cut = below(rng, out.size() + 1);
        out.resize(cut);
        if (cut < other.input.size())
          out.insert(out.end(), other.input.begin() + cut, other.input.end());
        if (out.size() > max_len) out.resize(max_len);
        break;
      }
      [[fallthrough]];
    }
    case InputMutation::Resize: {
      const bool grow = out.empty() || (out.size() < max_len && below(rng, 2) == 0);
      if (grow) {
        const std::size_t room = max_len - out.size();
        const std::size_t add = 1 + below(rng, std::min<std::size_t>(room, std::max<std::size_t>(8, out.size())));
        for (std::size_t i = 0; i < add; ++i) out.push_back(static_cast<std::uint8_t>(rng()));
      } else {
        out.resize(below(rng, out.size()));
      }
      break;
    }
  }
  return out;
}

ErrorSequence mutate_error_sequence(Seed& seed, Rng& rng) {
  const std::size_t n = seed.encounters;
  const std::uint64_t it = seed.iteration++;
  if (n == 0) return {};
  if (it < n) {
    ErrorSequence out(n, 0);
    out[it] = 1;
    return out;
  }
  ErrorSequence base = fit(seed.errors, n);
  if (it == n && !all_zero(base)) return ErrorSequence(n, 0);
  const std::size_t max_flips = (n + 3) / 4;
  const std::size_t flips = 1 + below(rng, max_flips);
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i < flips; ++i) {
    std::swap(order[i], order[i + below(rng, n - i)]);
    base[order[i]] ^= 1;
  }
  return base;
}

std::size_t CoverageLedger::fault_covered_points() const {
  return static_cast<std::size_t>(
      std::count_if(first_fault.begin(), first_fault.end(), [](const auto& f) { return f.has_value(); }));
}

std::uint64_t sequence_digest(const Machine& machine, std::span<const Encounter> encounters,
                              bool context_insensitive) {
  std::uint64_t h = 0x6a09e667f3bcc908ull;
  for (const auto& e : encounters) {
    h = mix(h ^ fnv1a(machine.point_label(e.point)));
    h = mix(h ^ (context_insensitive ? 0 : machine.context_hash(e.context)));
    h = mix(h ^ (e.injected ? 1u : 0u));
  }
  return h;
}

namespace {

class Campaign {
 public:
  Campaign(const Target& target, std::vector<Seed> seeds, const FuzzConfig& config,
           Scheduler* scheduler)
      : target_(target),
        machine_(target.machine()),
        config_(config),
        scheduler_(scheduler),
        rng_(config.rng_seed),
        queue_(std::move(seeds)),
        start_(std::chrono::steady_clock::now()) {
    if (config_.seconds ? *config_.seconds <= 0 : config_.executions == 0)
      throw ConfigError("fuzzing budget must be positive");
    if (scheduler_ && scheduler_->phase() != SchedulerPhase::Idle)
      throw ConfigError("scheduler has already been started");
    if (queue_.empty()) queue_.push_back(Seed{std::vector<std::uint8_t>(64, 0), {}});
    for (auto& s : queue_) {
      if (s.input.size() > config_.max_len) s.input.resize(config_.max_len);
      s.provenance = Provenance::Initial;
      s.energy = std::max<std::uint32_t>(s.energy, 1);
    }
    for (std::uint32_t p = 0; p < machine_.point_count(); ++p)
      label_hash_.push_back(fnv1a(machine_.point_label(p)));
    result_.ledger.edges.assign(machine_.edge_count(), 0);
    result_.ledger.first_fault.resize(machine_.point_count());
    config_.exec.record_path = true;
  }

  FuzzResult run() {
    const std::size_t initial = queue_.size();
    for (std::size_t i = 0; i < initial && !exhausted(); ++i) {
      Seed& seed = queue_[i];
      execute(seed.input, seed.errors);
      seed.encounters = static_cast<std::uint32_t>(trace_.encounters.size());
      seed.errors = fit(seed.errors, seed.encounters);
      if (i == 0 && scheduler_ && !exhausted()) {
        handle(scheduler_->step(CampaignStart{queue_[0].input, trace_}));
      } else {
        forward(queue_[i].input);
      }
      if (scheduler_ && i == 0) charge();
    }
    cursor_ = 0;
    left_ = queue_.empty() ? 0 : queue_[0].energy;

    while (!exhausted()) {
      if (!pending_.empty()) {
        run_concolic();
        continue;
      }
      if (left_ == 0) {
        cursor_ = (cursor_ + 1) % queue_.size();
        left_ = queue_[cursor_].energy;
      }
      --left_;
      fuzz_one(cursor_);
    }
    if (result_.samples.empty() || result_.samples.back().executions != executions_)
      sample();
    result_.executions = executions_;
    result_.queue_size = queue_.size();
    result_.solves = scheduler_ ? scheduler_->solve_count() : 0;
    finish_points();
    return std::move(result_);
  }

 private:
  bool exhausted() {
    if (config_.seconds) return elapsed_ms() >= *config_.seconds * 1000.0;
    return executions_ >= config_.executions;
  }

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

  void advance(std::uint64_t units) {
    const auto before = executions_ / config_.sample_every;
    executions_ += units;
    if (executions_ / config_.sample_every != before) sample();
  }

  void sample() {
    Sample s;
    s.executions = executions_;
    s.wall_ms = config_.record_wall_time ? static_cast<std::uint64_t>(elapsed_ms()) : 0;
    s.branch_edges = result_.ledger.branch_edges;
    s.error_sequences = result_.ledger.sequences.size();
    s.bugs = result_.bugs.size();
    result_.samples.push_back(s);
  }

  void fuzz_one(std::size_t index) {
    Seed& seed = queue_[index];
    const bool systematic = seed.encounters > 0 && seed.iteration <= seed.encounters;
    std::vector<std::uint8_t> input;
    ErrorSequence errors;
    if (systematic) {
      input = seed.input;
      errors = mutate_error_sequence(seed, rng_);
    } else {
      const auto roll = below(rng_, 4);
      input = roll == 2 ? seed.input : mutate_input(seed, queue_, rng_, config_.max_len);
      errors = roll < 2 ? seed.errors : mutate_error_sequence(queue_[index], rng_);
    }
    const bool fresh = execute(input, errors);
    if (fresh) add_seed(std::move(input), Provenance::Mutation);
    forward(last_input_);
  }

  void run_concolic() {
    EmitTestCase emit = std::move(pending_.front());
    pending_.pop_front();
    execute(emit.input, emit.errors);
    Seed seed{emit.input, fit(emit.errors, trace_.encounters.size()), Provenance::Concolic,
              config_.energy.concolic};
    seed.encounters = static_cast<std::uint32_t>(trace_.encounters.size());
    const std::size_t at = queue_.empty() ? 0 : cursor_ + 1;
    queue_.insert(queue_.begin() + static_cast<std::ptrdiff_t>(at), std::move(seed));
    if (at != cursor_ + 1) cursor_ = 0;
    left_ = 0;
    forward(last_input_);
  }

  void add_seed(std::vector<std::uint8_t> input, Provenance provenance) {
    Seed seed{std::move(input), last_errors_, provenance,
              last_new_edges_ ? config_.energy.new_edges : config_.energy.other};
    seed.encounters = static_cast<std::uint32_t>(trace_.encounters.size());
    queue_.push_back(std::move(seed));
  }

  void forward(const std::vector<std::uint8_t>& input) {
    if (!scheduler_ || scheduler_->phase() != SchedulerPhase::Awaiting) return;
    handle(scheduler_->step(FuzzerInput{input, trace_}));
    charge();
  }

  void handle(std::vector<SchedulerAction> actions) {
    for (auto& a : actions)
      if (auto* emit = std::get_if<EmitTestCase>(&a)) pending_.push_back(std::move(*emit));
  }

  void charge() {
    const auto solves = scheduler_->solve_count();
    if (solves > charged_) {
      std::uint64_t units = (solves - charged_) * config_.concolic_cost;
      // A solve never pushes the count past an execution budget.
      if (!config_.seconds) units = std::min(units, config_.executions - std::min(executions_, config_.executions));
      advance(units);
    }
    charged_ = solves;
  }

  // Executes once (plus an early-crash retry) and records coverage; true
  // when the last run added edges or an error sequence. trace_ holds that
  // run.
  bool execute(const std::vector<std::uint8_t>& input, const ErrorSequence& errors) {
    bool fresh = run(input, errors);
    if (trace_.outcome == Outcome::Crash) {
      const std::size_t used = trace_.encounters.size();
      if (used < errors.size() &&
          !all_zero(std::span<const std::uint8_t>(errors).subspan(used)) && !exhausted()) {
        ErrorSequence retry = errors;
        std::fill(retry.begin(), retry.begin() + static_cast<std::ptrdiff_t>(used), 0);
        if (fresh) add_seed(input, Provenance::Mutation);
        fresh = run(input, retry);
      }
    }
    return fresh;
  }

  bool run(const std::vector<std::uint8_t>& input, const ErrorSequence& errors) {
    machine_.execute(input, errors, config_.exec, trace_);
    ++result_.runs;
    advance(1);
    last_input_ = input;
    auto& ledger = result_.ledger;

    const std::size_t new_edges = bitmap::merge_new(ledger.edges.data(), trace_.edge_hits.data(),
                                                    std::min(ledger.edges.size(), trace_.edge_hits.size()));
    ledger.branch_edges += new_edges;
    last_new_edges_ = new_edges > 0;

    last_errors_.assign(trace_.encounters.size(), 0);
    std::uint64_t h = 0x6a09e667f3bcc908ull;
    for (std::size_t i = 0; i < trace_.encounters.size(); ++i) {
      const auto& e = trace_.encounters[i];
      const std::uint64_t ctx =
          config_.context_insensitive ? 0 : machine_.context_hash(e.context);
      h = mix(h ^ label_hash_[e.point]);
      h = mix(h ^ ctx);
      h = mix(h ^ (e.injected ? 1u : 0u));
      last_errors_[i] = e.injected ? 1 : 0;
      auto& flags = point_flags_[(static_cast<std::uint64_t>(e.point) << 32) | e.context];
      flags |= 1;
      if (e.injected) {
        flags |= 2;
        if (!ledger.first_fault[e.point]) ledger.first_fault[e.point] = executions_;
      }
    }
    bool new_sequence = false;
    if (!trace_.encounters.empty()) {
      new_sequence = ledger.sequences.insert(h).second;
      if (config_.retain_sequences) {
        std::string raw;
        for (const auto& e : trace_.encounters)
          raw += machine_.point_label(e.point) + "@" +
                 std::to_string(config_.context_insensitive ? 0 : machine_.context_hash(e.context)) +
                 (e.injected ? ":1;" : ":0;");
        ledger.raw_sequences.insert(std::move(raw));
      }
    }
    last_digest_ = h;

    if (trace_.outcome == Outcome::Crash && trace_.bug != kNone) {
      BugReport bug;
      bug.label = machine_.bug_label(trace_.bug);
      bug.crash_block = target_.cfg().contains(trace_.crash_block)
                            ? target_.cfg().name(trace_.crash_block)
                            : std::string();
      if (bug_keys_.insert(bug.key()).second) {
        bug.input = input;
        bug.errors = fit(errors, trace_.encounters.size());
        bug.digest = h;
        bug.execution = executions_;
        result_.bugs.push_back(std::move(bug));
      }
    }
    return last_new_edges_ || new_sequence;
  }

  void finish_points() {
    for (const auto& [key, flags] : point_flags_) {
      const auto point = static_cast<std::uint32_t>(key >> 32);
      const auto ctx = static_cast<std::uint32_t>(key & 0xffffffffu);
      auto& pc = result_.ledger.points[{machine_.point_label(point),
                                        config_.context_insensitive ? 0 : machine_.context_hash(ctx)}];
      pc.seen = pc.seen || (flags & 1);
      pc.fault_covered = pc.fault_covered || (flags & 2);
    }
  }


 private:
  const Target& target_;
  const Machine& machine_;
  FuzzConfig config_;
  Scheduler* scheduler_;
  Rng rng_;
  std::vector<Seed> queue_;
  std::deque<EmitTestCase> pending_;
  std::size_t cursor_ = 0;
  std::uint32_t left_ = 0;
  std::uint64_t executions_ = 0;
  std::uint64_t charged_ = 0;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::uint64_t> label_hash_;
  std::unordered_map<std::uint64_t, std::uint8_t> point_flags_;
  std::set<std::pair<std::string, std::string>> bug_keys_;
  ExecutionTrace trace_;
  std::vector<std::uint8_t> last_input_;
  ErrorSequence last_errors_;
  std::uint64_t last_digest_ = 0;
  bool last_new_edges_ = false;
  FuzzResult result_;
};

}  // namespace

FuzzResult fuzz_loop(const Target& target, std::vector<Seed> seeds, const FuzzConfig& config,
                     Scheduler* scheduler) {
  return Campaign(target, std::move(seeds), config, scheduler).run();
}

std::string to_csv(const std::vector<Sample>& samples) {
  std::string out = "executions,wall_ms,branch_edges,error_sequences,bugs\n";
  for (const auto& s : samples)
    out += std::to_string(s.executions) + "," + std::to_string(s.wall_ms) + "," +
           std::to_string(s.branch_edges) + "," + std::to_string(s.error_sequences) + "," +
           std::to_string(s.bugs) + "\n";
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 15];
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError(0, 0, std::string("bad hex digit '") + c + "'");
  };
  if (hex.size() % 2) throw ParseError(0, 0, "odd-length hex string");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

std::string to_bits(const ErrorSequence& errors) {
  std::string out;
  for (auto b : errors) out += b ? '1' : '0';
  return out;
}

ErrorSequence from_bits(std::string_view bits) {
  ErrorSequence out;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ParseError(0, 0, std::string("bad error bit '") + c + "'");
    out.push_back(c == '1');
  }
  return out;
}

nlohmann::json to_json(const BugReport& bug) {
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(bug.digest));
  return {{"bug", bug.label},       {"crash_block", bug.crash_block},
          {"input", to_hex(bug.input)}, {"errseq", to_bits(bug.errors)},
          {"digest", digest},       {"execution", bug.execution}};
}

std::string write_repro(const BugReport& bug) {
  return "bug " + bug.label + "\ninput " + to_hex(bug.input) + "\nerrseq " + to_bits(bug.errors) +
         "\n";
}

Repro read_repro(std::string_view text) {
  Repro out;
  bool have_bug = false;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto sp = line.find(' ');
    const std::string_view key = line.substr(0, sp);
    const std::string_view value = sp == std::string_view::npos ? "" : line.substr(sp + 1);
    try {
      if (key == "bug") {
        out.label = std::string(value);
        have_bug = true;
      } else if (key == "input") {
        out.input = from_hex(value);
      } else if (key == "errseq") {
        out.errors = from_bits(value);
      } else {
        throw ParseError(line_no, 1, "unknown reproducer key '" + std::string(key) + "'");
      }
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(line_no, static_cast<int>(sp + 2),
                       "bad " + std::string(key) + " value '" + std::string(value) + "'");
    }
  }
  if (!have_bug || out.label.empty()) throw ParseError(line_no, 1, "reproducer names no bug");
  return out;
}

bool replay_repro(const Target& target, const Repro& repro, ExecutionTrace* trace) {
  ExecutionTrace local;
  ExecutionTrace& t = trace ? *trace : local;
  target.machine().execute(repro.input, repro.errors, ExecOptions{}, t);
  return t.outcome == Outcome::Crash && t.bug != kNone &&
         target.machine().bug_label(t.bug) == repro.label;
}

}  // namespace errfuzz
