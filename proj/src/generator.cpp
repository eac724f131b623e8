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

#include "errfuzz/generator.hpp"

#include <algorithm>
#include <random>

#include "errfuzz/error.hpp"

namespace errfuzz {
namespace {

using Rng = std::mt19937_64;

std::uint64_t pick(Rng& rng, std::uint64_t n) { return rng() % n; }

constexpr const char* kPtrCallees[] = {"malloc", "calloc", "strdup", "fopen", "mmap", "realloc"};
constexpr const char* kIntCallees[] = {"open", "read", "write", "socket", "ioctl", "recv"};
constexpr const char* kHandlers[] = {"log", "free", "close", "delete"};

enum class Motif { Switch, Chain, Diamond, Deep, Filler };

// A fallible call with its check, closing the current block.
struct CallSite {
  std::string label;
  std::string ok;
  std::string err;
};

class IrWriter {
 public:
  void func(const std::string& name) {
    if (!text_.empty()) text_ += "\n";
    text_ += "func " + name + ":\n";
  }
  void block(const std::string& label) { text_ += "block " + label + ":\n"; }
  void line(const std::string& s) { text_ += "  " + s + "\n"; }
  void jmp(const std::string& target) { line("jmp " + target); }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class Generator {
 public:
  explicit Generator(const GeneratorSpec& spec) : spec_(spec), rng_(spec.seed) {}

  GeneratedTarget run(const std::string& name) {
    std::vector<Motif> arms;
    arms.insert(arms.end(), spec_.switch_dispatch, Motif::Switch);
    arms.insert(arms.end(), spec_.chain, Motif::Chain);
    arms.insert(arms.end(), spec_.diamond, Motif::Diamond);
    arms.insert(arms.end(), spec_.deep_magic, Motif::Deep);
    if (spec_.functions > 0) arms.push_back(Motif::Filler);
    for (std::size_t i = arms.size(); i > 1; --i) std::swap(arms[i - 1], arms[pick(rng_, i)]);

    main_.func("main");
    main_.block("entry");
    if (arms.empty()) {
      main_.line("halt");
    } else {
      main_.line("op = input 0");
      std::string cases;
      for (std::size_t i = 0; i < arms.size(); ++i)
        cases += (i ? " " : "") + std::to_string(i) + ":a" + std::to_string(i) + "_s0";
      main_.line("switch op [" + cases + "] default:done");
      for (std::size_t i = 0; i < arms.size(); ++i) arm(static_cast<std::uint32_t>(i), arms[i]);
      main_.block("done");
      main_.line("halt");
    }

    std::string text = main_.text();
    for (const auto& h : helpers_) text += "\n" + h.text();

    GeneratedTarget out;
    out.name = name;
    out.program = parse_program(text);
    truth_.k = spec_.spacer - 1;
    std::sort(truth_.guarded.begin(), truth_.guarded.end());
    out.truth = std::move(truth_);
    verify_bugs(out);
    return out;
  }

 private:
  std::string fresh_reg(const std::string& stem) { return stem + std::to_string(regs_++); }

  std::uint32_t take_offset(std::uint32_t n) {
    const auto at = offset_;
    offset_ += n;
    return at;
  }

  // Emits `count` jump-only blocks named prefix0.. ending in `next`; returns
  // the first block (or `next` for count 0).
  std::string spacer(IrWriter& w, const std::string& prefix, std::uint32_t count,
                     const std::string& next) {
    for (std::uint32_t i = 0; i < count; ++i) {
      w.block(prefix + std::to_string(i));
      w.jmp(i + 1 < count ? prefix + std::to_string(i + 1) : next);
    }
    return count ? prefix + "0" : next;
  }

  void call_site(IrWriter& w, const CallSite& site) {
    const bool integer = pick(rng_, 3) == 0;
    const std::string r = fresh_reg("r");
    if (integer) {
      w.line("fcall " + r + " = " + kIntCallees[pick(rng_, std::size(kIntCallees))] + ":int @" +
             site.label);
      const std::string c = fresh_reg("e");
      w.line(c + " = " + r + " < 0");
      w.line("br " + c + " " + site.err + " " + site.ok);
    } else {
      w.line("fcall " + r + " = " + kPtrCallees[pick(rng_, std::size(kPtrCallees))] + " @" +
             site.label);
      w.line("br " + r + " " + site.ok + " " + site.err);
    }
    truth_.points.push_back(site.label);
  }

  std::string handler_kind() { return kHandlers[pick(rng_, std::size(kHandlers))]; }

  std::vector<std::uint8_t> arm_input(std::uint32_t arm) const {
    std::vector<std::uint8_t> in(std::max<std::uint32_t>(offset_, 1), 0);
    in[0] = static_cast<std::uint8_t>(arm);
    return in;
  }

  void arm(std::uint32_t index, Motif motif) {
    const std::string p = "a" + std::to_string(index);
    const std::string start = p + "_m";
    spacer(main_, p + "_s", spec_.spacer, start);
    switch (motif) {
      case Motif::Switch: switch_motif(index, p, start, "done"); break;
      case Motif::Chain: {
        const bool bug = spec_.chain_length >= 2 && chance(spec_.bug_rate);
        const auto members = chain_motif(main_, p, start, "done", bug ? "bug_" + p : "");
        truth_.clusters.push_back({"chain", members, false});
        if (bug) truth_.bugs.push_back({"bug_" + p, arm_stub(index), ErrorSequence{1, 1}});
        break;
      }
      case Motif::Diamond: {
        const auto members = diamond_motif(main_, p, start, "done");
        truth_.clusters.push_back({"diamond", members, false});
        break;
      }
      case Motif::Deep: deep_motif(p, start, "done"); break;
      case Motif::Filler: filler_motif(p, start, "done"); break;
    }
  }

  bool chance(double p) {
    if (p <= 0) return false;
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p;
  }

  // Input bytes are fixed when the arm is finished, so witnesses are
  // completed in verify_bugs; this records only the arm selector.
  std::vector<std::uint8_t> arm_stub(std::uint32_t arm) const {
    return {static_cast<std::uint8_t>(arm)};
  }

  void switch_motif(std::uint32_t index, const std::string& p, const std::string& start,
                    const std::string& exit) {
    const auto sel = take_offset(1);
    const std::string s = fresh_reg("s");
    const std::string join = p + "_join";
    const bool bug = chance(spec_.bug_rate);
    const auto bug_arm = static_cast<std::uint32_t>(pick(rng_, spec_.arms));
    main_.block(start);
    main_.line(s + " = input " + std::to_string(sel));
    std::string cases;
    for (std::uint32_t i = 0; i < spec_.arms; ++i)
      cases += (i ? " " : "") + std::to_string(i) + ":" + p + "_c" + std::to_string(i);
    main_.line("switch " + s + " [" + cases + "] default:" + join);
    TruthCluster cluster{"switch-dispatch", {}, false};
    for (std::uint32_t i = 0; i < spec_.arms; ++i) {
      const std::string c = p + "_c" + std::to_string(i);
      const std::string h = p + "_h" + std::to_string(i);
      const std::string label = "ep_" + p + "_" + std::to_string(i);
      main_.block(c);
      call_site(main_, {label, join, h});
      main_.block(h);
      if (bug && i == bug_arm) {
        main_.line("handle free");
        main_.line("crash bug_" + p);
      } else {
        main_.line("handle " + handler_kind());
        main_.jmp(join);
      }
      cluster.members.push_back(label);
    }
    main_.block(join);
    main_.jmp(exit);
    truth_.clusters.push_back(std::move(cluster));
    if (bug) {
      std::vector<std::uint8_t> in(sel + 1, 0);
      in[0] = static_cast<std::uint8_t>(index);
      in[sel] = static_cast<std::uint8_t>(bug_arm);
      truth_.bugs.push_back({"bug_" + p, std::move(in), ErrorSequence{1}});
    }
  }

  // Points in sequence whose handlers fall through to the next point. With
  // a bug label, faults at the first two points together trip it.
  std::vector<std::string> chain_motif(IrWriter& w, const std::string& p, const std::string& start,
                                       const std::string& exit, const std::string& bug) {
    std::vector<std::string> members;
    const std::string flag = p + "_flag";
    for (std::uint32_t i = 0; i < spec_.chain_length; ++i) {
      const std::string blk = i == 0 ? start : p + "_p" + std::to_string(i);
      const std::string next = i + 1 < spec_.chain_length ? p + "_p" + std::to_string(i + 1) : exit;
      const std::string h = p + "_ph" + std::to_string(i);
      const std::string label = "ep_" + p + "_" + std::to_string(i);
      w.block(blk);
      if (i == 0 && !bug.empty()) w.line(flag + " = 0");
      call_site(w, {label, next, h});
      w.block(h);
      w.line("handle " + handler_kind());
      if (!bug.empty() && i == 0) w.line(flag + " = 1");
      if (!bug.empty() && i == 1) w.line("crash " + bug + " if " + flag);
      w.jmp(next);
      members.push_back(label);
    }
    return members;
  }

  std::vector<std::string> diamond_motif(IrWriter& w, const std::string& p,
                                         const std::string& start, const std::string& exit) {
    const auto at = take_offset(1);
    const std::string x = fresh_reg("x");
    const std::string c = fresh_reg("d");
    const std::string join = p + "_dj";
    w.block(start);
    w.line(x + " = input " + std::to_string(at));
    w.line(c + " = " + x + " < 128");
    w.line("br " + c + " " + p + "_dl " + p + "_dr");
    std::vector<std::string> members;
    for (const char* side : {"l", "r"}) {
      const std::string blk = p + "_d" + side;
      const std::string h = p + "_dh" + side;
      const std::string label = "ep_" + p + "_" + side;
      w.block(blk);
      call_site(w, {label, join, h});
      w.block(h);
      w.line("handle " + handler_kind());
      w.jmp(join);
      members.push_back(label);
    }
    w.block(join);
    w.jmp(exit);
    return members;
  }

  std::uint8_t magic_byte() {
    // Away from zero, from what +-35 steps reach, and from the mutator's
    // interesting values.
    for (;;) {
      const auto b = static_cast<std::uint8_t>(36 + pick(rng_, 184));
      if (b != 64 && b != 100 && b != 127 && b != 128 && b != 200) return b;
    }
  }

  void deep_motif(const std::string& p, const std::string& start, const std::string& exit) {
    const auto base = take_offset(spec_.depth);
    for (std::uint32_t i = 0; i < spec_.depth; ++i) {
      const std::string d = i == 0 ? start : p + "_e" + std::to_string(i);
      const std::string next = i + 1 < spec_.depth ? p + "_e" + std::to_string(i + 1) : p + "_guard";
      const std::string x = fresh_reg("x");
      const std::string c = fresh_reg("d");
      main_.block(d);
      main_.line(x + " = input " + std::to_string(base + i));
      main_.line(c + " = " + x + " < 128");
      main_.line("br " + c + " " + d + "l " + d + "r");
      main_.block(d + "l");
      main_.jmp(next);
      main_.block(d + "r");
      main_.jmp(next);
    }
    const auto g = take_offset(spec_.magic_bytes);
    std::uint64_t magic = 0;
    for (std::uint32_t i = 0; i < spec_.magic_bytes; ++i)
      magic |= static_cast<std::uint64_t>(magic_byte()) << (8 * i);
    main_.block(p + "_guard");
    std::string sum;
    for (std::uint32_t i = 0; i < spec_.magic_bytes; ++i) {
      const std::string b = fresh_reg("g");
      main_.line(b + " = input " + std::to_string(g + i));
      std::string term = b;
      if (i > 0) {
        term = fresh_reg("t");
        main_.line(term + " = " + b + " * " + std::to_string(1ull << (8 * i)));
      }
      if (sum.empty()) {
        sum = term;
      } else {
        const std::string next = fresh_reg("u");
        main_.line(next + " = " + sum + " + " + term);
        sum = next;
      }
    }
    const std::string pass = fresh_reg("m");
    main_.line(pass + " = " + sum + " == " + std::to_string(magic));
    main_.line("br " + pass + " " + p + "_in0 " + p + "_out");

    const std::string end = p + "_end";
    const std::string outer = "ep_" + p + "_outer";
    main_.block(p + "_out");
    call_site(main_, {outer, end, p + "_outh"});
    main_.block(p + "_outh");
    main_.line("handle " + handler_kind());
    main_.jmp(end);
    truth_.clusters.push_back({"deep-outer", {outer}, false});

    // The inner region starts spacer hops past the guard, out of reach of
    // the outer point's ancestors.
    spacer(main_, p + "_in", spec_.spacer - 1, p + "_ic");
    const std::string mid = spacer(main_, p + "_iz", spec_.spacer, p + "_id");
    auto chain = chain_motif(main_, p + "_i", p + "_ic", mid, "");
    auto diamond = diamond_motif(main_, p + "_i", p + "_id", end);
    truth_.clusters.push_back({"deep-inner-chain", chain, true});
    truth_.clusters.push_back({"deep-inner-diamond", diamond, true});
    truth_.guarded.insert(truth_.guarded.end(), chain.begin(), chain.end());
    truth_.guarded.insert(truth_.guarded.end(), diamond.begin(), diamond.end());
    main_.block(end);
    main_.jmp(exit);
  }

  void filler_motif(const std::string& p, const std::string& start, const std::string& exit) {
    std::vector<std::uint32_t> per(spec_.functions, 0);
    for (std::uint32_t i = 0; i < spec_.density; ++i) ++per[i % spec_.functions];
    std::string cur = start;
    for (std::uint32_t f = 0; f < spec_.functions; ++f) {
      const std::string helper = "fill" + std::to_string(f) + "_" + p;
      for (const char* which : {"a", "b"}) {
        const std::string blk = f == 0 && which[0] == 'a' ? start : cur;
        const std::string next_space = p + "_f" + std::to_string(f) + which + "s";
        const bool last = f + 1 == spec_.functions && which[0] == 'b';
        const std::string after =
            last ? exit : next_space + "0";
        main_.block(blk);
        main_.line("call " + helper);
        main_.jmp(after);
        if (!last) {
          cur = p + "_f" + std::to_string(f) + which + "c";
          spacer(main_, next_space, spec_.spacer, cur);
        }
      }
      helpers_.emplace_back();
      IrWriter& w = helpers_.back();
      w.func(helper);
      if (per[f] == 0) {
        w.block("start");
        w.line("ret");
        continue;
      }
      for (std::uint32_t i = 0; i < per[f]; ++i) {
        const std::string blk = "q" + std::to_string(i);
        const std::string after = i + 1 < per[f] ? "z" + std::to_string(i) + "_0" : "fin";
        const std::string label = "ep_" + helper + "_" + std::to_string(i);
        w.block(blk);
        call_site(w, {label, after, "qh" + std::to_string(i)});
        w.block("qh" + std::to_string(i));
        w.line("handle close");
        w.line("ret");
        if (i + 1 < per[f]) spacer(w, "z" + std::to_string(i) + "_", spec_.spacer, "q" + std::to_string(i + 1));
        truth_.clusters.push_back({"filler", {label}, false});
      }
      w.block("fin");
      w.line("ret");
    }
  }

  void verify_bugs(GeneratedTarget& out) const {
    if (out.truth.bugs.empty()) return;
    const Target target(out.program);
    for (auto& bug : out.truth.bugs) {
      if (bug.input.size() < offset_) bug.input.resize(offset_, 0);
      const auto trace = target.machine().execute(bug.input, bug.errors);
      if (trace.outcome != Outcome::Crash || target.machine().bug_label(trace.bug) != bug.label)
        throw Error("generated bug '" + bug.label + "' is not reproduced by its witness");
    }
  }

  const GeneratorSpec& spec_;
  Rng rng_;
  IrWriter main_;
  std::vector<IrWriter> helpers_;
  GroundTruth truth_;
  std::uint32_t offset_ = 1;
  std::uint32_t regs_ = 0;
};

}  // namespace

void GeneratorSpec::check() const {
  auto bad = [](const std::string& what) { throw ConfigError("generator spec: " + what); };
  if (arms < 2 || arms > 8) bad("arms must be within 2..8");
  if (chain_length < 1 || chain_length > 3) bad("chain length must be within 1..3");
  if (magic_bytes < 1 || magic_bytes > 4) bad("magic bytes must be within 1..4");
  if (depth < 1 || depth > 1024) bad("depth must be within 1..1024");
  if (spacer < 2 || spacer > 64) bad("spacer must be within 2..64");
  if (spacer < chain_length)
    bad("spacer " + std::to_string(spacer) + " is shorter than the chain length " +
        std::to_string(chain_length));
  if (bug_rate < 0 || bug_rate > 1) bad("bug rate must be within [0, 1]");
  if (density > 4ull * functions)
    bad("density " + std::to_string(density) + " exceeds the capacity of " +
        std::to_string(functions) + " helper(s) (" + std::to_string(4ull * functions) + ")");
  const std::uint64_t motifs = std::uint64_t{switch_dispatch} + chain + deep_magic + diamond +
                               (functions > 0 ? 1 : 0);
  if (motifs > 255) bad("at most 255 motifs fit the dispatch byte");
}

GeneratedTarget generate_target(const GeneratorSpec& spec, const std::string& name) {
  spec.check();
  return Generator(spec).run(name);
}

nlohmann::json to_json(const GroundTruth& truth) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : truth.clusters)
    clusters.push_back({{"motif", c.motif}, {"members", c.members}, {"guarded", c.guarded}});
  nlohmann::json bugs = nlohmann::json::array();
  for (const auto& b : truth.bugs) {
    std::string hex, bits;
    static constexpr char kDigits[] = "0123456789abcdef";
    for (auto v : b.input) {
      hex += kDigits[v >> 4];
      hex += kDigits[v & 15];
    }
    for (auto v : b.errors) bits += v ? '1' : '0';
    bugs.push_back({{"label", b.label}, {"input", hex}, {"errseq", bits}});
  }
  return {{"k", truth.k},
          {"points", truth.points},
          {"guarded", truth.guarded},
          {"clusters", clusters},
          {"bugs", bugs}};
}

nlohmann::json to_json(const GeneratorSpec& s) {
  return {{"seed", s.seed},       {"functions", s.functions},
          {"switch_dispatch", s.switch_dispatch}, {"chain", s.chain},
          {"deep_magic", s.deep_magic}, {"diamond", s.diamond},
          {"arms", s.arms},       {"chain_length", s.chain_length},
          {"magic_bytes", s.magic_bytes}, {"depth", s.depth},
          {"density", s.density}, {"bug_rate", s.bug_rate},
          {"spacer", s.spacer}};
}

std::vector<GeneratorSpec> motif_corpus(std::uint64_t seed, std::size_t count) {
  std::vector<GeneratorSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed * 1000003 + i);
    GeneratorSpec s;
    s.seed = rng();
    s.switch_dispatch = static_cast<std::uint32_t>(pick(rng, 2));
    s.chain = static_cast<std::uint32_t>(pick(rng, 3));
    s.diamond = static_cast<std::uint32_t>(pick(rng, 2));
    s.deep_magic = static_cast<std::uint32_t>(1 + pick(rng, 2));
    s.functions = static_cast<std::uint32_t>(pick(rng, 3));
    s.density = s.functions ? static_cast<std::uint32_t>(pick(rng, 2 * s.functions + 1)) : 0;
    s.bug_rate = 0.5;
    out.push_back(s);
  }
  return out;
}

std::vector<GeneratorSpec> deep_magic_corpus(std::uint64_t seed, std::size_t count) {
  std::vector<GeneratorSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed * 1000033 + i);
    GeneratorSpec s;
    s.seed = rng();
    s.deep_magic = static_cast<std::uint32_t>(1 + pick(rng, 2));
    s.diamond = static_cast<std::uint32_t>(pick(rng, 2));
    out.push_back(s);
  }
  return out;
}

}  // namespace errfuzz
