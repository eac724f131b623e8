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

#include "errfuzz/ir.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "errfuzz/error.hpp"

namespace errfuzz {

std::string_view to_string(BinOp op) {
  constexpr std::array<std::string_view, 9> names = {"+", "-", "*", "==", "!=",
                                                     "<", "<=", ">", ">="};
  return names[static_cast<std::size_t>(op)];
}

std::string_view to_string(HandlerKind kind) {
  constexpr std::array<std::string_view, 9> names = {
      "return", "break", "continue", "goto", "log", "exit", "close", "delete", "free"};
  return names[static_cast<std::size_t>(kind)];
}

std::optional<HandlerKind> handler_kind_from(std::string_view name) {
  for (HandlerKind k : kAllHandlerKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::string_view to_string(ReturnKind kind) {
  return kind == ReturnKind::PointerLike ? "pointer-like" : "integer-like";
}

ReturnKind guess_return_kind(std::string_view callee) {
  static const std::unordered_set<std::string_view> integer_like = {
      "read",   "write",   "open",   "close", "ioctl",  "send",   "recv",  "stat",
      "fstat",  "lseek",   "fseek",  "fclose", "fflush", "fputs", "fprintf", "printf",
      "socket", "bind",   "listen",  "connect", "accept", "mkdir", "remove", "rename", "unlink",
      "pthread_create", "setsockopt", "select", "poll", "fork", "pipe", "dup2", "fsync"};
  return integer_like.contains(callee) ? ReturnKind::IntegerLike : ReturnKind::PointerLike;
}

std::int64_t ok_value(ReturnKind kind) { return kind == ReturnKind::PointerLike ? 4096 : 0; }
std::int64_t err_value(ReturnKind kind) { return kind == ReturnKind::PointerLike ? 0 : -1; }

const Block* Function::find_block(std::string_view label) const {
  for (const auto& b : blocks)
    if (b.label == label) return &b;
  return nullptr;
}

std::optional<std::size_t> Function::block_index(std::string_view label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].label == label) return i;
  return std::nullopt;
}

const Function* Program::find_function(std::string_view name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

std::optional<std::size_t> Program::function_index(std::string_view name) const {
  for (std::size_t i = 0; i < functions.size(); ++i)
    if (functions[i].name == name) return i;
  return std::nullopt;
}

const Function& Program::entry_function() const {
  const Function* f = find_function(entry);
  if (!f) throw ValidationError("entry function '" + entry + "' is not defined");
  return *f;
}

std::vector<std::string> successors(const Terminator& term) {
  std::vector<std::string> out;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Jump>) {
          out.push_back(t.target);
        } else if constexpr (std::is_same_v<T, Branch>) {
          out.push_back(t.then_target);
          out.push_back(t.else_target);
        } else if constexpr (std::is_same_v<T, Switch>) {
          for (const auto& [v, l] : t.cases) out.push_back(l);
          out.push_back(t.default_target);
        }
      },
      term);
  return out;
}

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> k = {
      "func", "block", "entry", "input", "call", "fcall", "handle", "crash",
      "if",   "jmp",   "br",    "switch", "ret", "halt", "default"};
  return k;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

struct Word {
  std::string_view text;
  int column;
};

class LineReader {
 public:
  LineReader(std::string_view line, int number) : line_(line), number_(number) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      words_.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
  }

  std::size_t size() const { return words_.size(); }
  const Word& operator[](std::size_t i) const { return words_.at(i); }

  [[noreturn]] void fail(std::size_t word, const std::string& what) const {
    const int col = word < words_.size() ? words_[word].column
                                         : static_cast<int>(line_.size()) + 1;
    throw ParseError(number_, col, what);
  }

  void expect_count(std::size_t n, const char* form) const {
    if (words_.size() != n) fail(std::min(n, words_.size()), std::string("expected '") + form + "'");
  }

  // Register names may not be keywords; labels and function names may.
  std::string ident(std::size_t i, const char* what) const {
    if (i >= words_.size()) fail(i, std::string("missing ") + what);
    std::string_view w = words_[i].text;
    const bool is_register = std::string_view(what) == "register";
    if (!is_identifier(w) || (is_register && keywords().contains(w)))
      fail(i, std::string("invalid ") + what + " '" + std::string(w) + "'");
    return std::string(w);
  }

  std::int64_t integer(std::size_t i, const char* what) const {
    if (i >= words_.size()) fail(i, std::string("missing ") + what);
    return parse_int(words_[i].text, i, what);
  }

  std::int64_t parse_int(std::string_view w, std::size_t i, const char* what) const {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size())
      fail(i, std::string("invalid ") + what + " '" + std::string(w) + "'");
    return v;
  }

  Operand operand(std::size_t i) const {
    if (i >= words_.size()) fail(i, "missing operand");
    std::string_view w = words_[i].text;
    if (std::isdigit(static_cast<unsigned char>(w[0])) || w[0] == '-')
      return Operand{parse_int(w, i, "integer")};
    return Operand{ident(i, "register")};
  }

 private:
  std::string_view line_;
  int number_;
  std::vector<Word> words_;
};

std::optional<BinOp> binop_from(std::string_view s) {
  constexpr std::array<BinOp, 9> ops = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Eq, BinOp::Ne,
                                        BinOp::Lt,  BinOp::Le,  BinOp::Gt,  BinOp::Ge};
  for (BinOp op : ops)
    if (to_string(op) == s) return op;
  return std::nullopt;
}

bool is_terminator_word(std::string_view w) {
  return w == "jmp" || w == "br" || w == "switch" || w == "ret" || w == "halt";
}

class ProgramParser {
 public:
  Program parse(std::string_view text) {
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view line =
          text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++number;
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      LineReader r(line, number);
      if (r.size() == 0) continue;
      handle(r, number);
    }
    if (block_open_) throw ParseError(block_line_, 0, "block '" + current_label_ + "' has no terminator");
    if (program_.functions.empty()) throw ParseError(number, 0, "no functions defined");
    for (const auto& f : program_.functions)
      if (f.blocks.empty()) throw ValidationError("function '" + f.name + "' has no blocks");
    validate(program_);
    return std::move(program_);
  }

 private:
  void handle(const LineReader& r, int number) {
    const std::string_view head = r[0].text;
    if (head == "entry") {
      if (!program_.functions.empty()) r.fail(0, "'entry' must precede all functions");
      r.expect_count(2, "entry <function>");
      program_.entry = r.ident(1, "function name");
      return;
    }
    if (head == "func") {
      if (block_open_) r.fail(0, "block '" + current_label_ + "' has no terminator");
      r.expect_count(2, "func <name>:");
      std::string_view w = r[1].text;
      if (w.empty() || w.back() != ':') r.fail(1, "expected ':' after function name");
      std::string name(w.substr(0, w.size() - 1));
      if (!is_identifier(name)) r.fail(1, "invalid function name");
      program_.functions.push_back(Function{std::move(name), {}});
      return;
    }
    if (program_.functions.empty()) r.fail(0, "statement outside of a function");
    if (head == "block") {
      if (block_open_) r.fail(0, "block '" + current_label_ + "' has no terminator");
      r.expect_count(2, "block <label>:");
      std::string_view w = r[1].text;
      if (w.empty() || w.back() != ':') r.fail(1, "expected ':' after block label");
      std::string label(w.substr(0, w.size() - 1));
      if (!is_identifier(label)) r.fail(1, "invalid block label");
      current_ = Block{};
      current_.label = label;
      current_.line = number;
      current_label_ = label;
      block_line_ = number;
      block_open_ = true;
      return;
    }
    if (!block_open_) r.fail(0, "instruction outside of a block");
    if (is_terminator_word(head) || (head == "crash" && r.size() == 2)) {
      current_.term = terminator(r);
      program_.functions.back().blocks.push_back(std::move(current_));
      block_open_ = false;
      return;
    }
    current_.body.push_back(instruction(r));
  }

  Terminator terminator(const LineReader& r) const {
    const std::string_view head = r[0].text;
    if (head == "jmp") {
      r.expect_count(2, "jmp <label>");
      return Jump{r.ident(1, "label")};
    }
    if (head == "br") {
      r.expect_count(4, "br <reg> <then> <else>");
      return Branch{r.ident(1, "register"), r.ident(2, "label"), r.ident(3, "label")};
    }
    if (head == "ret") {
      if (r.size() == 1) return Return{};
      r.expect_count(2, "ret [<reg>]");
      return Return{r.ident(1, "register")};
    }
    if (head == "halt") {
      r.expect_count(1, "halt");
      return Halt{};
    }
    if (head == "crash") return Crash{r.ident(1, "bug label")};
    // switch <reg> [v:label ...] default:<label>
    Switch sw;
    sw.reg = r.ident(1, "register");
    if (r.size() < 4) r.fail(r.size(), "expected 'switch <reg> [v:label ...] default:<label>'");
    std::size_t i = 2;
    std::string_view w = r[i].text;
    if (w.empty() || w.front() != '[') r.fail(i, "expected '['");
    w.remove_prefix(1);
    bool closed = false;
    for (;;) {
      if (!w.empty() && w.back() == ']') {
        w.remove_suffix(1);
        closed = true;
      }
      if (!w.empty()) {
        const auto colon = w.find(':');
        if (colon == std::string_view::npos) r.fail(i, "expected '<value>:<label>'");
        const std::int64_t v = r.parse_int(w.substr(0, colon), i, "case value");
        std::string label(w.substr(colon + 1));
        if (!is_identifier(label)) r.fail(i, "invalid case label");
        sw.cases.emplace_back(v, std::move(label));
      }
      if (closed) break;
      if (++i >= r.size()) r.fail(i, "missing ']'");
      w = r[i].text;
    }
    if (++i >= r.size()) r.fail(i, "missing default target");
    std::string_view d = r[i].text;
    if (d.substr(0, 8) != "default:") r.fail(i, "expected 'default:<label>'");
    sw.default_target = std::string(d.substr(8));
    if (!is_identifier(sw.default_target)) r.fail(i, "invalid default label");
    if (i + 1 != r.size()) r.fail(i + 1, "trailing tokens after switch");
    return sw;
  }

  Instruction instruction(const LineReader& r) const {
    const std::string_view head = r[0].text;
    if (head == "fcall") {
      // fcall <dst> = <callee>[:ptr|:int] @<label>
      r.expect_count(5, "fcall <dst> = <callee> @<label>");
      if (r[2].text != "=") r.fail(2, "expected '='");
      FallibleCall fc;
      fc.dst = r.ident(1, "register");
      std::string_view callee = r[3].text;
      if (auto colon = callee.find(':'); colon != std::string_view::npos) {
        const auto suffix = callee.substr(colon + 1);
        if (suffix == "ptr") fc.kind = ReturnKind::PointerLike;
        else if (suffix == "int") fc.kind = ReturnKind::IntegerLike;
        else r.fail(3, "return kind suffix must be ':ptr' or ':int'");
        callee = callee.substr(0, colon);
      }
      if (!is_identifier(callee)) r.fail(3, "invalid callee name");
      fc.callee = std::string(callee);
      std::string_view label = r[4].text;
      if (label.empty() || label.front() != '@') r.fail(4, "expected '@<error-point label>'");
      label.remove_prefix(1);
      if (!is_identifier(label)) r.fail(4, "invalid error-point label");
      fc.label = std::string(label);
      return fc;
    }
    if (head == "call") {
      r.expect_count(2, "call <function>");
      return Call{std::nullopt, r.ident(1, "function name")};
    }
    if (head == "handle") {
      r.expect_count(2, "handle <kind>");
      auto kind = handler_kind_from(r[1].text);
      if (!kind) r.fail(1, "unknown handler kind '" + std::string(r[1].text) + "'");
      return HandlerOp{*kind};
    }
    if (head == "crash") {
      r.expect_count(4, "crash <label> if <reg>");
      if (r[2].text != "if") r.fail(2, "expected 'if'");
      return CrashIf{r.ident(1, "bug label"), r.ident(3, "register")};
    }
    // <dst> = ...
    if (r.size() < 3 || r[1].text != "=") r.fail(0, "unknown statement '" + std::string(head) + "'");
    std::string dst = r.ident(0, "register");
    if (r[2].text == "input") {
      r.expect_count(4, "<dst> = input <offset>");
      const std::int64_t off = r.integer(3, "offset");
      if (off < 0 || off > UINT32_MAX) r.fail(3, "offset out of range");
      return ReadInput{std::move(dst), static_cast<std::uint32_t>(off)};
    }
    if (r[2].text == "call") {
      r.expect_count(4, "<dst> = call <function>");
      return Call{std::move(dst), r.ident(3, "function name")};
    }
    Assign a;
    a.dst = std::move(dst);
    a.lhs = r.operand(2);
    a.rhs = Operand{std::int64_t{0}};
    if (r.size() == 3) return a;
    r.expect_count(5, "<dst> = <a> <op> <b>");
    a.op = binop_from(r[3].text);
    if (!a.op) r.fail(3, "unknown operator '" + std::string(r[3].text) + "'");
    a.rhs = r.operand(4);
    return a;
  }

  Program program_;
  Block current_;
  std::string current_label_;
  int block_line_ = 0;
  bool block_open_ = false;
};

std::string where(const Function& f, const Block& b) {
  std::string out = "in " + f.name + ":" + b.label;
  if (b.line > 0) out += " (line " + std::to_string(b.line) + ")";
  return out;
}

}  // namespace

void validate(const Program& program) {
  std::set<std::string> fnames;
  for (const auto& f : program.functions)
    if (!fnames.insert(f.name).second)
      throw ValidationError("duplicate function '" + f.name + "'");
  (void)program.entry_function();

  std::unordered_map<std::string, std::string> ep_labels;
  for (const auto& f : program.functions) {
    if (f.blocks.empty()) throw ValidationError("function '" + f.name + "' has no blocks");
    std::set<std::string> labels;
    std::set<std::string> defined;
    for (const auto& b : f.blocks) {
      if (!labels.insert(b.label).second)
        throw ValidationError("duplicate block label '" + b.label + "' in function '" + f.name + "'");
      for (const auto& inst : b.body) {
        std::visit(
            [&](const auto& i) {
              using T = std::decay_t<decltype(i)>;
              if constexpr (std::is_same_v<T, Call>) {
                if (i.dst) defined.insert(*i.dst);
              } else if constexpr (!std::is_same_v<T, HandlerOp> && !std::is_same_v<T, CrashIf>) {
                defined.insert(i.dst);
              }
            },
            inst);
      }
    }
    auto use = [&](const std::string& reg, const Block& b) {
      if (!defined.contains(reg))
        throw ValidationError("register '" + reg + "' is never assigned " + where(f, b));
    };
    for (const auto& b : f.blocks) {
      for (const auto& inst : b.body) {
        if (const auto* fc = std::get_if<FallibleCall>(&inst)) {
          auto [it, fresh] = ep_labels.emplace(fc->label, f.name);
          if (!fresh) throw ValidationError("duplicate error-point label '" + fc->label + "'");
        } else if (const auto* c = std::get_if<Call>(&inst)) {
          if (!program.find_function(c->callee))
            throw ValidationError("call to undefined function '" + c->callee + "' " + where(f, b));
        } else if (const auto* ci = std::get_if<CrashIf>(&inst)) {
          use(ci->reg, b);
        } else if (const auto* a = std::get_if<Assign>(&inst)) {
          if (a->lhs.is_register()) use(a->lhs.reg(), b);
          if (a->op && a->rhs.is_register()) use(a->rhs.reg(), b);
        }
      }
      for (const auto& s : successors(b.term))
        if (!f.find_block(s))
          throw ValidationError("undefined block label '" + s + "' " + where(f, b));
      if (const auto* br = std::get_if<Branch>(&b.term)) {
        use(br->reg, b);
        if (br->then_target == br->else_target)
          throw ValidationError("branch with identical targets '" + br->then_target + "' " +
                                where(f, b));
      } else if (const auto* sw = std::get_if<Switch>(&b.term)) {
        use(sw->reg, b);
        std::set<std::int64_t> values;
        std::set<std::string> targets{sw->default_target};
        for (const auto& [v, l] : sw->cases) {
          if (!values.insert(v).second)
            throw ValidationError("duplicate switch value " + std::to_string(v) + " " + where(f, b));
          if (!targets.insert(l).second)
            throw ValidationError("switch target '" + l + "' used twice " + where(f, b));
        }
      } else if (const auto* ret = std::get_if<Return>(&b.term)) {
        if (ret->reg) use(*ret->reg, b);
      }
    }
  }
}

Program parse_program(std::string_view text) { return ProgramParser().parse(text); }

namespace {

std::string operand_text(const Operand& o) {
  return o.is_register() ? o.reg() : std::to_string(o.imm());
}

}  // namespace

std::string serialize(const Instruction& inst) {
  return std::visit(
      [](const auto& i) -> std::string {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, ReadInput>) {
          return i.dst + " = input " + std::to_string(i.offset);
        } else if constexpr (std::is_same_v<T, Assign>) {
          std::string out = i.dst + " = " + operand_text(i.lhs);
          if (i.op) out += " " + std::string(to_string(*i.op)) + " " + operand_text(i.rhs);
          return out;
        } else if constexpr (std::is_same_v<T, FallibleCall>) {
          std::string callee = i.callee;
          if (i.kind) callee += *i.kind == ReturnKind::PointerLike ? ":ptr" : ":int";
          return "fcall " + i.dst + " = " + callee + " @" + i.label;
        } else if constexpr (std::is_same_v<T, Call>) {
          return i.dst ? *i.dst + " = call " + i.callee : "call " + i.callee;
        } else if constexpr (std::is_same_v<T, HandlerOp>) {
          return "handle " + std::string(to_string(i.kind));
        } else {
          return "crash " + i.label + " if " + i.reg;
        }
      },
      inst);
}

std::string serialize(const Terminator& term) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Jump>) {
          return "jmp " + t.target;
        } else if constexpr (std::is_same_v<T, Branch>) {
          return "br " + t.reg + " " + t.then_target + " " + t.else_target;
        } else if constexpr (std::is_same_v<T, Switch>) {
          std::string out = "switch " + t.reg + " [";
          for (std::size_t i = 0; i < t.cases.size(); ++i) {
            if (i) out += " ";
            out += std::to_string(t.cases[i].first) + ":" + t.cases[i].second;
          }
          return out + "] default:" + t.default_target;
        } else if constexpr (std::is_same_v<T, Return>) {
          return t.reg ? "ret " + *t.reg : "ret";
        } else if constexpr (std::is_same_v<T, Halt>) {
          return "halt";
        } else {
          return "crash " + t.label;
        }
      },
      term);
}

std::string serialize(const Program& program) {
  std::string out;
  if (program.entry != "main") out += "entry " + program.entry + "\n\n";
  for (std::size_t fi = 0; fi < program.functions.size(); ++fi) {
    const auto& f = program.functions[fi];
    if (fi) out += "\n";
    out += "func " + f.name + ":\n";
    for (const auto& b : f.blocks) {
      out += "block " + b.label + ":\n";
      for (const auto& inst : b.body) out += "  " + serialize(inst) + "\n";
      out += "  " + serialize(b.term) + "\n";
    }
  }
  return out;
}

}  // namespace errfuzz
