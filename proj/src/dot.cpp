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

#include "errfuzz/dot.hpp"

#include <cctype>
#include <deque>
#include <optional>

#include "errfuzz/error.hpp"

namespace errfuzz {
namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string predicate_text(const EdgePredicate& p) {
  if (p.id.empty()) return to_string(p.constraint);
  return p.id + ": " + to_string(p.constraint);
}

enum class Tok { Id, Arrow, LBrace, RBrace, LBracket, RBracket, Eq, Semi, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip();
    if (pos_ >= text_.size()) return {Tok::End, "", line_};
    const char c = text_[pos_];
    const int line = line_;
    auto single = [&](Tok t) {
      ++pos_;
      return Token{t, std::string(1, c), line};
    };
    switch (c) {
      case '{': return single(Tok::LBrace);
      case '}': return single(Tok::RBrace);
      case '[': return single(Tok::LBracket);
      case ']': return single(Tok::RBracket);
      case '=': return single(Tok::Eq);
      case ';': return single(Tok::Semi);
      case ',': return single(Tok::Comma);
      default: break;
    }
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      pos_ += 2;
      return {Tok::Arrow, "->", line};
    }
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
          ++pos_;
          if (text_[pos_] != '"' && text_[pos_] != '\\') out += '\\';
        }
        if (text_[pos_] == '\n') ++line_;
        out += text_[pos_++];
      }
      if (pos_ >= text_.size()) throw ParseError(line, 0, "unterminated string");
      ++pos_;
      return {Tok::Id, out, line};
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
      std::string out;
      while (pos_ < text_.size()) {
        const char d = text_[pos_];
        if (!(std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.')) {
          if (d == '-' && out.empty()) {
            out += d;
            ++pos_;
            continue;
          }
          break;
        }
        out += d;
        ++pos_;
      }
      return {Tok::Id, out, line};
    }
    throw ParseError(line, 0, std::string("unexpected character '") + c + "'");
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#' || (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/')) {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        pos_ += 2;
        while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) {
          if (text_[pos_] == '\n') ++line_;
          ++pos_;
        }
        pos_ += 2;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

struct PendingEdge {
  BlockId from;
  BlockId to;
  std::optional<EdgePredicate> predicate;
  int line;
};

class DotReader {
 public:
  explicit DotReader(std::string_view text) : lex_(text) { advance(); }

  Cfg read() {
    if (cur_.kind == Tok::Id && cur_.text == "strict") advance();
    if (cur_.kind != Tok::Id || cur_.text != "digraph") fail("expected 'digraph'");
    advance();
    if (cur_.kind == Tok::Id) advance();
    expect(Tok::LBrace, "'{'");
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::End) fail("missing '}'");
      statement();
    }
    advance();
    if (cur_.kind != Tok::End) fail("content after closing '}'");

    if (!entry_) throw ParseError(last_line_, 0, "no node is marked entry=true");
    for (const auto& e : edges_) builder_.add_edge(e.from, e.to, e.predicate);
    builder_.set_entry(*entry_);

    // Reachability is checked here to report the declaring line.
    std::vector<std::vector<BlockId>> succ(builder_.size());
    for (const auto& e : edges_) succ[e.from.value].push_back(e.to);
    std::vector<bool> seen(builder_.size(), false);
    std::deque<BlockId> queue{*entry_};
    seen[entry_->value] = true;
    while (!queue.empty()) {
      BlockId b = queue.front();
      queue.pop_front();
      for (BlockId n : succ[b.value])
        if (!seen[n.value]) {
          seen[n.value] = true;
          queue.push_back(n);
        }
    }
    for (std::size_t b = 0; b < seen.size(); ++b)
      if (!seen[b])
        throw ParseError(decl_line_[b], 0, "block '" + names_[b] + "' is unreachable from entry");
    try {
      return std::move(builder_).build();
    } catch (const ValidationError& e) {
      throw ParseError(last_line_, 0, e.what());
    }
  }

 private:
  void advance() {
    cur_ = lex_.next();
    last_line_ = cur_.line;
  }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind) fail(std::string("expected ") + what);
    advance();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(cur_.line, 0, what + (cur_.text.empty() ? "" : " near '" + cur_.text + "'"));
  }

  BlockId node(const std::string& name, int line) {
    const auto before = builder_.size();
    BlockId id = builder_.add_block(name);
    if (builder_.size() != before) {
      names_.push_back(name);
      decl_line_.push_back(line);
    }
    return id;
  }

  std::vector<std::pair<std::string, std::string>> attributes() {
    std::vector<std::pair<std::string, std::string>> out;
    while (cur_.kind == Tok::LBracket) {
      advance();
      while (cur_.kind != Tok::RBracket) {
        if (cur_.kind != Tok::Id) fail("expected attribute name");
        std::string key = cur_.text;
        advance();
        expect(Tok::Eq, "'='");
        if (cur_.kind != Tok::Id) fail("expected attribute value");
        out.emplace_back(std::move(key), cur_.text);
        advance();
        if (cur_.kind == Tok::Comma || cur_.kind == Tok::Semi) advance();
      }
      advance();
    }
    return out;
  }

  void statement() {
    if (cur_.kind != Tok::Id) fail("expected statement");
    const std::string first = cur_.text;
    const int line = cur_.line;
    advance();
    if (first == "graph" || first == "node" || first == "edge") {
      if (cur_.kind == Tok::LBracket) {
        attributes();
        if (cur_.kind == Tok::Semi) advance();
        return;
      }
    }
    if (cur_.kind == Tok::Eq) {  // graph attribute `key = value`
      advance();
      if (cur_.kind != Tok::Id) fail("expected value");
      advance();
      if (cur_.kind == Tok::Semi) advance();
      return;
    }
    std::vector<BlockId> chain{node(first, line)};
    while (cur_.kind == Tok::Arrow) {
      advance();
      if (cur_.kind != Tok::Id) fail("expected node after '->'");
      chain.push_back(node(cur_.text, cur_.line));
      advance();
    }
    const auto attrs = attributes();
    if (cur_.kind == Tok::Semi) advance();

    if (chain.size() == 1) {
      for (const auto& [k, v] : attrs) {
        if (k != "entry") continue;
        if (v != "true") continue;
        if (entry_ && *entry_ != chain[0])
          throw ParseError(line, 0, "multiple entry nodes: '" + names_[entry_->value] + "' and '" +
                                        names_[chain[0].value] + "'");
        entry_ = chain[0];
      }
      return;
    }
    std::optional<EdgePredicate> pred;
    for (const auto& [k, v] : attrs) {
      if (k != "pred") continue;
      EdgePredicate p;
      std::string_view text = v;
      const auto colon = text.find(':');
      if (colon != std::string_view::npos) {
        p.id = std::string(text.substr(0, colon));
        while (!p.id.empty() && std::isspace(static_cast<unsigned char>(p.id.back())))
          p.id.pop_back();
        text.remove_prefix(colon + 1);
      }
      try {
        p.constraint = parse_constraint(text);
      } catch (const ParseError& e) {
        throw ParseError(line, 0, std::string("bad predicate: ") + e.what());
      }
      pred = std::move(p);
    }
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      for (const auto& e : edges_)
        if (e.from == chain[i] && e.to == chain[i + 1])
          throw ParseError(line, 0, "duplicate edge " + names_[chain[i].value] + " -> " +
                                        names_[chain[i + 1].value]);
      edges_.push_back({chain[i], chain[i + 1], pred, line});
    }
  }

  Lexer lex_;
  Token cur_{Tok::End, "", 1};
  int last_line_ = 1;
  CfgBuilder builder_;
  std::vector<std::string> names_;
  std::vector<int> decl_line_;
  std::vector<PendingEdge> edges_;
  std::optional<BlockId> entry_;
};

}  // namespace

std::string export_dot(const Cfg& cfg, const DotNodeAttributes& extra) {
  std::string out = "digraph cfg {\n";
  for (std::uint32_t b = 0; b < cfg.size(); ++b) {
    const BlockId id{b};
    std::vector<std::string> attrs;
    if (id == cfg.entry()) attrs.push_back("entry=true");
    if (auto it = extra.find(id); it != extra.end())
      for (const auto& [k, v] : it->second) attrs.push_back(k + "=" + quote(v));
    out += "  " + quote(cfg.name(id));
    if (!attrs.empty()) {
      out += " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) out += (i ? ", " : "") + attrs[i];
      out += "]";
    }
    out += ";\n";
  }
  for (const auto& e : cfg.edges()) {
    out += "  " + quote(cfg.name(e.from)) + " -> " + quote(cfg.name(e.to));
    if (e.predicate) out += " [pred=" + quote(predicate_text(*e.predicate)) + "]";
    out += ";\n";
  }
  return out + "}\n";
}

Cfg import_dot(std::string_view text) { return DotReader(text).read(); }

}  // namespace errfuzz
