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

#include "errfuzz/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <map>

#include "errfuzz/error.hpp"

namespace errfuzz {

std::string_view to_string(Relation rel) {
  switch (rel) {
    case Relation::Eq: return "==";
    case Relation::Ne: return "!=";
    case Relation::Lt: return "<";
    case Relation::Le: return "<=";
    case Relation::Gt: return ">";
    case Relation::Ge: return ">=";
  }
  return "?";
}

Relation negate(Relation rel) {
  switch (rel) {
    case Relation::Eq: return Relation::Ne;
    case Relation::Ne: return Relation::Eq;
    case Relation::Lt: return Relation::Ge;
    case Relation::Le: return Relation::Gt;
    case Relation::Gt: return Relation::Le;
    case Relation::Ge: return Relation::Lt;
  }
  return rel;
}

std::int64_t Atom::lhs(std::span<const std::uint8_t> input) const {
  std::int64_t sum = 0;
  for (const auto& t : terms) sum += std::int64_t{t.coef} * input_byte(input, t.offset);
  return sum;
}

bool Atom::holds(std::span<const std::uint8_t> input) const {
  const std::int64_t v = lhs(input);
  switch (rel) {
    case Relation::Eq: return v == rhs;
    case Relation::Ne: return v != rhs;
    case Relation::Lt: return v < rhs;
    case Relation::Le: return v <= rhs;
    case Relation::Gt: return v > rhs;
    case Relation::Ge: return v >= rhs;
  }
  return false;
}

Atom Atom::negated() const {
  Atom out = *this;
  out.rel = negate(rel);
  return out;
}

std::optional<std::uint32_t> Atom::max_offset() const {
  if (terms.empty()) return std::nullopt;
  return terms.back().offset;
}

bool ByteConstraint::holds(std::span<const std::uint8_t> input) const {
  return std::all_of(atoms.begin(), atoms.end(),
                     [&](const Atom& a) { return a.holds(input); });
}

void ByteConstraint::conjoin(const ByteConstraint& other) {
  atoms.insert(atoms.end(), other.atoms.begin(), other.atoms.end());
}

LinearExpr LinearExpr::constant(std::int64_t value) {
  LinearExpr e;
  e.constant_ = value;
  return e;
}

LinearExpr LinearExpr::byte(std::uint32_t offset) {
  LinearExpr e;
  e.terms_.emplace_back(offset, 1);
  return e;
}

LinearExpr LinearExpr::operator+(const LinearExpr& other) const {
  LinearExpr out;
  out.constant_ = constant_ + other.constant_;
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  while (a != terms_.end() || b != other.terms_.end()) {
    if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      out.terms_.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      out.terms_.push_back(*b++);
    } else {
      const std::int64_t c = a->second + b->second;
      if (c != 0) out.terms_.emplace_back(a->first, c);
      ++a;
      ++b;
    }
  }
  return out;
}

LinearExpr LinearExpr::operator-(const LinearExpr& other) const {
  return *this + other.scaled(-1);
}

LinearExpr LinearExpr::scaled(std::int64_t factor) const {
  LinearExpr out;
  if (factor == 0) return out;
  out.constant_ = constant_ * factor;
  out.terms_.reserve(terms_.size());
  for (const auto& [off, c] : terms_) out.terms_.emplace_back(off, c * factor);
  return out;
}

bool LinearExpr::fits_int32_coefficients() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) {
    return t.second >= std::numeric_limits<std::int32_t>::min() &&
           t.second <= std::numeric_limits<std::int32_t>::max();
  });
}

std::optional<Atom> LinearExpr::compare(Relation rel, const LinearExpr& other) const {
  const LinearExpr diff = *this - other;
  if (!diff.fits_int32_coefficients()) return std::nullopt;
  Atom atom;
  atom.rel = rel;
  atom.rhs = -diff.constant_;
  atom.terms.reserve(diff.terms_.size());
  for (const auto& [off, c] : diff.terms_)
    atom.terms.push_back({off, static_cast<std::int32_t>(c)});
  return atom;
}

std::string to_string(const Atom& atom) {
  std::string out;
  if (atom.terms.empty()) out = "0";
  for (std::size_t i = 0; i < atom.terms.size(); ++i) {
    const auto& t = atom.terms[i];
    std::int64_t c = t.coef;
    if (i == 0) {
      if (c < 0) {
        out += "-";
        c = -c;
      }
    } else {
      out += c < 0 ? " - " : " + ";
      if (c < 0) c = -c;
    }
    if (c != 1) out += std::to_string(c) + "*";
    out += "b" + std::to_string(t.offset);
  }
  out += " ";
  out += to_string(atom.rel);
  out += " " + std::to_string(atom.rhs);
  return out;
}

std::string to_string(const ByteConstraint& constraint) {
  if (constraint.atoms.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < constraint.atoms.size(); ++i) {
    if (i) out += " && ";
    out += to_string(constraint.atoms[i]);
  }
  return out;
}

namespace {

class AtomReader {
 public:
  explicit AtomReader(std::string_view text) : text_(text) {}

  Atom read() {
    std::map<std::uint32_t, std::int64_t> coefs;
    bool first = true;
    for (;;) {
      skip_ws();
      std::int64_t sign = 1;
      if (!first) {
        if (peek() == '+') {
          ++pos_;
        } else if (peek() == '-') {
          sign = -1;
          ++pos_;
        } else {
          break;
        }
        skip_ws();
      } else if (peek() == '-') {
        sign = -1;
        ++pos_;
        skip_ws();
      }
      first = false;
      std::int64_t coef = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        coef = read_int();
        skip_ws();
        if (peek() != '*') {
          // Bare constant: only `0` is accepted as an empty left-hand side.
          if (coef != 0 || !coefs.empty()) fail("expected '*' after coefficient");
          continue;
        }
        ++pos_;
        skip_ws();
      }
      if (peek() != 'b') fail("expected byte reference 'b<offset>'");
      ++pos_;
      const std::int64_t off = read_int();
      if (off < 0 || off > std::numeric_limits<std::uint32_t>::max())
        fail("byte offset out of range");
      coefs[static_cast<std::uint32_t>(off)] += sign * coef;
    }
    skip_ws();
    Atom atom;
    atom.rel = read_relation();
    skip_ws();
    std::int64_t sign = 1;
    if (peek() == '-') {
      sign = -1;
      ++pos_;
    }
    atom.rhs = sign * read_int();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    for (const auto& [off, c] : coefs) {
      if (c == 0) continue;
      if (c < std::numeric_limits<std::int32_t>::min() ||
          c > std::numeric_limits<std::int32_t>::max())
        fail("coefficient exceeds 32-bit range");
      atom.terms.push_back({off, static_cast<std::int32_t>(c)});
    }
    return atom;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  std::int64_t read_int() {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{}) fail("expected integer");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  Relation read_relation() {
    auto two = text_.substr(pos_, 2);
    if (two == "==") { pos_ += 2; return Relation::Eq; }
    if (two == "!=") { pos_ += 2; return Relation::Ne; }
    if (two == "<=") { pos_ += 2; return Relation::Le; }
    if (two == ">=") { pos_ += 2; return Relation::Ge; }
    if (peek() == '<') { ++pos_; return Relation::Lt; }
    if (peek() == '>') { ++pos_; return Relation::Gt; }
    fail("expected relation");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(1, static_cast<int>(pos_) + 1,
                     what + " in atom '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Atom parse_atom(std::string_view text) { return AtomReader(trim(text)).read(); }

ByteConstraint parse_constraint(std::string_view text) {
  ByteConstraint out;
  text = trim(text);
  if (text == "true" || text.empty()) return out;
  for (;;) {
    const auto pos = text.find("&&");
    out.atoms.push_back(parse_atom(text.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 2);
  }
  return out;
}

}  // namespace errfuzz
