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

#pragma once

// Linear constraints over program input bytes.
//
// An atom is `sum(coef_i * b_i) <rel> rhs` where b_i is the input byte at
// offset i (0 when the input is shorter). A ByteConstraint is a conjunction
// of atoms; the empty conjunction is always true.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace errfuzz {

enum class Relation : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(Relation rel);
Relation negate(Relation rel);

struct LinearTerm {
  std::uint32_t offset = 0;
  std::int32_t coef = 0;

  bool operator==(const LinearTerm&) const = default;
};

inline std::int64_t input_byte(std::span<const std::uint8_t> input,
                               std::uint32_t offset) {
  return offset < input.size() ? input[offset] : 0;
}

struct Atom {
  std::vector<LinearTerm> terms;  // sorted by offset, no zero coefficients
  Relation rel = Relation::Eq;
  std::int64_t rhs = 0;
  // Set when the atom pins bytes of an expression outside the linear
  // fragment to their concrete values.
  bool concretized = false;

  std::int64_t lhs(std::span<const std::uint8_t> input) const;
  bool holds(std::span<const std::uint8_t> input) const;
  Atom negated() const;
  std::optional<std::uint32_t> max_offset() const;

  bool operator==(const Atom& other) const {
    return terms == other.terms && rel == other.rel && rhs == other.rhs;
  }
};

struct ByteConstraint {
  std::vector<Atom> atoms;

  bool holds(std::span<const std::uint8_t> input) const;
  bool always_true() const { return atoms.empty(); }
  void conjoin(const ByteConstraint& other);
  void conjoin(Atom atom) { atoms.push_back(std::move(atom)); }

  bool operator==(const ByteConstraint&) const = default;
};

// Linear expression with 64-bit coefficients, used while building atoms.
// Callers convert to an Atom once the coefficients are known to fit.
class LinearExpr {
 public:
  LinearExpr() = default;
  static LinearExpr constant(std::int64_t value);
  static LinearExpr byte(std::uint32_t offset);

  bool is_constant() const { return terms_.empty(); }
  std::int64_t constant_part() const { return constant_; }
  const std::vector<std::pair<std::uint32_t, std::int64_t>>& terms() const {
    return terms_;
  }

  LinearExpr operator+(const LinearExpr& other) const;
  LinearExpr operator-(const LinearExpr& other) const;
  LinearExpr scaled(std::int64_t factor) const;

  // `*this <rel> other` as an atom; nullopt when a coefficient leaves the
  // signed 32-bit range.
  std::optional<Atom> compare(Relation rel, const LinearExpr& other) const;

  // Largest absolute coefficient or constant; used to detect overflow.
  bool fits_int32_coefficients() const;

 private:
  std::vector<std::pair<std::uint32_t, std::int64_t>> terms_;
  std::int64_t constant_ = 0;
};

// Text form: `3*b0 - b2 + b7 >= 10`, atoms joined by ` && `. The empty
// constraint prints as `true`.
std::string to_string(const Atom& atom);
std::string to_string(const ByteConstraint& constraint);
Atom parse_atom(std::string_view text);
ByteConstraint parse_constraint(std::string_view text);

}  // namespace errfuzz
