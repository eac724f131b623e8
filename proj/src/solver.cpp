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

#include "errfuzz/solver.hpp"

#include <algorithm>
#include <map>

namespace errfuzz {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

struct Domain {
  std::int64_t lo = 0;
  std::int64_t hi = 255;

  bool fixed() const { return lo == hi; }
  bool empty() const { return lo > hi; }
  std::int64_t size() const { return hi - lo + 1; }
};

// sum(coef * var) <= rhs, or sum(coef * var) != rhs.
struct Row {
  std::vector<std::pair<std::size_t, std::int64_t>> terms;
  std::int64_t rhs = 0;
  bool not_equal = false;
};

class Search {
 public:
  Search(std::vector<Row> rows, std::size_t vars, std::vector<std::int64_t> preferred,
         std::uint64_t budget)
      : rows_(std::move(rows)), preferred_(std::move(preferred)), budget_(budget) {
    weight_.assign(vars, 0);
    for (const auto& r : rows_)
      for (const auto& [v, c] : r.terms) ++weight_[v];
  }

  // Returns true on a solution; `exhausted` distinguishes budget exits.
  bool run(std::vector<Domain> domains, std::vector<std::int64_t>& out) {
    if (!propagate(domains)) return false;
    return dfs(domains, out);
  }

  bool exhausted() const { return exhausted_; }
  std::uint64_t candidates() const { return candidates_; }

 private:
  bool propagate(std::vector<Domain>& d) const {
    for (int round = 0; round < 1024; ++round) {
      bool changed = false;
      for (const auto& row : rows_) {
        if (row.not_equal) {
          std::size_t open = 0;
          std::size_t open_var = 0;
          std::int64_t open_coef = 0;
          std::int64_t fixed_sum = 0;
          for (const auto& [v, c] : row.terms) {
            if (d[v].fixed()) {
              fixed_sum += c * d[v].lo;
            } else {
              ++open;
              open_var = v;
              open_coef = c;
            }
          }
          if (open == 0) {
            if (fixed_sum == row.rhs) return false;
          } else if (open == 1) {
            const std::int64_t rem = row.rhs - fixed_sum;
            if (rem % open_coef == 0) {
              const std::int64_t banned = rem / open_coef;
              auto& dom = d[open_var];
              if (banned == dom.lo) {
                ++dom.lo;
                changed = true;
              } else if (banned == dom.hi) {
                --dom.hi;
                changed = true;
              }
              if (dom.empty()) return false;
            }
          }
          continue;
        }
        std::int64_t min_sum = 0;
        for (const auto& [v, c] : row.terms) min_sum += c > 0 ? c * d[v].lo : c * d[v].hi;
        if (min_sum > row.rhs) return false;
        for (const auto& [v, c] : row.terms) {
          const std::int64_t own_min = c > 0 ? c * d[v].lo : c * d[v].hi;
          const std::int64_t slack = row.rhs - (min_sum - own_min);
          auto& dom = d[v];
          if (c > 0) {
            const std::int64_t ub = floor_div(slack, c);
            if (ub < dom.hi) {
              dom.hi = ub;
              changed = true;
            }
          } else {
            const std::int64_t lb = ceil_div(slack, c);
            if (lb > dom.lo) {
              dom.lo = lb;
              changed = true;
            }
          }
          if (dom.empty()) return false;
          // min_sum only grows as bounds tighten; recompute lazily next round.
        }
      }
      if (!changed) return true;
    }
    return true;
  }

  bool dfs(std::vector<Domain>& d, std::vector<std::int64_t>& out) {
    std::size_t pick = d.size();
    for (std::size_t v = 0; v < d.size(); ++v) {
      if (d[v].fixed()) continue;
      if (pick == d.size() || d[v].size() < d[pick].size() ||
          (d[v].size() == d[pick].size() && weight_[v] > weight_[pick]))
        pick = v;
    }
    if (pick == d.size()) {
      out.resize(d.size());
      for (std::size_t v = 0; v < d.size(); ++v) out[v] = d[v].lo;
      return true;
    }
    const Domain dom = d[pick];
    const std::int64_t want = preferred_[pick];
    auto attempt = [&](std::int64_t value) {
      if (candidates_ >= budget_) {
        exhausted_ = true;
        return false;
      }
      ++candidates_;
      std::vector<Domain> next = d;
      next[pick] = {value, value};
      if (!propagate(next)) return false;
      return dfs(next, out);
    };
    if (want >= dom.lo && want <= dom.hi && attempt(want)) return true;
    for (std::int64_t value = dom.lo; value <= dom.hi; ++value) {
      if (exhausted_) return false;
      if (value == want) continue;
      if (attempt(value)) return true;
    }
    return false;
  }

  std::vector<Row> rows_;
  std::vector<std::int64_t> preferred_;
  std::vector<std::size_t> weight_;
  std::uint64_t budget_;
  std::uint64_t candidates_ = 0;
  bool exhausted_ = false;
};

}  // namespace

SolveResult solve(const ByteConstraint& constraint, const SolverOptions& options,
                  std::span<const std::uint8_t> hint) {
  SolveResult result;

  std::map<std::uint32_t, std::size_t> var_of;
  for (const auto& atom : constraint.atoms)
    for (const auto& t : atom.terms) var_of.emplace(t.offset, 0);
  std::vector<std::uint32_t> offsets;
  for (auto& [off, idx] : var_of) {
    idx = offsets.size();
    offsets.push_back(off);
  }

  std::vector<Domain> domains(offsets.size());
  std::vector<std::int64_t> preferred(offsets.size(), 0);
  for (std::size_t v = 0; v < offsets.size(); ++v) {
    // Bytes past the input limit can never be set and always read as 0.
    if (offsets[v] >= options.max_len) domains[v] = {0, 0};
    preferred[v] = input_byte(hint, offsets[v]);
  }

  std::vector<Row> rows;
  for (const auto& atom : constraint.atoms) {
    Row base;
    for (const auto& t : atom.terms) base.terms.emplace_back(var_of[t.offset], t.coef);
    auto negated = [&] {
      Row r = base;
      for (auto& [v, c] : r.terms) c = -c;
      return r;
    };
    switch (atom.rel) {
      case Relation::Le: base.rhs = atom.rhs; rows.push_back(base); break;
      case Relation::Lt: base.rhs = atom.rhs - 1; rows.push_back(base); break;
      case Relation::Ge: { Row r = negated(); r.rhs = -atom.rhs; rows.push_back(r); break; }
      case Relation::Gt: { Row r = negated(); r.rhs = -atom.rhs - 1; rows.push_back(r); break; }
      case Relation::Eq: {
        Row r = negated();
        r.rhs = -atom.rhs;
        base.rhs = atom.rhs;
        rows.push_back(base);
        rows.push_back(r);
        break;
      }
      case Relation::Ne: base.rhs = atom.rhs; base.not_equal = true; rows.push_back(base); break;
    }
  }

  Search search(std::move(rows), offsets.size(), preferred, options.budget);
  std::vector<std::int64_t> values;
  const bool found = search.run(domains, values);
  result.candidates = search.candidates();
  if (!found) {
    result.status = search.exhausted() ? SolveStatus::Unknown : SolveStatus::Unsat;
    return result;
  }

  std::size_t len = hint.size();
  for (std::size_t v = 0; v < offsets.size(); ++v)
    if (values[v] != 0 || offsets[v] < len) len = std::max<std::size_t>(len, offsets[v] + 1);
  len = std::min(len, options.max_len);
  result.input.assign(len, 0);
  std::copy_n(hint.begin(), std::min(hint.size(), len), result.input.begin());
  for (std::size_t v = 0; v < offsets.size(); ++v)
    if (offsets[v] < len) result.input[offsets[v]] = static_cast<std::uint8_t>(values[v]);

  // Every answer is checked against the original atoms before it leaves.
  if (!constraint.holds(result.input)) {
    result.status = SolveStatus::Unknown;
    result.input.clear();
    return result;
  }
  result.status = SolveStatus::Sat;
  return result;
}

}  // namespace errfuzz
