/*
 * Copyright 2026 The skewjoin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "skewjoin/cost_expression.hpp"
#include "skewjoin/error.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

/// Sorted, duplicate-free join output over the sorted attribute names.
struct CanonicalResult {
  std::vector<std::string> attributes;
  std::vector<Row> tuples;
};

/// Nested-loop join: picks one tuple per relation in declaration order and
/// backtracks on the first disagreement.
inline CanonicalResult brute_force_join(const TupleStore& store, const JoinSpec& spec,
                                        std::size_t cap = 10'000'000) {
  CanonicalResult result;
  result.attributes = spec.canonical_attributes();
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < result.attributes.size(); ++i) column[result.attributes[i]] = i;

  const auto& relations = spec.relations();
  std::vector<std::vector<std::size_t>> columns(relations.size());
  for (std::size_t r = 0; r < relations.size(); ++r) {
    for (const auto& a : relations[r].attributes) columns[r].push_back(column.at(a));
  }

  std::vector<const std::string*> values(result.attributes.size(), nullptr);
  auto search = [&](auto&& self, std::size_t r) -> void {
    if (r == relations.size()) {
      if (result.tuples.size() >= cap) {
        fail(ErrorKind::kLimitExceeded, "brute-force result exceeds the cap of " + std::to_string(cap) + " tuples");
      }
      Row row;
      for (const auto* v : values) row.push_back(*v);
      result.tuples.push_back(std::move(row));
      return;
    }
    for (const Row& row : store.rows(store.relation_index(relations[r].name))) {
      std::vector<std::size_t> newly_bound;
      bool ok = true;
      for (std::size_t c = 0; c < row.size(); ++c) {
        auto*& slot = values[columns[r][c]];
        if (slot == nullptr) {
          slot = &row[c];
          newly_bound.push_back(columns[r][c]);
        } else if (*slot != row[c]) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, r + 1);
      for (std::size_t c : newly_bound) values[c] = nullptr;
    }
  };
  search(search, 0);

  std::sort(result.tuples.begin(), result.tuples.end());
  result.tuples.erase(std::unique(result.tuples.begin(), result.tuples.end()), result.tuples.end());
  return result;
}

struct BruteForceShares {
  std::map<std::string, std::int64_t> shares;  // free variables only
  double cost = 0.0;
};

/// Exhaustive search over integer share vectors of the free variables whose
/// product is exactly k. Ties go to the lexicographically smallest vector.
inline BruteForceShares brute_force_shares(const CostExpression& expr, std::int64_t k) {
  const auto& vars = expr.free_variables;
  if (vars.size() > 4) fail(ErrorKind::kLimitExceeded, "brute-force shares support at most 4 free variables");
  if (k < 1 || k > 64) fail(ErrorKind::kLimitExceeded, "brute-force shares support 1 <= k <= 64");

  auto cost_of = [&](const std::vector<std::int64_t>& x) {
    double total = 0.0;
    for (const auto& term : expr.terms) {
      double product = term.coefficient;
      for (const auto& v : term.variables) {
        auto it = std::find(vars.begin(), vars.end(), v);
        if (it != vars.end()) product *= static_cast<double>(x[static_cast<std::size_t>(it - vars.begin())]);
      }
      total += product;
    }
    return total;
  };

  BruteForceShares best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> x(vars.size(), 1);
  auto search = [&](auto&& self, std::size_t i, std::int64_t remaining) -> void {
    if (i == vars.size()) {
      if (remaining != 1) return;
      const double cost = cost_of(x);
      if (cost < best.cost) {
        best.cost = cost;
        best.shares.clear();
        for (std::size_t j = 0; j < vars.size(); ++j) best.shares[vars[j]] = x[j];
      }
      return;
    }
    for (std::int64_t v = 1; v <= remaining; ++v) {
      if (remaining % v != 0) continue;
      x[i] = v;
      self(self, i + 1, remaining / v);
    }
    x[i] = 1;
  };
  search(search, 0, vars.empty() ? 1 : k);
  return best;
}

}  // namespace skewjoin
