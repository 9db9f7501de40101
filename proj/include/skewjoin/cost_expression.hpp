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
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "skewjoin/error.hpp"
#include "skewjoin/heavy_hitters.hpp"
#include "skewjoin/join_model.hpp"

namespace skewjoin {

/// coefficient * product(shares of `variables`). The coefficient is the
/// (relevant) size of `relation`; `variables` are sorted by name.
struct CostTerm {
  std::string relation;
  double coefficient = 0.0;
  std::vector<std::string> variables;
};

/// Communication cost of one round of the hypercube shuffle:
///   sum_j r_j * prod_{X not in R_j} x_X,   subject to prod_{X free} x_X = k.
/// Pinned attributes (heavy-hitter typed or dominated) have share 1 and are
/// absent from both the terms and the constraint.
struct CostExpression {
  std::vector<CostTerm> terms;
  std::vector<std::string> free_variables;  // sorted
  std::vector<std::string> pinned;          // sorted

  template <typename ShareMap>
  double evaluate(const ShareMap& shares) const {
    double total = 0.0;
    for (const auto& term : terms) {
      double product = term.coefficient;
      for (const auto& variable : term.variables) {
        auto it = shares.find(variable);
        if (it == shares.end()) fail(ErrorKind::kInvalidArgument, "no share for variable '" + variable + "'");
        product *= static_cast<double>(it->second);
      }
      total += product;
    }
    return total;
  }

  double coefficient_sum() const {
    double total = 0.0;
    for (const auto& term : terms) total += term.coefficient;
    return total;
  }

  /// Symbolic form with relation and attribute names lower-cased, e.g.
  /// "r cde + s ad + t abe". Variable names are concatenated when they are all
  /// single characters and joined with '*' otherwise.
  std::string symbolic() const { return render(false); }

  /// Same as symbolic() but with numeric coefficients, e.g. "10 c + 20 a".
  std::string numeric() const { return render(true); }

 private:
  std::string render(bool numbers) const {
    auto lower = [](std::string s) {
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    };
    std::ostringstream out;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto& term = terms[t];
      if (t > 0) out << " + ";
      if (numbers) {
        out << term.coefficient;
      } else {
        out << lower(term.relation);
      }
      if (term.variables.empty()) continue;
      bool single = std::all_of(term.variables.begin(), term.variables.end(),
                                [](const std::string& v) { return v.size() == 1; });
      out << " ";
      for (std::size_t i = 0; i < term.variables.size(); ++i) {
        if (i > 0 && !single) out << "*";
        out << lower(term.variables[i]);
      }
    }
    return out.str();
  }
};

/// One term per relation; the term of R_j carries every attribute absent from
/// R_j. Coefficients are the declared relation sizes (0 when undeclared).
inline CostExpression build_generic_cost(const JoinSpec& spec) {
  CostExpression expr;
  expr.free_variables = spec.attributes();
  std::sort(expr.free_variables.begin(), expr.free_variables.end());
  for (const auto& relation : spec.relations()) {
    CostTerm term;
    term.relation = relation.name;
    term.coefficient = static_cast<double>(relation.declared_size.value_or(0));
    for (const auto& variable : expr.free_variables) {
      if (!relation.contains(variable)) term.variables.push_back(variable);
    }
    expr.terms.push_back(std::move(term));
  }
  return expr;
}

/// Cost expression of one residual join: heavy-hitter typed attributes are
/// pinned to share 1, dominance is re-applied among the remaining attributes
/// and the coefficients become the residual's relevant sizes.
inline CostExpression specialize_cost(const JoinSpec& spec, const CostExpression& generic, const TypeAssignment& types,
                                      const RelevantSizes& sizes) {
  std::set<std::string> active(generic.free_variables.begin(), generic.free_variables.end());
  std::set<std::string> pinned(generic.pinned.begin(), generic.pinned.end());
  for (const auto& [attribute, _] : types) {
    if (!spec.has_attribute(attribute)) fail(ErrorKind::kInvalidArgument, "unknown attribute '" + attribute + "'");
    active.erase(attribute);
    pinned.insert(attribute);
  }
  for (const auto& attribute : dominated_attributes(spec, active)) {
    active.erase(attribute);
    pinned.insert(attribute);
  }

  CostExpression expr;
  expr.free_variables.assign(active.begin(), active.end());
  expr.pinned.assign(pinned.begin(), pinned.end());
  for (const auto& generic_term : generic.terms) {
    CostTerm term;
    term.relation = generic_term.relation;
    auto it = sizes.find(term.relation);
    if (it == sizes.end()) fail(ErrorKind::kInvalidArgument, "no relevant size for relation '" + term.relation + "'");
    term.coefficient = static_cast<double>(it->second);
    for (const auto& variable : generic_term.variables) {
      if (active.count(variable)) term.variables.push_back(variable);
    }
    expr.terms.push_back(std::move(term));
  }
  return expr;
}

}  // namespace skewjoin
