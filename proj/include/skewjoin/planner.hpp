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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "skewjoin/cost_expression.hpp"
#include "skewjoin/error.hpp"
#include "skewjoin/heavy_hitters.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/routing.hpp"
#include "skewjoin/share_solver.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

struct PlannerOptions {
  /// Fixed reducer budget given to every residual join.
  std::optional<double> k;
  /// Reducer capacity; each residual gets the fewest reducers whose expected
  /// load stays within it.
  std::optional<double> q;
  std::size_t combination_cap = 10000;
  bool prune = true;
  /// Drop residuals in which some relation has no relevant tuple.
  bool drop_empty = true;
  std::uint64_t hash_seed = 0;
  double max_k = 1e12;
  SolverOptions solver;
};

struct ResidualPlan {
  std::size_t id = 0;  // combination id
  TypeAssignment types;
  RelevantSizes relevant_sizes;
  CostExpression cost;
  ShareAssignment shares;
  double k = 1.0;
  double predicted_cost = 0.0;  // cost expression at the integer shares
  bool infeasible = false;
  std::vector<std::size_t> absorbed;  // subsumed combinations routed here

  std::string label() const { return skewjoin::label(types); }

  /// Attributes with integer share > 1, sorted; these are the key slots.
  std::vector<std::string> slot_attributes() const {
    std::vector<std::string> out;
    for (const auto& [name, value] : shares.shares) {
      if (value.integer > 1) out.push_back(name);
    }
    return out;
  }

  std::int64_t share_of(const std::string& attribute) const {
    auto it = shares.shares.find(attribute);
    return it == shares.shares.end() ? 1 : it->second.integer;
  }
};

struct JoinPlan {
  JoinSpec spec;
  HeavyHitterCatalog catalog;
  std::uint64_t hash_seed = 0;
  std::optional<double> k;
  std::optional<double> q;
  std::size_t combination_count = 1;
  std::vector<ResidualPlan> residuals;
  /// combination id -> residual id. Absent combinations are dropped.
  std::map<std::size_t, std::size_t> routing;

  double predicted_cost() const {
    double total = 0.0;
    for (const auto& residual : residuals) total += residual.predicted_cost;
    return total;
  }

  std::int64_t reducer_count() const {
    std::int64_t total = 0;
    for (const auto& residual : residuals) total += residual.shares.k_int;
    return total;
  }

  const ResidualPlan& residual(std::size_t id) const {
    for (const auto& r : residuals) {
      if (r.id == id) return r;
    }
    fail(ErrorKind::kInvalidArgument, "no residual with id " + std::to_string(id));
  }
};

/// Full Cartesian product of per-attribute type sets, in combination-id order.
inline std::vector<TypeAssignment> enumerate_residual_joins(const JoinSpec& spec, const HeavyHitterCatalog& catalog,
                                                            std::size_t cap = 10000) {
  for (const auto& attribute : catalog.attributes()) {
    if (!spec.has_attribute(attribute)) fail(ErrorKind::kInvalidArgument, "catalog attribute '" + attribute + "' not in join");
  }
  const CombinationSpace space(catalog);
  const std::size_t count = space.size();
  if (count > cap) {
    fail(ErrorKind::kLimitExceeded, std::to_string(count) + " type combinations exceed the cap of " +
                                        std::to_string(cap) + "; raise the heavy-hitter threshold");
  }
  std::vector<TypeAssignment> out;
  out.reserve(count);
  for (std::size_t id = 0; id < count; ++id) out.push_back(space.assignment(id));
  return out;
}

struct ReducerSizing {
  double k = 1.0;
  bool infeasible = false;
  ShareAssignment shares;
};

/// Smallest integer k with optimal_cost(k) / k <= q. The expected load
/// cost(k)/k is non-increasing in k, so an exponential then binary search
/// suffices. Expressions without free variables cannot spread their tuples:
/// they get one reducer and are infeasible when their total exceeds q.
inline ReducerSizing size_reducers(const CostExpression& expr, double q, double max_k = 1e12,
                                   const SolverOptions& options = {}) {
  if (!(q >= 1.0)) fail(ErrorKind::kInvalidArgument, "reducer capacity q must be >= 1");
  ReducerSizing out;
  auto load = [&](double k) { return solve_real_shares(expr, k, options).cost / k; };
  if (expr.free_variables.empty() || load(1.0) <= q) {
    out.k = 1.0;
    out.infeasible = expr.coefficient_sum() > q;
    out.shares = solve_shares(expr, 1.0, options);
    return out;
  }
  double hi = 2.0;
  while (load(hi) > q) {
    if (hi >= max_k) {
      out.k = max_k;
      out.infeasible = true;
      out.shares = solve_shares(expr, max_k, options);
      return out;
    }
    hi = std::min(hi * 2.0, max_k);
  }
  double lo = std::floor(hi / 2.0);  // load(lo) > q
  while (hi - lo > 1.0) {
    double mid = std::floor((lo + hi) / 2.0);
    (load(mid) <= q ? hi : lo) = mid;
  }
  out.k = hi;
  out.shares = solve_shares(expr, hi, options);
  return out;
}

struct PruneResult {
  std::vector<std::size_t> survivors;
  std::map<std::size_t, std::size_t> routing;  // every combination -> survivor
};

/// Removes subsumed combinations. C' is subsumed by C when they differ only on
/// attributes that are ordinary in C and heavy in C', and for each such
/// attribute B and each relation R containing B, C's share of B is below
/// r/b_h (r = C's relevant size of R, b_h = frequency of C's heavy value in
/// R). Combinations are visited by increasing number of heavy attributes; a
/// combination is only tested against survivors, nearest first.
inline PruneResult prune_subsumed(const JoinSpec& spec, const HeavyHitterCatalog& catalog,
                                  const std::vector<ResidualPlan>& plans) {
  const CombinationSpace space(catalog);
  const auto& attrs = catalog.attributes();
  std::vector<const ResidualPlan*> order;
  for (const auto& plan : plans) order.push_back(&plan);
  std::stable_sort(order.begin(), order.end(), [&](const ResidualPlan* a, const ResidualPlan* b) {
    auto ha = space.heavy_count(a->id), hb = space.heavy_count(b->id);
    return ha != hb ? ha < hb : a->id < b->id;
  });

  auto subsumes = [&](const ResidualPlan& base, const ResidualPlan& candidate, std::size_t& distance) {
    auto cb = space.choices(base.id), cc = space.choices(candidate.id);
    distance = 0;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      if (cb[i] == cc[i]) continue;
      if (cb[i] != 0 || cc[i] == 0) return false;
      ++distance;
      const auto& hitter = catalog.heavy_hitters(attrs[i])[cc[i] - 1];
      auto share_it = base.shares.shares.find(attrs[i]);
      const double share = share_it == base.shares.shares.end() ? 1.0 : share_it->second.real;
      for (std::size_t r : spec.incidence(attrs[i])) {
        const auto& name = spec.relations()[r].name;
        const double frequency = static_cast<double>(hitter.frequency_in(name));
        if (frequency == 0.0) continue;
        auto size_it = base.relevant_sizes.find(name);
        const double relevant = size_it == base.relevant_sizes.end() ? 0.0 : static_cast<double>(size_it->second);
        if (!(share < relevant / frequency)) return false;
      }
    }
    return distance > 0;
  };

  PruneResult out;
  std::vector<const ResidualPlan*> survivors;
  for (const ResidualPlan* candidate : order) {
    const ResidualPlan* target = nullptr;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const ResidualPlan* base : survivors) {
      std::size_t distance = 0;
      if (subsumes(*base, *candidate, distance) && distance < best) {
        best = distance;
        target = base;
      }
    }
    if (target) {
      out.routing[candidate->id] = target->id;
    } else {
      survivors.push_back(candidate);
      out.routing[candidate->id] = candidate->id;
    }
  }
  for (const auto* s : survivors) out.survivors.push_back(s->id);
  std::sort(out.survivors.begin(), out.survivors.end());
  return out;
}

/// Relevant sizes of each residual after routing: a tuple counts for residual
/// X when some combination routed to X is compatible with it.
inline std::map<std::size_t, RelevantSizes> count_routed_sizes(const TupleStore& store, const JoinSpec& spec,
                                                               const HeavyHitterCatalog& catalog,
                                                               const std::map<std::size_t, std::size_t>& routing) {
  ResidualRouter router(spec, catalog, routing);
  std::map<std::size_t, RelevantSizes> out;
  for (const auto& [_, residual] : routing) {
    for (const auto& relation : spec.relations()) out[residual][relation.name] = 0;
  }
  for (std::size_t r = 0; r < spec.relations().size(); ++r) {
    std::map<ResidualRouter::Projection, std::size_t> histogram;
    for (const auto& row : store.rows(r)) ++histogram[tuple_types(spec, catalog, r, row)];
    for (const auto& [projection, count] : histogram) {
      for (std::size_t residual : router.targets(r, projection)) out[residual][spec.relations()[r].name] += count;
    }
  }
  return out;
}

namespace detail {

inline void solve_residual(ResidualPlan& plan, const PlannerOptions& options) {
  if (options.q) {
    auto sizing = size_reducers(plan.cost, *options.q, options.max_k, options.solver);
    plan.k = sizing.k;
    plan.infeasible = sizing.infeasible;
    plan.shares = std::move(sizing.shares);
  } else {
    plan.k = plan.cost.free_variables.empty() ? 1.0 : *options.k;
    plan.shares = solve_shares(plan.cost, *options.k, options.solver);
  }
  plan.predicted_cost = plan.shares.integer_cost;
}

}  // namespace detail

/// Plans every residual join: enumerate type combinations, count relevant
/// sizes, specialise and solve each cost expression, prune subsumed
/// combinations (re-solving survivors on their merged sizes) and drop
/// residuals that cannot produce output.
inline JoinPlan build_plan(const JoinSpec& spec_in, const TupleStore& store, const HeavyHitterCatalog& catalog,
                           const PlannerOptions& options) {
  if (options.k.has_value() == options.q.has_value()) {
    fail(ErrorKind::kInvalidArgument, "exactly one of k (reducer budget) or q (reducer capacity) must be set");
  }
  if (options.k && !(*options.k >= 1.0)) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
  JoinPlan plan;
  plan.spec = validate_spec(spec_in);
  const JoinSpec& spec = plan.spec;
  plan.catalog = catalog;
  plan.hash_seed = options.hash_seed;
  plan.k = options.k;
  plan.q = options.q;

  const auto combinations = enumerate_residual_joins(spec, catalog, options.combination_cap);
  plan.combination_count = combinations.size();
  const auto sizes = count_relevant_sizes(store, spec, catalog, combinations);
  const auto generic = build_generic_cost(spec);

  std::vector<ResidualPlan> all;
  all.reserve(combinations.size());
  for (std::size_t id = 0; id < combinations.size(); ++id) {
    ResidualPlan residual;
    residual.id = id;
    residual.types = combinations[id];
    residual.relevant_sizes = sizes[id];
    residual.cost = specialize_cost(spec, generic, residual.types, residual.relevant_sizes);
    detail::solve_residual(residual, options);
    all.push_back(std::move(residual));
  }

  PruneResult pruned;
  if (options.prune) {
    pruned = prune_subsumed(spec, catalog, all);
  } else {
    for (const auto& r : all) {
      pruned.survivors.push_back(r.id);
      pruned.routing[r.id] = r.id;
    }
  }

  const bool any_pruned = pruned.survivors.size() != all.size();
  std::map<std::size_t, RelevantSizes> merged;
  if (any_pruned) merged = count_routed_sizes(store, spec, catalog, pruned.routing);

  std::set<std::size_t> kept;
  for (std::size_t id : pruned.survivors) {
    ResidualPlan residual = all[id];
    if (any_pruned && merged.at(id) != residual.relevant_sizes) {
      residual.relevant_sizes = merged.at(id);
      residual.cost = specialize_cost(spec, generic, residual.types, residual.relevant_sizes);
      detail::solve_residual(residual, options);
    }
    if (options.drop_empty) {
      bool empty = std::any_of(residual.relevant_sizes.begin(), residual.relevant_sizes.end(),
                               [](const auto& e) { return e.second == 0; });
      if (empty) continue;
    }
    kept.insert(id);
    plan.residuals.push_back(std::move(residual));
  }
  for (const auto& [combination, target] : pruned.routing) {
    if (!kept.count(target)) continue;
    plan.routing[combination] = target;
  }
  for (auto& residual : plan.residuals) {
    for (const auto& [combination, target] : plan.routing) {
      if (target == residual.id && combination != residual.id) residual.absorbed.push_back(combination);
    }
  }
  return plan;
}

}  // namespace skewjoin
