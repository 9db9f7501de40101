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

#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace skewjoin {
namespace {

CostExpression expr(std::vector<CostTerm> terms, std::vector<std::string> free) {
  CostExpression e;
  e.terms = std::move(terms);
  e.free_variables = std::move(free);
  return e;
}

RelevantSizes ones(const JoinSpec& spec) {
  RelevantSizes sizes;
  for (const auto& r : spec.relations()) sizes[r.name] = 1;
  return sizes;
}

TEST(GenericCost, Cycle) {
  EXPECT_EQ(build_generic_cost(testing::triangle()).symbolic(), "r1 x3 + r2 x1 + r3 x2");
}

TEST(GenericCost, WorkedJoin) {
  EXPECT_EQ(build_generic_cost(testing::worked_join()).symbolic(), "r cde + s ad + t abe");
}

TEST(GenericCost, SharedAttributeMultipliesNoTerm) {
  auto generic = build_generic_cost(testing::two_way());
  EXPECT_EQ(generic.symbolic(), "r c + s a");
  EXPECT_EQ(generic.free_variables, (std::vector<std::string>{"A", "B", "C"}));
}

TEST(SpecializeCost, SixResidualExpressions) {
  const auto spec = testing::worked_join();
  const auto generic = build_generic_cost(spec);
  const auto combos = enumerate_residual_joins(spec, testing::worked_catalog());
  const std::vector<std::string> expected = {"r c + s + t b",    "r c + s a + t a",    "r c + s a + t a",
                                             "r d + s d + t b",    "r de + s ad + t ae", "r de + s ad + t ae"};
  ASSERT_EQ(combos.size(), expected.size());
  for (std::size_t i = 0; i < combos.size(); ++i) {
    EXPECT_EQ(specialize_cost(spec, generic, combos[i], ones(spec)).symbolic(), expected[i]) << label(combos[i]);
  }
}

TEST(SpecializeCost, CoefficientsAreRelevantSizes) {
  const auto spec = testing::worked_join();
  RelevantSizes sizes{{"R", 10}, {"S", 20}, {"T", 30}};
  auto e = specialize_cost(spec, build_generic_cost(spec), {{"B", "b1"}}, sizes);
  EXPECT_EQ(e.numeric(), "10 c + 20 a + 30 a");
  EXPECT_EQ(e.free_variables, (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(e.pinned, (std::vector<std::string>{"B", "D", "E"}));
}

TEST(EnumerateResidualJoins, CountsAndCap) {
  const auto spec = testing::worked_join();
  EXPECT_EQ(enumerate_residual_joins(spec, testing::worked_catalog()).size(), 6u);
  HeavyHitterCatalog twelve;
  twelve.add("B", {testing::hitter("b1", {}), testing::hitter("b2", {})});
  twelve.add("C", {testing::hitter("c1", {}), testing::hitter("c2", {}), testing::hitter("c3", {})});
  EXPECT_EQ(enumerate_residual_joins(spec, twelve).size(), 12u);
  EXPECT_EQ(enumerate_residual_joins(spec, HeavyHitterCatalog{}).size(), 1u);
  try {
    enumerate_residual_joins(spec, twelve, 10);
    FAIL() << "cap not enforced";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLimitExceeded);
  }
}

TEST(SolveShares, TwoWayHeavyResidual) {
  auto s = solve_shares(expr({{"R", 4, {"y"}}, {"S", 1, {"x"}}}, {"x", "y"}), 16);
  EXPECT_NEAR(s.shares.at("x").real, 8.0, 1e-7);
  EXPECT_NEAR(s.shares.at("y").real, 2.0, 1e-7);
  EXPECT_NEAR(s.real_cost, 16.0, 1e-7);
  EXPECT_EQ(s.shares.at("x").integer, 8);
  EXPECT_EQ(s.shares.at("y").integer, 2);
  EXPECT_EQ(s.k_int, 16);
}

TEST(SolveShares, EqualCycle) {
  auto e = specialize_cost(testing::triangle(), build_generic_cost(testing::triangle()), {},
                           {{"R1", 10}, {"R2", 10}, {"R3", 10}});
  auto s = solve_shares(e, 8);
  for (const auto& x : {"X1", "X2", "X3"}) EXPECT_NEAR(s.shares.at(x).real, 2.0, 1e-7);
  EXPECT_NEAR(s.real_cost, 60.0, 1e-7);
}

TEST(SolveShares, UnequalCycleMatchesReference) {
  // Reference optimum from tests/oracles/derive_values.py.
  auto e = specialize_cost(testing::triangle(), build_generic_cost(testing::triangle()), {},
                           {{"R1", 2}, {"R2", 3}, {"R3", 5}});
  auto s = solve_real_shares(e, 30);
  EXPECT_NEAR(s.cost, 28.964681538168893, 1e-8);
  EXPECT_NEAR(s.shares.at("X1"), 3.218297899557005, 1e-6);
  EXPECT_NEAR(s.shares.at("X2"), 1.9309788016517666, 1e-6);
  EXPECT_NEAR(s.shares.at("X3"), 4.827446915619523, 1e-6);
}

TEST(SolveShares, ChainMiddleRelationIsUnreplicated) {
  auto e = expr({{"R", 3, {"y"}}, {"S", 7, {}}, {"T", 3, {"x"}}}, {"x", "y"});
  auto s = solve_shares(e, 25);
  EXPECT_NEAR(s.shares.at("x").real, 5.0, 1e-7);
  EXPECT_NEAR(s.shares.at("y").real, 5.0, 1e-7);
  EXPECT_NEAR(s.real_cost, 2 * 5 * 3 + 7, 1e-7);
}

TEST(SolveShares, ChainCostIsTwiceRootKrt) {
  // r y + t x with x = sqrt(kr/t), y = sqrt(kt/r) costs 2 sqrt(krt).
  const double r = 9, t = 4, k = 36;
  auto s = solve_real_shares(expr({{"R", r, {"y"}}, {"T", t, {"x"}}}, {"x", "y"}), k);
  EXPECT_NEAR(s.cost, 2 * std::sqrt(k * r * t), 1e-8);
  EXPECT_GT(std::abs(s.cost - std::sqrt(2 * k * r * t)), 1.0);
}

TEST(SolveShares, PinsSharesBelowOne) {
  auto s = solve_shares(expr({{"R", 1, {"y"}}, {"S", 10000, {"x"}}}, {"x", "y"}), 4);
  EXPECT_DOUBLE_EQ(s.shares.at("x").real, 1.0);
  EXPECT_NEAR(s.shares.at("y").real, 4.0, 1e-9);
  EXPECT_NEAR(s.real_cost, 10004.0, 1e-6);
}

TEST(SolveShares, NoFreeVariables) {
  auto e = expr({{"R", 3, {}}, {"S", 4, {}}}, {});
  auto s = solve_shares(e, 50);
  EXPECT_EQ(s.k_int, 1);
  EXPECT_DOUBLE_EQ(s.k_real, 1.0);
  EXPECT_DOUBLE_EQ(s.real_cost, 7.0);
}

TEST(SolveShares, BudgetOfOne) {
  auto s = solve_shares(expr({{"R", 4, {"y"}}, {"S", 1, {"x"}}}, {"x", "y"}), 1);
  EXPECT_EQ(s.k_int, 1);
  EXPECT_NEAR(s.real_cost, 5.0, 1e-9);
}

TEST(SolveShares, ProductEqualsBudget) {
  auto e = specialize_cost(testing::worked_join(), build_generic_cost(testing::worked_join()), {{"C", "c1"}},
                           {{"R", 500}, {"S", 80}, {"T", 300}});
  auto s = solve_shares(e, 48);
  double product = 1.0;
  for (const auto& v : e.free_variables) product *= s.shares.at(v).real;
  EXPECT_NEAR(product, 48.0, 48.0 * 1e-6);
  for (const auto& v : e.pinned) EXPECT_EQ(s.shares.at(v).integer, 1);
}

// Cost depends on x3*x4 and x4*x1 only: a flat direction in log space.
TEST(SolveShares, FlatDirection) {
  auto e = expr({{"R1", 3940, {"X3", "X4"}}, {"R2", 75, {"X1", "X4"}}, {"R3", 4233, {"X1", "X2"}},
                 {"R4", 22, {"X2", "X3"}}},
                {"X1", "X2", "X3", "X4"});
  const double k = 1.3e8;
  auto s = solve_real_shares(e, k);
  const double expected = 2 * std::sqrt(k) * (std::sqrt(3940.0 * 4233) + std::sqrt(75.0 * 22));
  EXPECT_NEAR(s.cost, expected, expected * 1e-9);
}

TEST(SolveShares, StartsNextToABound) {
  auto e = expr({{"R1", 23, {"X2", "X3"}}, {"R2", 23, {"X1", "X3"}}, {"R3", 165, {"X1", "X2"}}},
                {"X1", "X2", "X3"});
  auto s = solve_real_shares(e, 1.5460304941169065);
  EXPECT_DOUBLE_EQ(s.shares.at("X1"), 1.0);
  EXPECT_DOUBLE_EQ(s.shares.at("X2"), 1.0);
  EXPECT_NEAR(s.shares.at("X3"), 1.5460304941169065, 1e-12);
}

TEST(Integerize, AlreadyIntegral) {
  auto e = expr({{"R", 4, {"y"}}, {"S", 1, {"x"}}}, {"x", "y"});
  auto x = integerize_shares(e, {{"x", 8.0}, {"y", 2.0}}, 16);
  EXPECT_EQ(x.at("x"), 8);
  EXPECT_EQ(x.at("y"), 2);
}

TEST(Integerize, TieGoesToFirstName) {
  auto e = expr({{"R", 1, {"y"}}, {"S", 1, {"x"}}}, {"x", "y"});
  const double root = std::sqrt(12.0);
  auto x = integerize_shares(e, {{"x", root}, {"y", root}}, 12);
  EXPECT_EQ(x.at("x"), 4);
  EXPECT_EQ(x.at("y"), 3);
}

TEST(Integerize, AllPinned) {
  auto s = solve_shares(expr({{"R", 2, {}}}, {}), 12);
  EXPECT_EQ(s.k_int, 1);
}

TEST(SizeReducers, TwoWayHeavyResidual) {
  auto sizing = size_reducers(expr({{"R", 100, {"c"}}, {"S", 100, {"a"}}}, {"a", "c"}), 40);
  EXPECT_DOUBLE_EQ(sizing.k, 25.0);
  EXPECT_FALSE(sizing.infeasible);
}

TEST(SizeReducers, EnoughCapacityForOneReducer) {
  auto sizing = size_reducers(expr({{"R", 100, {"c"}}, {"S", 100, {"a"}}}, {"a", "c"}), 200);
  EXPECT_DOUBLE_EQ(sizing.k, 1.0);
}

TEST(SizeReducers, NoFreeVariablesOverCapacityIsInfeasible) {
  auto sizing = size_reducers(expr({{"R", 100, {}}, {"S", 100, {}}}, {}), 150);
  EXPECT_TRUE(sizing.infeasible);
  EXPECT_DOUBLE_EQ(sizing.k, 1.0);
}

TEST(ClosedForms, TwoWay) {
  EXPECT_DOUBLE_EQ(two_way_lower_bound(1e4, 1e4, 100), 2e5);
  EXPECT_DOUBLE_EQ(two_way_lower_bound(1000, 100, 40), 4000.0);
  EXPECT_DOUBLE_EQ(naive_two_way_cost(1000, 100, 40), 5000.0);
  EXPECT_LE(two_way_lower_bound(30, 70, 1), 100.0);
}

TEST(ClosedForms, ChainArbitrary) {
  EXPECT_NEAR(chain_arbitrary_cost({16, 1, 16, 1}, 16).cost, 136.0, 1e-9);
  EXPECT_NEAR(chain_arbitrary_cost({5, 7}, 9).cost, 12.0, 1e-9);
  EXPECT_NEAR(chain_arbitrary_cost({5, 5, 5, 5}, 36).cost, 4 * 5 * 6.0, 1e-9);
  auto e = specialize_cost(chain_spec(4), build_generic_cost(chain_spec(4)), {},
                           {{"R1", 16}, {"R2", 1}, {"R3", 16}, {"R4", 1}});
  EXPECT_NEAR(solve_real_shares(e, 16).cost, 136.0, 136.0 * 1e-6);
  EXPECT_THROW(chain_arbitrary_cost({1, 2, 3}, 8), Error);
}

TEST(ClosedForms, ChainEqual) {
  EXPECT_NEAR(chain_equal_cost(4, 5, {}, 36).cost, 4 * 5 * 6.0, 1e-9);
  auto two = chain_equal_cost(8, 1, {4}, 64);
  ASSERT_EQ(two.subchain_k.size(), 2u);
  EXPECT_NEAR(two.subchain_k[0], 8.0, 1e-9);
  EXPECT_NEAR(two.subchain_k[1], 8.0, 1e-9);
  auto with_pair = chain_equal_cost(6, 3, {2}, 16);
  EXPECT_DOUBLE_EQ(with_pair.subchain_k[0], 1.0);
  EXPECT_NEAR(with_pair.subchain_k[1], 16.0, 1e-9);
  EXPECT_NEAR(with_pair.cost, 2 * 3 + 4 * 3 * 4.0, 1e-9);
  try {
    chain_equal_cost(5, 1, {2}, 16);
    FAIL() << "odd subchain accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupported);
  }
}

TEST(ClosedForms, ChainEqualSingleSubchainMatchesSolver) {
  auto spec = chain_spec(6);
  RelevantSizes sizes;
  for (const auto& r : spec.relations()) sizes[r.name] = 7;
  auto e = specialize_cost(spec, build_generic_cost(spec), {}, sizes);
  auto closed = chain_equal_cost(6, 7, {}, 4096);
  auto numeric = solve_real_shares(e, 4096);
  EXPECT_NEAR(numeric.cost, closed.cost, closed.cost * 1e-6);
  EXPECT_NEAR(e.evaluate(closed.shares), closed.cost, closed.cost * 1e-9);
}

TEST(ClosedForms, Symmetric) {
  const double r = 6, k = 64;
  EXPECT_NEAR(symmetric_cost(3, 2, {r, r, r}, k), 3 * std::cbrt(k * r * r * r), 1e-9);
  EXPECT_NEAR(symmetric_cost(4, 2, {r, r, r, r}, k), 4 * r * std::sqrt(k), 1e-9);
  EXPECT_NEAR(symmetric_cost(5, 3, {r, r, r, r, r}, k), 5 * r * std::pow(k, 1 - 3.0 / 5), 1e-9);
  EXPECT_NEAR(symmetric_cost(3, 2, {2, 3, 5}, 30), 28.964681538168893, 1e-9);
  EXPECT_NEAR(symmetric_cost(4, 2, {3, 5, 7, 11}, 1e4), 2399.7548364103013, 1e-6);
  EXPECT_NEAR(symmetric_cost(5, 3, {2, 3, 4, 5, 6}, 1e5), 1863.9596365956763, 1e-6);
  EXPECT_THROW(symmetric_cost(3, 3, {1, 1, 1}, 8), Error);
}

TEST(ClosedForms, SymmetricShares) {
  auto equal = symmetric_shares(5, 3, {4, 4, 4, 4, 4}, 32);
  for (const auto& [_, a] : equal.shares) EXPECT_NEAR(a, 2.0, 1e-9);
  auto tri = symmetric_shares(3, 2, {2, 3, 5}, 30);
  EXPECT_NEAR(tri.shares.at("X1"), std::cbrt(30.0 * 2 * 5 / 9), 1e-9);
  auto four = symmetric_shares(4, 2, {2, 1, 2, 1}, 16);
  auto spec = cyclic_symmetric_spec(4, 2);
  auto e = specialize_cost(spec, build_generic_cost(spec), {}, {{"R1", 2}, {"R2", 1}, {"R3", 2}, {"R4", 1}});
  EXPECT_NEAR(e.evaluate(four.shares), solve_real_shares(e, 16).cost, 24.0 * 1e-6);
  EXPECT_NEAR(e.evaluate(four.shares), 24.0, 1e-9);
}

TEST(Prune, HeavyValueFillingMostOfRelationSurvives) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  for (int i = 0; i < 1000; ++i) store.add(0, {std::to_string(i), i < 500 ? "b" : std::to_string(i)});
  for (int i = 0; i < 300; ++i) store.add(1, {i < 100 ? "b" : std::to_string(i), std::to_string(i)});
  HeavyHitterThreshold threshold;
  threshold.q = 50;
  auto catalog = detect_heavy_hitters(store, spec, threshold);
  PlannerOptions options;
  options.k = 16;
  auto plan = build_plan(spec, store, catalog, options);
  ASSERT_EQ(plan.residuals.size(), 2u);
  EXPECT_EQ(plan.routing.at(1), 1u);
}

TEST(Prune, MildHeavyValueIsRoutedToOrdinaryPlan) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  for (int i = 0; i < 10000; ++i) store.add(0, {std::to_string(i), std::to_string(i % 5000)});
  for (int i = 0; i < 10000; ++i) store.add(1, {std::to_string(i % 5000), std::to_string(i)});
  for (int i = 0; i < 2; ++i) {
    store.add(0, {"x" + std::to_string(i), "b"});
    store.add(1, {"b", "y" + std::to_string(i)});
  }
  HeavyHitterCatalog catalog;
  catalog.add("B", {testing::hitter("b", {{"R", 2}, {"S", 2}})});
  PlannerOptions options;
  options.k = 10;
  auto plan = build_plan(spec, store, catalog, options);
  ASSERT_EQ(plan.residuals.size(), 1u);
  EXPECT_EQ(plan.routing.at(1), 0u);
  EXPECT_EQ(plan.residuals[0].absorbed, (std::vector<std::size_t>{1}));
  EXPECT_EQ(plan.residuals[0].relevant_sizes.at("R"), 10002u);
}

TEST(Prune, WholeRelationOneValueNeverSubsumed) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  for (int i = 0; i < 200; ++i) store.add(0, {std::to_string(i), "b"});
  for (int i = 0; i < 200; ++i) store.add(1, {i < 100 ? "b" : std::to_string(i), std::to_string(i)});
  HeavyHitterThreshold threshold;
  threshold.q = 50;
  auto catalog = detect_heavy_hitters(store, spec, threshold);
  PlannerOptions options;
  options.k = 64;
  options.drop_empty = false;
  auto plan = build_plan(spec, store, catalog, options);
  EXPECT_EQ(plan.routing.at(1), 1u);
}

TEST(BuildPlan, NeedsExactlyOneOfKAndQ) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  PlannerOptions options;
  EXPECT_THROW(build_plan(spec, store, {}, options), Error);
  options.k = 4;
  options.q = 10;
  EXPECT_THROW(build_plan(spec, store, {}, options), Error);
}

TEST(BuildPlan, InvariantsOnRandomData) {
  const std::vector<JoinSpec> specs = {testing::two_way(), testing::three_chain(), testing::triangle(),
                                       testing::worked_join()};
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto& spec = specs[seed % specs.size()];
    std::map<std::string, int> planted;
    for (const auto& a : spec.attributes()) planted[a] = static_cast<int>(seed % 3);
    auto inst = testing::random_instance(spec, seed, 400, 30, planted, 0.3);
    HeavyHitterThreshold threshold;
    threshold.tau = 0.1;
    auto catalog = detect_heavy_hitters(inst.store, spec, threshold);
    PlannerOptions options;
    options.k = static_cast<double>(4 + seed * 5);
    auto plan = build_plan(spec, inst.store, catalog, options);
    for (const auto& r : plan.residuals) {
      std::set<std::string> active;
      for (const auto& a : spec.attributes()) {
        if (!r.types.count(a)) active.insert(a);
      }
      for (const auto& a : dominated_attributes(spec, active)) EXPECT_EQ(r.share_of(a), 1) << a;
      for (const auto& [a, _] : r.types) EXPECT_EQ(r.share_of(a), 1) << a;
      EXPECT_LE(r.shares.k_int, static_cast<std::int64_t>(*options.k));
      EXPECT_DOUBLE_EQ(r.predicted_cost, r.cost.evaluate(r.shares.integer_map()));
    }
    // Routing is total over the combinations that can produce output.
    for (const auto& [combination, target] : plan.routing) EXPECT_NO_THROW(plan.residual(target));
  }
}

}  // namespace
}  // namespace skewjoin
