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

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace skewjoin {
namespace {

TEST(DetectHeavyHitters, ValueAboveCapacityIsHeavy) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  for (int i = 0; i < 100000; ++i) store.add(0, {std::to_string(i), i % 10 == 0 ? "b" : std::to_string(i)});
  for (int i = 0; i < 10; ++i) store.add(1, {std::to_string(i), "c"});
  HeavyHitterThreshold threshold;
  threshold.q = 1000;
  auto catalog = detect_heavy_hitters(store, spec, threshold);
  ASSERT_EQ(catalog.attributes(), (std::vector<std::string>{"B"}));
  ASSERT_EQ(catalog.heavy_hitters("B").size(), 1u);
  EXPECT_EQ(catalog.heavy_hitters("B")[0].value, "b");
  EXPECT_EQ(catalog.heavy_hitters("B")[0].frequency_in("R"), 10000u);
  EXPECT_EQ(catalog.heavy_hitters("B")[0].frequency_in("S"), 0u);
}

TEST(DetectHeavyHitters, UniformDataHasNone) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  for (int i = 0; i < 500; ++i) {
    store.add(0, {std::to_string(i), std::to_string(i)});
    store.add(1, {std::to_string(i), std::to_string(i)});
  }
  HeavyHitterThreshold threshold;
  threshold.q = 10;
  EXPECT_TRUE(detect_heavy_hitters(store, spec, threshold).empty());
}

TEST(DetectHeavyHitters, FractionThresholdReportsExactCounts) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  for (int i = 0; i < 1000; ++i) store.add(0, {std::to_string(i), i < 30 ? "v" : std::to_string(i)});
  for (int i = 0; i < 2000; ++i) store.add(1, {i < 200 ? "v" : std::to_string(i), "x"});
  HeavyHitterThreshold threshold;
  threshold.tau = 0.05;
  auto catalog = detect_heavy_hitters(store, spec, threshold);
  ASSERT_TRUE(catalog.is_heavy("B", "v"));
  const auto& h = catalog.heavy_hitters("B")[0];
  EXPECT_EQ(h.frequency_in("S"), 200u);
  EXPECT_EQ(h.frequency_in("R"), 30u);  // not heavy in R, still counted exactly
}

TEST(DetectHeavyHitters, SkipsDominatedAttributes) {
  auto spec = testing::three_chain();
  TupleStore store(spec);
  for (int i = 0; i < 100; ++i) {
    store.add(0, {"a", std::to_string(i)});
    store.add(1, {std::to_string(i), std::to_string(i)});
    store.add(2, {std::to_string(i), "d"});
  }
  HeavyHitterThreshold threshold;
  threshold.q = 5;
  EXPECT_TRUE(detect_heavy_hitters(store, spec, threshold).empty());
}

TEST(DetectHeavyHitters, NeedsAThreshold) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  EXPECT_THROW(detect_heavy_hitters(store, spec, HeavyHitterThreshold{}), Error);
}

TEST(CombinationSpace, FirstAttributeVariesFastest) {
  CombinationSpace space(testing::worked_catalog());
  ASSERT_EQ(space.size(), 6u);
  EXPECT_EQ(label(space.assignment(0)), "ordinary");
  EXPECT_EQ(label(space.assignment(1)), "B=b1");
  EXPECT_EQ(label(space.assignment(2)), "B=b2");
  EXPECT_EQ(label(space.assignment(3)), "C=c1");
  EXPECT_EQ(label(space.assignment(4)), "B=b1,C=c1");
  EXPECT_EQ(label(space.assignment(5)), "B=b2,C=c1");
  for (std::size_t id = 0; id < 6; ++id) EXPECT_EQ(space.id(space.assignment(id)), id);
}

TEST(RelevantSizes, CountsTuplesMatchingEveryContainedAttribute) {
  auto spec = testing::worked_join();
  auto catalog = testing::worked_catalog();
  TupleStore store(spec);
  store.add(0, {"1", "b1"});
  store.add(0, {"2", "x"});
  store.add(1, {"b1", "e", "c1"});
  store.add(1, {"b1", "e", "z"});
  store.add(1, {"y", "e", "c1"});
  store.add(2, {"c1", "d"});
  store.add(2, {"q", "d"});
  const auto combos = enumerate_residual_joins(spec, catalog);
  const auto sizes = count_relevant_sizes(store, spec, catalog, combos);
  // B=b1 and C=c1: only S's first tuple.
  EXPECT_EQ(sizes[4].at("S"), 1u);
  EXPECT_EQ(sizes[4].at("R"), 1u);
  EXPECT_EQ(sizes[4].at("T"), 1u);
  EXPECT_EQ(sizes[0].at("S"), 0u);
  EXPECT_EQ(sizes[0].at("R"), 1u);
}

TEST(RelevantSizes, NoHeavyHittersGivesFullSizes) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  store.add(0, {"1", "2"});
  store.add(1, {"2", "3"});
  store.add(1, {"2", "4"});
  const auto sizes = count_relevant_sizes(store, spec, HeavyHitterCatalog{}, {TypeAssignment{}});
  EXPECT_EQ(sizes[0].at("R"), 1u);
  EXPECT_EQ(sizes[0].at("S"), 2u);
}

TEST(RelevantSizes, PartitionPropertyOnRandomData) {
  auto spec = testing::worked_join();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = testing::random_instance(spec, seed, 300, 20, {{"B", 2}, {"C", 3}}, 0.3);
    HeavyHitterThreshold threshold;
    threshold.tau = 0.08;
    auto catalog = detect_heavy_hitters(inst.store, spec, threshold);
    const auto combos = enumerate_residual_joins(spec, catalog);
    const auto sizes = count_relevant_sizes(inst.store, spec, catalog, combos);
    CombinationSpace space(catalog);
    for (std::size_t r = 0; r < spec.relations().size(); ++r) {
      const auto& relation = spec.relations()[r];
      // Sum over distinct projections of the combinations onto the relation.
      std::set<std::vector<std::size_t>> seen;
      std::size_t total = 0;
      for (std::size_t id = 0; id < combos.size(); ++id) {
        auto choices = space.choices(id);
        std::vector<std::size_t> projection;
        for (std::size_t i = 0; i < catalog.attributes().size(); ++i) {
          projection.push_back(relation.contains(catalog.attributes()[i]) ? choices[i] : SIZE_MAX);
        }
        if (seen.insert(projection).second) total += sizes[id].at(relation.name);
      }
      EXPECT_EQ(total, inst.store.size(r)) << "seed " << seed << " relation " << relation.name;
    }
    // Soundness and completeness of the catalog against a direct recount.
    for (const auto& attribute : spec.attributes()) {
      for (std::size_t r : spec.incidence(attribute)) {
        std::map<std::string, std::size_t> counts;
        const auto pos = *spec.relations()[r].position(attribute);
        for (const auto& row : inst.store.rows(r)) ++counts[row[pos]];
        for (const auto& [value, count] : counts) {
          const bool heavy_here = count > 0.08 * static_cast<double>(inst.store.size(r));
          const bool dominated = dominated_attributes(spec, all_attributes(spec)).count(attribute) > 0;
          if (heavy_here && !dominated) EXPECT_TRUE(catalog.is_heavy(attribute, value));
          if (catalog.is_heavy(attribute, value)) {
            EXPECT_EQ(catalog.heavy_hitters(attribute)[*catalog.index_of(attribute, value)].frequency_in(
                          spec.relations()[r].name),
                      count);
          }
        }
      }
    }
  }
}

TEST(Catalog, JsonRoundTrip) {
  auto catalog = testing::worked_catalog();
  auto back = catalog_from_json(catalog_to_json(catalog));
  EXPECT_EQ(back.attributes(), catalog.attributes());
  EXPECT_EQ(back.heavy_hitters("B")[1].value, "b2");
  EXPECT_EQ(back.heavy_hitters("C")[0].frequency_in("T"), 1u);
}

}  // namespace
}  // namespace skewjoin
