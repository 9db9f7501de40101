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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace skewjoin {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("skewjoin_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

GeneratorConfig planted_config(double fraction) {
  GeneratorConfig config;
  config.seed = 9;
  RelationConfig r{"R", {"A", "B"}, 10000, {}};
  r.columns["B"].domain = 500;
  r.columns["B"].planted = {{"b", fraction}};
  RelationConfig s{"S", {"B", "C"}, 300, {}};
  config.relations = {r, s};
  return config;
}

std::size_t count_value(const TupleStore& store, std::size_t relation, std::size_t column, const std::string& v) {
  std::size_t n = 0;
  for (const auto& row : store.rows(relation)) n += row[column] == v;
  return n;
}

TEST(Generate, PlantedFractionIsExact) {
  auto [spec, store] = generate(planted_config(0.1));
  EXPECT_EQ(count_value(store, 0, 1, "b"), 1000u);
  EXPECT_EQ(store.size(1), 300u);
  auto odd = planted_config(0.0333);
  auto [spec2, store2] = generate(odd);
  EXPECT_EQ(count_value(store2, 0, 1, "b"), 333u);
}

TEST(Generate, FullFractionIsSingleValued) {
  auto [spec, store] = generate(planted_config(1.0));
  EXPECT_EQ(count_value(store, 0, 1, "b"), 10000u);
}

TEST(Generate, ZipfWithZeroExponentIsUniform) {
  auto config = planted_config(0.1);
  auto zipf = config;
  zipf.relations[0].columns["B"].distribution = "zipf";
  zipf.relations[0].columns["B"].zipf_s = 0.0;
  EXPECT_EQ(generate(config).second.rows(0), generate(zipf).second.rows(0));
}

TEST(Generate, ZipfIsSkewed) {
  GeneratorConfig config;
  RelationConfig r{"R", {"A", "B"}, 20000, {}};
  r.columns["B"] = ColumnConfig{"zipf", 1000, 1.2, {}};
  config.relations = {r, RelationConfig{"S", {"B", "C"}, 10, {}}};
  auto [spec, store] = generate(config);
  EXPECT_GT(count_value(store, 0, 1, "0"), count_value(store, 0, 1, "10") * 5);
}

TEST(Generate, RejectsBadConfig) {
  auto config = planted_config(0.6);
  config.relations[0].columns["B"].planted.push_back({"c", 0.6});
  EXPECT_THROW(generate(config), Error);
  auto zero = planted_config(0.0);
  EXPECT_THROW(generate(zero), Error);
}

TEST(Generate, ReproducibleFiles) {
  auto a = scratch("gen_a"), b = scratch("gen_b");
  for (const auto& dir : {a, b}) {
    auto [spec, store] = generate(planted_config(0.2));
    save_dataset(dir, spec, store);
  }
  for (const auto& name : {"spec.json", "R.tsv", "S.tsv"}) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  auto other = planted_config(0.2);
  other.seed = 10;
  auto [spec, store] = generate(other);
  EXPECT_NE(store.rows(0), generate(planted_config(0.2)).second.rows(0));
}

TEST(Generate, JsonConfig) {
  auto config = generator_config_from_json(nlohmann::json::parse(R"({
    "seed": 3,
    "relations": [
      {"name": "R", "attributes": ["A", "B"], "tuples": 40,
       "columns": {"B": {"distribution": "uniform", "domain": 10, "planted": [{"value": "b", "fraction": 0.25}]}}},
      {"name": "S", "attributes": ["B", "C"], "tuples": 20, "columns": {"C": {"distribution": "sequential"}}}
    ]})"));
  auto [spec, store] = generate(config);
  EXPECT_EQ(count_value(store, 0, 1, "b"), 10u);
  std::set<std::string> c;
  for (const auto& row : store.rows(1)) c.insert(row[1]);
  EXPECT_EQ(c.size(), 20u);
}

TEST(TsvIo, WellFormedFile) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  std::istringstream in("#relation\tR\n#attrs\tA\tB\n1\t2\n3\t4\n5\t6\n");
  EXPECT_EQ(read_relation_tsv(in, spec, store), 3u);
  EXPECT_EQ(store.rows(0)[2], (Row{"5", "6"}));
}

TEST(TsvIo, WrongArityNamesTheLine) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  std::istringstream in("#relation\tR\n#attrs\tA\tB\n1\t2\n3\n");
  try {
    read_relation_tsv(in, spec, store, "r.tsv");
    FAIL() << "arity error not reported";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("r.tsv:4"), std::string::npos) << e.what();
  }
}

TEST(TsvIo, HeaderOnlyIsEmptyRelation) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  std::istringstream in("#relation\tS\n#attrs\tB\tC\n");
  EXPECT_EQ(read_relation_tsv(in, spec, store), 0u);
  EXPECT_EQ(store.size(1), 0u);
}

TEST(TsvIo, UnknownRelationAndAttributeMismatch) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  std::istringstream unknown("#relation\tQ\n#attrs\tA\n");
  EXPECT_THROW(read_relation_tsv(unknown, spec, store), Error);
  std::istringstream mismatch("#relation\tR\n#attrs\tB\tA\n");
  EXPECT_THROW(read_relation_tsv(mismatch, spec, store), Error);
}

TEST(TsvIo, RoundTrip) {
  auto spec = testing::two_way();
  std::ostringstream out;
  write_relation_tsv(out, spec.relations()[0], {{"x", "y"}, {"", "z"}});
  EXPECT_EQ(out.str(), "#relation\tR\n#attrs\tA\tB\nx\ty\n\tz\n");
  TupleStore store(spec);
  std::istringstream in(out.str());
  read_relation_tsv(in, spec, store);
  EXPECT_EQ(store.rows(0), (std::vector<Row>{{"x", "y"}, {"", "z"}}));
}

TEST(SpecIo, DeclaredSizeIsChecked) {
  auto dir = scratch("spec_size");
  auto [spec, store] = generate(planted_config(0.1));
  save_dataset(dir, spec, store);
  auto [loaded, loaded_store] = load_dataset(dir / "spec.json");
  EXPECT_EQ(loaded_store.size(0), 10000u);
  EXPECT_EQ(loaded.spec.relations()[0].declared_size, std::optional<std::size_t>(10000));
  auto j = read_json_file(dir / "spec.json");
  j["relations"][0]["size"] = 5;
  write_json_file(dir / "spec.json", j);
  EXPECT_THROW(load_dataset(dir / "spec.json"), Error);
}

TEST(SpecIo, RejectsDisconnectedSpec) {
  auto j = nlohmann::json::parse(R"({"relations": [{"name": "R", "attributes": ["A"]},
                                                   {"name": "S", "attributes": ["B"]}]})");
  EXPECT_THROW(spec_from_json(j), Error);
}

TEST(PlanIo, RoundTripRunsIdentically) {
  auto spec = testing::worked_join();
  auto inst = testing::random_instance(spec, 4, 300, 20, {{"B", 2}, {"C", 1}}, 0.3);
  HeavyHitterThreshold threshold;
  threshold.tau = 0.1;
  PlannerOptions options;
  options.k = 20;
  options.hash_seed = 77;
  auto plan = build_plan(spec, inst.store, detect_heavy_hitters(inst.store, spec, threshold), options);
  auto reloaded = plan_from_json(nlohmann::json::parse(plan_to_json(plan).dump()));
  EXPECT_EQ(plan_to_json(reloaded), plan_to_json(plan));
  auto a = run_job(inst.store, plan);
  auto b = run_job(inst.store, reloaded);
  EXPECT_EQ(a.first.tuples, b.first.tuples);
  EXPECT_EQ(stats_to_json(a.second), stats_to_json(b.second));
}

TEST(Sweep, SquareRootScalingAndNaiveDominance) {
  auto spec = testing::two_way();
  TupleStore store(spec);
  for (int i = 0; i < 2000; ++i) {
    store.add(0, {"a" + std::to_string(i), "b"});
    store.add(1, {"b", "c" + std::to_string(i)});
  }
  HeavyHitterThreshold threshold;
  threshold.q = 100;
  auto catalog = detect_heavy_hitters(store, spec, threshold);
  ExperimentSweep sweep;
  sweep.ks = {1, 4, 16, 64};
  sweep.algorithms = {"sharesskew", "naive"};
  auto rows = run_sweep(spec, store, catalog, sweep);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].measured_pairs, 4000u);
  EXPECT_EQ(rows[4].measured_pairs, 4000u);
  for (std::size_t i = 1; i + 1 < 4; ++i) {
    const double ratio = static_cast<double>(rows[i + 1].measured_pairs) / static_cast<double>(rows[i].measured_pairs);
    EXPECT_NEAR(ratio, 2.0, 0.3);
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_GE(rows[4 + i].measured_pairs, rows[i].measured_pairs);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "algorithm,k,k_int,predicted_cost,measured_pairs,max_load");
}

TEST(Sweep, RejectsNonIncreasingValues) {
  ExperimentSweep sweep;
  sweep.ks = {4, 4};
  EXPECT_THROW(check_sweep(sweep), Error);
  sweep.ks = {4, 16};
  sweep.algorithms = {"hypercube"};
  EXPECT_THROW(check_sweep(sweep), Error);
}

}  // namespace
}  // namespace skewjoin
