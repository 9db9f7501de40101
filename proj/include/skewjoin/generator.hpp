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
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skewjoin/error.hpp"
#include "skewjoin/hash.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

struct PlantedValue {
  std::string value;
  double fraction = 0.0;  // in (0, 1]; exactly ceil(fraction * n) occurrences
};

/// uniform: values "0".."domain-1" equally likely.
/// zipf: value "i" drawn with weight 1/(i+1)^s; s = 0 is uniform.
/// sequential: row i gets value "i" (all distinct).
struct ColumnConfig {
  std::string distribution = "uniform";
  std::uint64_t domain = 1000;
  double zipf_s = 0.0;
  std::vector<PlantedValue> planted;
};

struct RelationConfig {
  std::string name;
  std::vector<std::string> attributes;
  std::size_t tuples = 0;
  std::map<std::string, ColumnConfig> columns;  // attributes without an entry use ColumnConfig{}
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  std::vector<RelationConfig> relations;
};

namespace detail {

/// Uniform integer in [0, bound) by rejection; identical on every platform.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t planted_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

inline void check_column(const std::string& where, const ColumnConfig& c, std::size_t tuples) {
  if (c.distribution != "uniform" && c.distribution != "zipf" && c.distribution != "sequential") {
    fail(ErrorKind::kInvalidArgument, where + ": unknown distribution '" + c.distribution + "'");
  }
  if (c.domain == 0) fail(ErrorKind::kInvalidArgument, where + ": domain must be >= 1");
  if (c.zipf_s < 0) fail(ErrorKind::kInvalidArgument, where + ": zipf exponent must be >= 0");
  std::size_t planted = 0;
  std::set<std::string> seen;
  for (const auto& p : c.planted) {
    if (!(p.fraction > 0.0 && p.fraction <= 1.0)) {
      fail(ErrorKind::kInvalidArgument, where + ": planted fraction must lie in (0, 1]");
    }
    if (!seen.insert(p.value).second) fail(ErrorKind::kInvalidArgument, where + ": value planted twice");
    planted += planted_count(p.fraction, tuples);
  }
  if (planted > tuples) fail(ErrorKind::kInvalidArgument, where + ": planted fractions exceed the tuple count");
}

inline std::vector<std::string> generate_column(const ColumnConfig& c, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::string> column;
  column.reserve(n);
  std::set<std::string> planted_values;
  for (const auto& p : c.planted) {
    planted_values.insert(p.value);
    column.insert(column.end(), planted_count(p.fraction, n), p.value);
  }
  std::vector<double> cdf;
  if (c.distribution == "zipf" && c.zipf_s > 0.0) {
    cdf.resize(c.domain);
    double total = 0.0;
    for (std::uint64_t i = 0; i < c.domain; ++i) cdf[i] = total += std::pow(static_cast<double>(i + 1), -c.zipf_s);
    for (auto& v : cdf) v /= total;
  }
  const std::size_t planted_total = column.size();
  for (std::size_t i = planted_total; i < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) fail(ErrorKind::kInvalidArgument, "domain is exhausted by planted values");
      std::uint64_t v;
      if (c.distribution == "sequential") {
        v = (i - planted_total + static_cast<std::uint64_t>(attempt)) % std::max<std::uint64_t>(c.domain, n);
      } else if (!cdf.empty()) {
        v = static_cast<std::uint64_t>(std::lower_bound(cdf.begin(), cdf.end(), unit(rng)) - cdf.begin());
        v = std::min<std::uint64_t>(v, c.domain - 1);
      } else {
        v = bounded(rng, c.domain);
      }
      auto token = std::to_string(v);
      if (!planted_values.count(token)) {
        column.push_back(std::move(token));
        break;
      }
    }
  }
  if (c.distribution != "sequential" || planted_total > 0) {
    for (std::size_t i = column.size(); i > 1; --i) std::swap(column[i - 1], column[bounded(rng, i)]);
  }
  return column;
}

}  // namespace detail

/// Deterministic synthetic dataset. Every (relation, attribute) column has
/// its own generator seeded from the master seed and the column name.
inline std::pair<JoinSpec, TupleStore> generate(const GeneratorConfig& config) {
  std::vector<RelationSchema> schemas;
  for (const auto& r : config.relations) {
    schemas.push_back({r.name, r.attributes, r.tuples});
    for (const auto& [attribute, column] : r.columns) {
      if (std::find(r.attributes.begin(), r.attributes.end(), attribute) == r.attributes.end()) {
        fail(ErrorKind::kInvalidArgument, r.name + ": column config for unknown attribute '" + attribute + "'");
      }
      detail::check_column(r.name + "." + attribute, column, r.tuples);
    }
  }
  JoinSpec spec = validate_spec(JoinSpec(schemas));
  TupleStore store(spec);
  for (std::size_t ri = 0; ri < config.relations.size(); ++ri) {
    const auto& r = config.relations[ri];
    std::vector<std::vector<std::string>> columns;
    for (const auto& attribute : r.attributes) {
      auto it = r.columns.find(attribute);
      const ColumnConfig column = it == r.columns.end() ? ColumnConfig{} : it->second;
      std::mt19937_64 rng(splitmix64(config.seed ^ fnv1a64(r.name + "." + attribute)));
      columns.push_back(detail::generate_column(column, r.tuples, rng));
    }
    for (std::size_t t = 0; t < r.tuples; ++t) {
      Row row;
      for (auto& column : columns) row.push_back(std::move(column[t]));
      store.add(ri, std::move(row));
    }
  }
  return {std::move(spec), std::move(store)};
}

// {"seed": 7, "relations": [{"name": "R", "attributes": ["A", "B"], "tuples": 10000,
//   "columns": {"B": {"distribution": "zipf", "domain": 1000, "zipf_s": 1.1,
//                     "planted": [{"value": "b", "fraction": 0.1}]}}}]}
inline GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  try {
    GeneratorConfig config;
    config.seed = j.value("seed", std::uint64_t{0});
    for (const auto& r : j.at("relations")) {
      RelationConfig rel;
      rel.name = r.at("name").get<std::string>();
      rel.attributes = r.at("attributes").get<std::vector<std::string>>();
      rel.tuples = r.at("tuples").get<std::size_t>();
      if (r.contains("columns")) {
        for (const auto& [attribute, c] : r.at("columns").items()) {
          ColumnConfig column;
          column.distribution = c.value("distribution", column.distribution);
          column.domain = c.value("domain", column.domain);
          column.zipf_s = c.value("zipf_s", column.zipf_s);
          if (c.contains("planted")) {
            for (const auto& p : c.at("planted")) {
              column.planted.push_back({p.at("value").get<std::string>(), p.at("fraction").get<double>()});
            }
          }
          rel.columns[attribute] = std::move(column);
        }
      }
      config.relations.push_back(std::move(rel));
    }
    return config;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed generator config: ") + e.what());
  }
}

}  // namespace skewjoin
