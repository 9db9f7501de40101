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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skewjoin/error.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

/// Heavy-hitter predicate. A value is heavy in relation R when its count in R
/// exceeds `q` (reducer capacity), or exceeds `tau * |R|` when `tau` is set.
/// `tau` takes precedence when both are given.
struct HeavyHitterThreshold {
  std::optional<double> q;
  std::optional<double> tau;

  double limit_for(std::size_t relation_size) const {
    if (tau) return *tau * static_cast<double>(relation_size);
    if (q) return *q;
    fail(ErrorKind::kInvalidArgument, "heavy-hitter threshold needs q or tau");
  }
};

struct HeavyHitter {
  std::string value;
  /// Exact count per relation containing the attribute, including relations
  /// where the value is not itself heavy.
  std::map<std::string, std::size_t> frequency;

  std::size_t frequency_in(const std::string& relation) const {
    auto it = frequency.find(relation);
    return it == frequency.end() ? 0 : it->second;
  }
};

/// Heavy hitters per attribute. Only attributes with at least one heavy hitter
/// are listed, in join-spec attribute order.
class HeavyHitterCatalog {
 public:
  HeavyHitterCatalog() = default;

  void add(const std::string& attribute, std::vector<HeavyHitter> hitters) {
    if (hitters.empty()) return;
    if (entries_.count(attribute)) fail(ErrorKind::kInvalidArgument, "attribute '" + attribute + "' listed twice");
    auto& index = value_index_[attribute];
    for (std::size_t i = 0; i < hitters.size(); ++i) {
      if (!index.emplace(hitters[i].value, i).second) {
        fail(ErrorKind::kInvalidArgument, "heavy hitter '" + hitters[i].value + "' listed twice for " + attribute);
      }
    }
    attributes_.push_back(attribute);
    entries_.emplace(attribute, std::move(hitters));
  }

  bool empty() const { return attributes_.empty(); }

  const std::vector<std::string>& attributes() const { return attributes_; }

  const std::vector<HeavyHitter>& heavy_hitters(const std::string& attribute) const {
    static const std::vector<HeavyHitter> kNone;
    auto it = entries_.find(attribute);
    return it == entries_.end() ? kNone : it->second;
  }

  /// Position of `value` among the heavy hitters of `attribute`.
  std::optional<std::size_t> index_of(const std::string& attribute, const std::string& value) const {
    auto it = value_index_.find(attribute);
    if (it == value_index_.end()) return std::nullopt;
    auto found = it->second.find(value);
    if (found == it->second.end()) return std::nullopt;
    return found->second;
  }

  bool is_heavy(const std::string& attribute, const std::string& value) const {
    return index_of(attribute, value).has_value();
  }

  std::size_t hitter_count() const {
    std::size_t total = 0;
    for (const auto& [_, hitters] : entries_) total += hitters.size();
    return total;
  }

 private:
  std::vector<std::string> attributes_;
  std::map<std::string, std::vector<HeavyHitter>> entries_;
  std::map<std::string, std::unordered_map<std::string, std::size_t>> value_index_;
};

/// Scans the data of every attribute that is not dominated in the full join
/// and lists each value whose count exceeds the threshold in at least one
/// relation containing the attribute. Counts are exact.
inline HeavyHitterCatalog detect_heavy_hitters(const TupleStore& store, const JoinSpec& spec,
                                               const HeavyHitterThreshold& threshold) {
  if (!threshold.q && !threshold.tau) {
    fail(ErrorKind::kInvalidArgument, "heavy-hitter threshold needs q or tau");
  }
  const auto dominated = dominated_attributes(spec, all_attributes(spec));
  HeavyHitterCatalog catalog;
  for (const auto& attribute : spec.attributes()) {
    if (dominated.count(attribute)) continue;
    // value -> relation -> count
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::set<std::string> heavy;
    for (std::size_t r : spec.incidence(attribute)) {
      const auto& relation = spec.relations()[r];
      const std::size_t pos = *relation.position(attribute);
      std::unordered_map<std::string, std::size_t> local;
      for (const auto& row : store.rows(r)) ++local[row[pos]];
      const double limit = threshold.limit_for(store.size(r));
      for (const auto& [value, count] : local) {
        if (static_cast<double>(count) > limit) heavy.insert(value);
      }
      for (const auto& [value, count] : local) counts[value][relation.name] = count;
    }
    std::vector<HeavyHitter> hitters;
    for (const auto& value : heavy) {
      HeavyHitter hitter{value, {}};
      for (std::size_t r : spec.incidence(attribute)) {
        const auto& name = spec.relations()[r].name;
        auto it = counts[value].find(name);
        hitter.frequency[name] = it == counts[value].end() ? 0 : it->second;
      }
      hitters.push_back(std::move(hitter));
    }
    std::stable_sort(hitters.begin(), hitters.end(), [](const HeavyHitter& a, const HeavyHitter& b) {
      std::size_t fa = 0, fb = 0;
      for (const auto& [_, c] : a.frequency) fa = std::max(fa, c);
      for (const auto& [_, c] : b.frequency) fb = std::max(fb, c);
      return fa > fb;
    });
    catalog.add(attribute, std::move(hitters));
  }
  return catalog;
}

/// Per-attribute type of a residual join: attributes listed here carry the
/// given heavy-hitter value, every other attribute is ordinary.
using TypeAssignment = std::map<std::string, std::string>;

inline std::string label(const TypeAssignment& types) {
  if (types.empty()) return "ordinary";
  std::string out;
  for (const auto& [attribute, value] : types) {
    if (!out.empty()) out += ",";
    out += attribute + "=" + value;
  }
  return out;
}

/// Mixed-radix numbering of type combinations over the catalog attributes.
/// Choice 0 is the ordinary type, choice i > 0 is the (i-1)-th heavy hitter.
/// The first catalog attribute varies fastest.
class CombinationSpace {
 public:
  CombinationSpace() = default;

  explicit CombinationSpace(const HeavyHitterCatalog& catalog) : attributes_(catalog.attributes()) {
    for (const auto& attribute : attributes_) {
      radix_.push_back(catalog.heavy_hitters(attribute).size() + 1);
      values_.emplace_back();
      for (const auto& hitter : catalog.heavy_hitters(attribute)) values_.back().push_back(hitter.value);
    }
  }

  const std::vector<std::string>& attributes() const { return attributes_; }

  /// Full Cartesian product size, saturating at SIZE_MAX.
  std::size_t size() const {
    std::size_t total = 1;
    for (std::size_t r : radix_) {
      if (total > SIZE_MAX / r) return SIZE_MAX;
      total *= r;
    }
    return total;
  }

  std::vector<std::size_t> choices(std::size_t id) const {
    std::vector<std::size_t> out(radix_.size());
    for (std::size_t i = 0; i < radix_.size(); ++i) {
      out[i] = id % radix_[i];
      id /= radix_[i];
    }
    return out;
  }

  std::size_t id(const std::vector<std::size_t>& choices) const {
    std::size_t out = 0;
    for (std::size_t i = radix_.size(); i-- > 0;) out = out * radix_[i] + choices[i];
    return out;
  }

  TypeAssignment assignment(std::size_t id) const {
    TypeAssignment types;
    auto c = choices(id);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] > 0) types[attributes_[i]] = values_[i][c[i] - 1];
    }
    return types;
  }

  std::size_t id(const TypeAssignment& types) const {
    std::vector<std::size_t> c(attributes_.size(), 0);
    for (const auto& [attribute, value] : types) {
      auto pos = std::find(attributes_.begin(), attributes_.end(), attribute) - attributes_.begin();
      if (static_cast<std::size_t>(pos) == attributes_.size()) {
        fail(ErrorKind::kInvalidArgument, "attribute '" + attribute + "' has no heavy hitters");
      }
      auto vpos = std::find(values_[pos].begin(), values_[pos].end(), value) - values_[pos].begin();
      if (static_cast<std::size_t>(vpos) == values_[pos].size()) {
        fail(ErrorKind::kInvalidArgument, "'" + value + "' is not a heavy hitter of " + attribute);
      }
      c[pos] = static_cast<std::size_t>(vpos) + 1;
    }
    return id(c);
  }

  std::size_t heavy_count(std::size_t id) const {
    auto c = choices(id);
    return static_cast<std::size_t>(std::count_if(c.begin(), c.end(), [](std::size_t v) { return v > 0; }));
  }

 private:
  std::vector<std::string> attributes_;
  std::vector<std::size_t> radix_;
  std::vector<std::vector<std::string>> values_;
};

/// Type of a tuple on each catalog attribute: nullopt when the relation lacks
/// the attribute, otherwise the combination choice its value selects.
inline std::vector<std::optional<std::size_t>> tuple_types(const JoinSpec& spec, const HeavyHitterCatalog& catalog,
                                                           std::size_t relation, const Row& row) {
  const auto& schema = spec.relations()[relation];
  std::vector<std::optional<std::size_t>> out;
  out.reserve(catalog.attributes().size());
  for (const auto& attribute : catalog.attributes()) {
    auto pos = schema.position(attribute);
    if (!pos) {
      out.push_back(std::nullopt);
      continue;
    }
    auto hh = catalog.index_of(attribute, row[*pos]);
    out.push_back(hh ? *hh + 1 : 0);
  }
  return out;
}

/// A tuple is relevant to a combination when, on every catalog attribute the
/// tuple carries, its type equals the combination's type.
inline bool compatible(const std::vector<std::optional<std::size_t>>& types, const std::vector<std::size_t>& choices) {
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (types[i] && *types[i] != choices[i]) return false;
  }
  return true;
}

/// Relation name -> number of relevant tuples.
using RelevantSizes = std::map<std::string, std::size_t>;

/// Exact relevant relation sizes for each residual join.
inline std::vector<RelevantSizes> count_relevant_sizes(const TupleStore& store, const JoinSpec& spec,
                                                       const HeavyHitterCatalog& catalog,
                                                       const std::vector<TypeAssignment>& residuals) {
  const CombinationSpace space(catalog);
  std::vector<std::vector<std::size_t>> residual_choices;
  for (const auto& types : residuals) residual_choices.push_back(space.choices(space.id(types)));

  std::vector<RelevantSizes> sizes(residuals.size());
  for (std::size_t r = 0; r < spec.relations().size(); ++r) {
    const auto& name = spec.relations()[r].name;
    // Histogram of projected tuple types, then one pass over residuals per
    // distinct projection.
    std::map<std::vector<std::optional<std::size_t>>, std::size_t> histogram;
    for (const auto& row : store.rows(r)) ++histogram[tuple_types(spec, catalog, r, row)];
    for (std::size_t i = 0; i < residuals.size(); ++i) {
      std::size_t count = 0;
      for (const auto& [types, n] : histogram) {
        if (compatible(types, residual_choices[i])) count += n;
      }
      sizes[i][name] = count;
    }
  }
  return sizes;
}

inline nlohmann::json catalog_to_json(const HeavyHitterCatalog& catalog) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& attribute : catalog.attributes()) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& hitter : catalog.heavy_hitters(attribute)) {
      values.push_back({{"value", hitter.value}, {"frequency", hitter.frequency}});
    }
    entries.push_back({{"attribute", attribute}, {"heavy_hitters", values}});
  }
  return {{"format", "skewjoin-catalog/1"}, {"attributes", entries}};
}

inline HeavyHitterCatalog catalog_from_json(const nlohmann::json& j) {
  try {
    HeavyHitterCatalog catalog;
    for (const auto& entry : j.at("attributes")) {
      std::vector<HeavyHitter> hitters;
      for (const auto& v : entry.at("heavy_hitters")) {
        hitters.push_back({v.at("value").get<std::string>(),
                           v.at("frequency").get<std::map<std::string, std::size_t>>()});
      }
      catalog.add(entry.at("attribute").get<std::string>(), std::move(hitters));
    }
    return catalog;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed catalog: ") + e.what());
  }
}

}  // namespace skewjoin
