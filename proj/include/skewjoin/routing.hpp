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
#include <map>
#include <optional>
#include <vector>

#include "skewjoin/heavy_hitters.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

/// Maps tuples to the residual joins that must receive them.
///
/// `routing` sends every type combination to the residual that computes its
/// part of the result: surviving combinations map to themselves, subsumed ones
/// to their subsuming residual. Combinations missing from the map (residuals
/// dropped because they cannot produce output) receive nothing.
class ResidualRouter {
 public:
  using Projection = std::vector<std::optional<std::size_t>>;

  ResidualRouter(const JoinSpec& spec, const HeavyHitterCatalog& catalog, std::map<std::size_t, std::size_t> routing)
      : spec_(&spec), catalog_(&catalog), space_(catalog), routing_(std::move(routing)) {
    const auto& attrs = catalog.attributes();
    targets_.resize(spec.relations().size());
    for (const auto& [combination, residual] : routing_) {
      auto choices = space_.choices(combination);
      for (std::size_t r = 0; r < spec.relations().size(); ++r) {
        Projection projection(attrs.size());
        for (std::size_t i = 0; i < attrs.size(); ++i) {
          if (spec.relations()[r].contains(attrs[i])) projection[i] = choices[i];
        }
        auto& list = targets_[r][projection];
        if (std::find(list.begin(), list.end(), residual) == list.end()) list.push_back(residual);
      }
    }
    for (auto& per_relation : targets_) {
      for (auto& [_, list] : per_relation) std::sort(list.begin(), list.end());
    }
    trivial_ = std::all_of(routing_.begin(), routing_.end(), [](const auto& e) { return e.first == e.second; });
  }

  const CombinationSpace& space() const { return space_; }
  const std::map<std::size_t, std::size_t>& routing() const { return routing_; }

  /// True when no combination is redirected to another residual.
  bool trivial() const { return trivial_; }

  /// Residual ids (sorted, unique) that receive `row` of relation `relation`.
  const std::vector<std::size_t>& targets(std::size_t relation, const Row& row) const {
    return targets(relation, tuple_types(*spec_, *catalog_, relation, row));
  }

  const std::vector<std::size_t>& targets(std::size_t relation, const Projection& projection) const {
    static const std::vector<std::size_t> kNone;
    auto it = targets_.at(relation).find(projection);
    return it == targets_[relation].end() ? kNone : it->second;
  }

  /// Residual that owns a full assignment (one value per catalog attribute is
  /// looked up through `value_of`).
  template <typename ValueOf>
  std::optional<std::size_t> owner(ValueOf&& value_of) const {
    const auto& attrs = catalog_->attributes();
    std::vector<std::size_t> choices(attrs.size());
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      auto hh = catalog_->index_of(attrs[i], value_of(attrs[i]));
      choices[i] = hh ? *hh + 1 : 0;
    }
    auto it = routing_.find(space_.id(choices));
    if (it == routing_.end()) return std::nullopt;
    return it->second;
  }

 private:
  const JoinSpec* spec_;
  const HeavyHitterCatalog* catalog_;
  CombinationSpace space_;
  std::map<std::size_t, std::size_t> routing_;
  std::vector<std::map<Projection, std::vector<std::size_t>>> targets_;
  bool trivial_ = true;
};

}  // namespace skewjoin
