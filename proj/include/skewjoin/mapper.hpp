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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "skewjoin/error.hpp"
#include "skewjoin/hash.hpp"
#include "skewjoin/planner.hpp"
#include "skewjoin/routing.hpp"

namespace skewjoin {

/// How an attribute participates in the key of one tuple for one residual:
/// hashed from the tuple's value, replicated over all buckets, or not part of
/// the key at all.
enum class AttributeMark { kHash, kOne, kReplicate };

inline char to_char(AttributeMark mark) {
  switch (mark) {
    case AttributeMark::kHash: return 'h';
    case AttributeMark::kOne: return '1';
    case AttributeMark::kReplicate: return 'r';
  }
  return '?';
}

/// Reducer address: residual id plus one bucket per key slot of that residual
/// (the attributes whose integer share exceeds 1, in name order).
struct KeyVector {
  std::size_t residual = 0;
  std::vector<std::uint32_t> buckets;

  friend bool operator==(const KeyVector&, const KeyVector&) = default;
  friend auto operator<=>(const KeyVector&, const KeyVector&) = default;
};

/// Cartesian expansion of a partially filled key: slots holding a bucket stay
/// fixed, empty (replicate) slots range over [0, share).
inline std::vector<std::vector<std::uint32_t>> recursive_keys(const std::vector<std::optional<std::uint32_t>>& base,
                                                              const std::vector<std::int64_t>& shares) {
  if (base.size() != shares.size()) fail(ErrorKind::kInvalidArgument, "key and share vectors differ in length");
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> key(base.size(), 0);
  auto expand = [&](auto&& self, std::size_t slot) -> void {
    if (slot == base.size()) {
      out.push_back(key);
      return;
    }
    if (base[slot]) {
      key[slot] = *base[slot];
      self(self, slot + 1);
      return;
    }
    for (std::int64_t b = 0; b < shares[slot]; ++b) {
      key[slot] = static_cast<std::uint32_t>(b);
      self(self, slot + 1);
    }
  };
  expand(expand, 0);
  return out;
}

struct EmittedPair {
  KeyVector key;
  std::string relation;
  Row values;
};

/// Tab-separated spill line: residual id, comma-separated buckets, relation,
/// then the tuple's values.
inline void write_spill_line(std::ostream& out, const EmittedPair& pair) {
  out << pair.key.residual << '\t';
  for (std::size_t i = 0; i < pair.key.buckets.size(); ++i) {
    if (i > 0) out << ',';
    out << pair.key.buckets[i];
  }
  out << '\t' << pair.relation;
  for (const auto& v : pair.values) out << '\t' << v;
  out << '\n';
}

/// Map side of the shuffle for a fixed plan. Holds a reference to the plan,
/// which must outlive the mapper.
class Mapper {
 public:
  struct CompiledResidual {
    std::size_t id = 0;
    std::vector<std::string> slots;
    std::vector<std::int64_t> shares;
    /// [relation][slot] -> column of the slot attribute in the relation, or -1
    /// when the relation lacks it and the slot is replicated.
    std::vector<std::vector<int>> source;
    std::int64_t reducer_count = 1;

    std::uint64_t linear_index(const std::vector<std::uint32_t>& buckets) const {
      std::uint64_t index = 0;
      for (std::size_t s = 0; s < buckets.size(); ++s) index = index * static_cast<std::uint64_t>(shares[s]) + buckets[s];
      return index;
    }
  };

  explicit Mapper(const JoinPlan& plan)
      : plan_(&plan), hashes_(plan.hash_seed), router_(plan.spec, plan.catalog, plan.routing) {
    for (std::size_t i = 0; i < plan.residuals.size(); ++i) {
      const auto& residual = plan.residuals[i];
      index_of_id_[residual.id] = i;
      CompiledResidual compiled;
      compiled.id = residual.id;
      compiled.slots = residual.slot_attributes();
      for (const auto& slot : compiled.slots) compiled.shares.push_back(residual.share_of(slot));
      compiled.reducer_count = residual.shares.k_int;
      for (const auto& relation : plan.spec.relations()) {
        std::vector<int> source;
        for (const auto& slot : compiled.slots) {
          auto pos = relation.position(slot);
          source.push_back(pos ? static_cast<int>(*pos) : -1);
        }
        compiled.source.push_back(std::move(source));
      }
      compiled_.push_back(std::move(compiled));
    }
  }

  const JoinPlan& plan() const { return *plan_; }
  const HashFamily& hashes() const { return hashes_; }
  const ResidualRouter& router() const { return router_; }
  const std::vector<CompiledResidual>& compiled() const { return compiled_; }

  /// Position of a residual id in plan().residuals.
  std::size_t residual_index(std::size_t id) const {
    auto it = index_of_id_.find(id);
    if (it == index_of_id_.end()) fail(ErrorKind::kInvalidArgument, "no residual with id " + std::to_string(id));
    return it->second;
  }

  /// Residual ids (sorted) whose keys receive this tuple.
  const std::vector<std::size_t>& classify(std::size_t relation, const Row& row) const {
    return router_.targets(relation, row);
  }

  std::vector<std::size_t> classify(const TupleRecord& tuple) const {
    return classify(relation_index(tuple.relation), tuple.values);
  }

  /// Mark of every join attribute for tuples of `relation` in residual `id`.
  std::vector<std::pair<std::string, AttributeMark>> marks(std::size_t relation, std::size_t id) const {
    const auto& schema = plan_->spec.relations().at(relation);
    const auto& residual = plan_->residuals[residual_index(id)];
    std::vector<std::pair<std::string, AttributeMark>> out;
    for (const auto& attribute : plan_->spec.attributes()) {
      const bool in_key = residual.share_of(attribute) > 1;
      const bool in_tuple = schema.contains(attribute);
      AttributeMark mark = AttributeMark::kOne;
      if (in_key && in_tuple) mark = AttributeMark::kHash;
      if (in_key && !in_tuple) mark = AttributeMark::kReplicate;
      out.emplace_back(attribute, mark);
    }
    return out;
  }

  /// Keys of one residual that receive the tuple: hash the h slots, then
  /// expand the r slots.
  std::vector<KeyVector> keys(std::size_t relation, const Row& row, std::size_t id) const {
    const auto& compiled = compiled_[residual_index(id)];
    std::vector<std::optional<std::uint32_t>> base(compiled.slots.size());
    for (std::size_t s = 0; s < compiled.slots.size(); ++s) {
      int column = compiled.source[relation][s];
      if (column >= 0) {
        base[s] = static_cast<std::uint32_t>(
            hashes_.bucket(compiled.slots[s], row[column], static_cast<std::uint64_t>(compiled.shares[s])));
      }
    }
    std::vector<KeyVector> out;
    for (auto& buckets : recursive_keys(base, compiled.shares)) out.push_back(KeyVector{id, std::move(buckets)});
    return out;
  }

  /// All key-value pairs emitted for one tuple.
  std::vector<EmittedPair> map_tuple(const TupleRecord& tuple) const {
    const std::size_t relation = relation_index(tuple.relation);
    if (tuple.values.size() != plan_->spec.relations()[relation].arity()) {
      fail(ErrorKind::kInvalidArgument, "tuple arity does not match relation '" + tuple.relation + "'");
    }
    std::vector<EmittedPair> out;
    for (std::size_t id : classify(relation, tuple.values)) {
      for (auto& key : keys(relation, tuple.values, id)) out.push_back(EmittedPair{std::move(key), tuple.relation, tuple.values});
    }
    return out;
  }

  /// Allocation-light variant used by the executor: calls
  /// emit(residual_index, linear_reducer_index) once per emitted pair.
  template <typename Emit>
  void for_each_emission(std::size_t relation, const Row& row, Emit&& emit) const {
    for (std::size_t id : classify(relation, row)) {
      const std::size_t index = residual_index(id);
      const auto& compiled = compiled_[index];
      const auto& source = compiled.source[relation];
      // Fixed part of the linear index plus strides of the replicated slots.
      std::uint64_t fixed = 0, stride = 1;
      std::vector<std::pair<std::uint64_t, std::int64_t>> replicated;  // (stride, share)
      for (std::size_t s = compiled.slots.size(); s-- > 0;) {
        const auto share = static_cast<std::uint64_t>(compiled.shares[s]);
        if (source[s] >= 0) {
          fixed += stride * hashes_.bucket(compiled.slots[s], row[source[s]], share);
        } else {
          replicated.emplace_back(stride, compiled.shares[s]);
        }
        stride *= share;
      }
      auto expand = [&](auto&& self, std::size_t i, std::uint64_t offset) -> void {
        if (i == replicated.size()) {
          emit(index, offset);
          return;
        }
        for (std::int64_t b = 0; b < replicated[i].second; ++b) {
          self(self, i + 1, offset + replicated[i].first * static_cast<std::uint64_t>(b));
        }
      };
      expand(expand, 0, fixed);
    }
  }

 private:
  std::size_t relation_index(const std::string& name) const {
    auto index = plan_->spec.relation_index(name);
    if (!index) fail(ErrorKind::kInvalidArgument, "tuple references unknown relation '" + name + "'");
    return *index;
  }

  const JoinPlan* plan_;
  HashFamily hashes_;
  ResidualRouter router_;
  std::vector<CompiledResidual> compiled_;
  std::map<std::size_t, std::size_t> index_of_id_;
};

}  // namespace skewjoin
