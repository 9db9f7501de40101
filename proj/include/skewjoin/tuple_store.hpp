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
#include <string>
#include <utility>
#include <vector>

#include "skewjoin/error.hpp"
#include "skewjoin/join_model.hpp"

namespace skewjoin {

using Row = std::vector<std::string>;

/// In-memory tuples for every relation of a join, indexed like
/// JoinSpec::relations().
class TupleStore {
 public:
  TupleStore() = default;

  explicit TupleStore(const JoinSpec& spec) {
    for (const auto& relation : spec.relations()) {
      names_.push_back(relation.name);
      arity_.push_back(relation.arity());
    }
    rows_.resize(names_.size());
  }

  std::size_t relation_count() const { return rows_.size(); }

  const std::string& relation_name(std::size_t relation) const { return names_.at(relation); }

  std::size_t relation_index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    fail(ErrorKind::kInvalidArgument, "unknown relation '" + name + "'");
  }

  void add(std::size_t relation, Row row) {
    if (row.size() != arity_.at(relation)) {
      fail(ErrorKind::kInvalidArgument, "tuple of arity " + std::to_string(row.size()) + " for relation '" +
                                            names_[relation] + "' of arity " + std::to_string(arity_[relation]));
    }
    rows_[relation].push_back(std::move(row));
  }

  void add(const TupleRecord& tuple) { add(relation_index(tuple.relation), tuple.values); }

  const std::vector<Row>& rows(std::size_t relation) const { return rows_.at(relation); }
  std::vector<Row>& mutable_rows(std::size_t relation) { return rows_.at(relation); }

  std::size_t size(std::size_t relation) const { return rows_.at(relation).size(); }

  std::size_t total_size() const {
    std::size_t total = 0;
    for (const auto& rows : rows_) total += rows.size();
    return total;
  }

  /// Throws when a relation's declared size disagrees with what was loaded.
  void check_declared_sizes(const JoinSpec& spec) const {
    for (std::size_t r = 0; r < spec.relations().size(); ++r) {
      const auto& declared = spec.relations()[r].declared_size;
      if (declared && *declared != size(r)) {
        fail(ErrorKind::kInvalidArgument, "relation '" + names_[r] + "' declares " + std::to_string(*declared) +
                                              " tuples but " + std::to_string(size(r)) + " were loaded");
      }
    }
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> arity_;
  std::vector<std::vector<Row>> rows_;
};

}  // namespace skewjoin
