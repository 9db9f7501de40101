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
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skewjoin/error.hpp"

namespace skewjoin {

/// A single relation of a multiway join: its name, its ordered attribute list
/// and optionally the tuple count the data files are expected to contain.
struct RelationSchema {
  std::string name;
  std::vector<std::string> attributes;
  std::optional<std::size_t> declared_size;

  bool contains(std::string_view attribute) const {
    return position(attribute).has_value();
  }

  std::optional<std::size_t> position(std::string_view attribute) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i] == attribute) return i;
    }
    return std::nullopt;
  }

  std::size_t arity() const { return attributes.size(); }
};

/// One tuple tagged with the relation it belongs to. Values are opaque tokens;
/// only equality matters.
struct TupleRecord {
  std::string relation;
  std::vector<std::string> values;
};

/// The join hypergraph. Attributes are nodes, relations are hyperedges.
///
/// Construction only indexes the relations; call validate_spec() to enforce the
/// structural invariants (distinct attributes per relation, at least two
/// relations, connected join graph).
class JoinSpec {
 public:
  JoinSpec() = default;

  explicit JoinSpec(std::vector<RelationSchema> relations) : relations_(std::move(relations)) {
    for (std::size_t r = 0; r < relations_.size(); ++r) {
      for (const auto& attribute : relations_[r].attributes) {
        auto [it, inserted] = attribute_index_.emplace(attribute, attributes_.size());
        if (inserted) {
          attributes_.push_back(attribute);
          incidence_.emplace_back();
        }
        auto& rel_list = incidence_[it->second];
        if (rel_list.empty() || rel_list.back() != r) rel_list.push_back(r);
      }
    }
  }

  const std::vector<RelationSchema>& relations() const { return relations_; }

  /// Attribute universe in order of first appearance.
  const std::vector<std::string>& attributes() const { return attributes_; }

  /// Attribute universe sorted by name; the canonical column order of join
  /// results.
  std::vector<std::string> canonical_attributes() const {
    std::vector<std::string> sorted = attributes_;
    std::sort(sorted.begin(), sorted.end());
    return sorted;
  }

  std::optional<std::size_t> relation_index(std::string_view name) const {
    for (std::size_t i = 0; i < relations_.size(); ++i) {
      if (relations_[i].name == name) return i;
    }
    return std::nullopt;
  }

  const RelationSchema& relation(std::string_view name) const {
    auto index = relation_index(name);
    if (!index) fail(ErrorKind::kInvalidArgument, "unknown relation '" + std::string(name) + "'");
    return relations_[*index];
  }

  std::optional<std::size_t> attribute_index(std::string_view name) const {
    auto it = attribute_index_.find(std::string(name));
    if (it == attribute_index_.end()) return std::nullopt;
    return it->second;
  }

  bool has_attribute(std::string_view name) const { return attribute_index(name).has_value(); }

  /// Sorted indices of the relations that contain `attribute`.
  const std::vector<std::size_t>& incidence(std::string_view attribute) const {
    auto index = attribute_index(attribute);
    if (!index) fail(ErrorKind::kInvalidArgument, "unknown attribute '" + std::string(attribute) + "'");
    return incidence_[*index];
  }

 private:
  std::vector<RelationSchema> relations_;
  std::vector<std::string> attributes_;
  std::map<std::string, std::size_t> attribute_index_;
  std::vector<std::vector<std::size_t>> incidence_;
};

namespace detail {

inline bool join_graph_connected(const JoinSpec& spec) {
  const auto& relations = spec.relations();
  if (relations.empty()) return true;
  std::vector<bool> seen(relations.size(), false);
  std::vector<std::size_t> frontier{0};
  seen[0] = true;
  while (!frontier.empty()) {
    std::size_t current = frontier.back();
    frontier.pop_back();
    for (const auto& attribute : relations[current].attributes) {
      for (std::size_t next : spec.incidence(attribute)) {
        if (!seen[next]) {
          seen[next] = true;
          frontier.push_back(next);
        }
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool v) { return v; });
}

}  // namespace detail

/// Returns `spec` unchanged when it is a well-formed join; throws
/// Error(kInvalidSpec) otherwise.
inline JoinSpec validate_spec(const JoinSpec& spec) {
  const auto& relations = spec.relations();
  if (relations.size() < 2) {
    fail(ErrorKind::kInvalidSpec, "a join needs at least 2 relations, got " + std::to_string(relations.size()));
  }
  std::set<std::string> names;
  for (const auto& relation : relations) {
    if (relation.name.empty()) fail(ErrorKind::kInvalidSpec, "relation with empty name");
    if (!names.insert(relation.name).second) {
      fail(ErrorKind::kInvalidSpec, "duplicate relation name '" + relation.name + "'");
    }
    if (relation.attributes.empty()) {
      fail(ErrorKind::kInvalidSpec, "relation '" + relation.name + "' has no attributes");
    }
    std::set<std::string> seen;
    for (const auto& attribute : relation.attributes) {
      if (attribute.empty()) fail(ErrorKind::kInvalidSpec, "empty attribute name in relation '" + relation.name + "'");
      if (!seen.insert(attribute).second) {
        fail(ErrorKind::kInvalidSpec,
             "duplicate attribute '" + attribute + "' in relation '" + relation.name + "'");
      }
    }
  }
  if (!detail::join_graph_connected(spec)) {
    fail(ErrorKind::kInvalidSpec, "join graph is disconnected");
  }
  return spec;
}

/// Attributes among `active` that are dominated by another active attribute,
/// i.e. some other active attribute appears in every relation where they
/// appear. When two attributes have identical incidence, the lexicographically
/// larger one is the dominated one. Inactive (pinned) attributes never dominate.
inline std::set<std::string> dominated_attributes(const JoinSpec& spec, const std::set<std::string>& active) {
  for (const auto& attribute : active) {
    if (!spec.has_attribute(attribute)) {
      fail(ErrorKind::kInvalidArgument, "unknown attribute '" + attribute + "'");
    }
  }
  std::set<std::string> remaining = active;
  std::set<std::string> dominated;
  // Removing a dominated attribute cannot make a survivor dominated, but the
  // loop runs to a fixpoint anyway; it terminates in at most |active| rounds.
  for (std::size_t round = 0; round <= active.size(); ++round) {
    std::set<std::string> newly;
    for (const auto& a : remaining) {
      const auto& inc_a = spec.incidence(a);
      for (const auto& b : remaining) {
        if (a == b) continue;
        const auto& inc_b = spec.incidence(b);
        if (!std::includes(inc_b.begin(), inc_b.end(), inc_a.begin(), inc_a.end())) continue;
        if (inc_a == inc_b && a < b) continue;  // mutual: the larger name yields
        newly.insert(a);
        break;
      }
    }
    if (newly.empty()) break;
    for (const auto& a : newly) {
      remaining.erase(a);
      dominated.insert(a);
    }
  }
  return dominated;
}

inline std::set<std::string> all_attributes(const JoinSpec& spec) {
  return {spec.attributes().begin(), spec.attributes().end()};
}

}  // namespace skewjoin
