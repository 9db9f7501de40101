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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skewjoin/error.hpp"
#include "skewjoin/hash.hpp"
#include "skewjoin/heavy_hitters.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/mapper.hpp"
#include "skewjoin/planner.hpp"
#include "skewjoin/tuple_store.hpp"

namespace skewjoin {

/// One reduce invocation: its address and the tuples it received, per
/// relation (indexed like JoinSpec::relations()).
struct Reducer {
  KeyVector key;
  std::vector<std::vector<const Row*>> buffers;

  std::size_t load() const {
    std::size_t total = 0;
    for (const auto& b : buffers) total += b.size();
    return total;
  }
};

/// Join output in canonical attribute order (sorted attribute names), tuples
/// sorted and distinct.
struct JoinResult {
  std::vector<std::string> attributes;
  std::vector<Row> tuples;
};

struct ResidualStats {
  std::size_t residual_id = 0;
  std::string label;
  double k = 1.0;
  std::int64_t k_int = 1;
  double predicted_cost = 0.0;
  std::uint64_t measured_pairs = 0;
  std::uint64_t max_load = 0;
  double mean_load = 0.0;
  std::uint64_t output_count = 0;
};

struct ShuffleStats {
  std::uint64_t total_pairs = 0;  // communication cost
  std::vector<ResidualStats> residuals;
  std::map<std::uint64_t, std::uint64_t> load_histogram;  // load -> reducer count
  std::uint64_t max_load = 0;
  double mean_load = 0.0;
  std::int64_t reducer_count = 0;
  std::uint64_t output_count = 0;
  std::uint64_t duplicate_outputs = 0;
  bool exactly_once_checked = false;
};

struct ExecutorOptions {
  /// Run the local joins. When false only the shuffle is simulated.
  bool reduce = true;
  /// Keep the output tuples. When false only counts are produced and
  /// duplicates cannot be detected.
  bool materialize = true;
  /// Throw when an output tuple is produced more than once.
  bool check_exactly_once = true;
  /// Throw when a reducer receives more tuples than this (0 = unlimited).
  std::size_t max_reducer_tuples = 0;
  /// Optional spill of every emitted pair (see write_spill_line).
  std::ostream* spill = nullptr;
};

namespace detail {

inline std::string join_key(const std::vector<const std::string*>& values) {
  std::string key;
  for (const auto* v : values) {
    key += *v;
    key += '\x1f';
  }
  return key;
}

/// Relation order in which every relation after the first shares an
/// attribute with an earlier one.
inline std::vector<std::size_t> connected_order(const JoinSpec& spec) {
  const std::size_t n = spec.relations().size();
  std::vector<std::size_t> order{0};
  std::vector<bool> used(n, false);
  used[0] = true;
  std::set<std::string> bound(spec.relations()[0].attributes.begin(), spec.relations()[0].attributes.end());
  while (order.size() < n) {
    std::size_t pick = n;
    for (std::size_t r = 0; r < n && pick == n; ++r) {
      if (used[r]) continue;
      for (const auto& a : spec.relations()[r].attributes) {
        if (bound.count(a)) {
          pick = r;
          break;
        }
      }
    }
    if (pick == n) {
      for (std::size_t r = 0; r < n; ++r) {
        if (!used[r]) {
          pick = r;
          break;
        }
      }
    }
    used[pick] = true;
    order.push_back(pick);
    bound.insert(spec.relations()[pick].attributes.begin(), spec.relations()[pick].attributes.end());
  }
  return order;
}

}  // namespace detail

/// Hash-join cascade over the reducer's buffers. Calls emit(values, sources)
/// for every combination of one tuple per relation that agrees on all shared
/// attributes; `values` is indexed by canonical attribute position and
/// `sources[r]` is the tuple taken from relation r.
template <typename Emit>
void local_join(const Reducer& reducer, const JoinSpec& spec, Emit&& emit) {
  const auto canonical = spec.canonical_attributes();
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < canonical.size(); ++i) column[canonical[i]] = i;
  const auto order = detail::connected_order(spec);

  struct Level {
    std::size_t relation;
    std::vector<std::pair<std::size_t, std::size_t>> probe;  // (tuple column, canonical column)
    std::vector<std::pair<std::size_t, std::size_t>> bind;
    std::unordered_map<std::string, std::vector<const Row*>> index;
  };
  std::vector<Level> levels;
  std::set<std::string> bound;
  for (std::size_t r : order) {
    if (reducer.buffers.at(r).empty()) return;
    Level level;
    level.relation = r;
    const auto& attrs = spec.relations()[r].attributes;
    for (std::size_t c = 0; c < attrs.size(); ++c) {
      (bound.count(attrs[c]) ? level.probe : level.bind).emplace_back(c, column.at(attrs[c]));
    }
    for (const Row* row : reducer.buffers[r]) {
      std::vector<const std::string*> key;
      for (auto [tc, _] : level.probe) key.push_back(&(*row)[tc]);
      level.index[detail::join_key(key)].push_back(row);
    }
    bound.insert(attrs.begin(), attrs.end());
    levels.push_back(std::move(level));
  }

  std::vector<const std::string*> values(canonical.size(), nullptr);
  std::vector<const Row*> sources(levels.size(), nullptr);
  auto descend = [&](auto&& self, std::size_t depth) -> void {
    if (depth == levels.size()) {
      emit(static_cast<const std::vector<const std::string*>&>(values),
           static_cast<const std::vector<const Row*>&>(sources));
      return;
    }
    const auto& level = levels[depth];
    std::vector<const std::string*> key;
    for (auto [_, cc] : level.probe) key.push_back(values[cc]);
    auto it = level.index.find(detail::join_key(key));
    if (it == level.index.end()) return;
    for (const Row* row : it->second) {
      for (auto [tc, cc] : level.bind) values[cc] = &(*row)[tc];
      sources[level.relation] = row;
      self(self, depth + 1);
    }
    for (auto [_, cc] : level.bind) values[cc] = nullptr;
  };
  descend(descend, 0);
}

inline std::vector<Row> local_join(const Reducer& reducer, const JoinSpec& spec) {
  std::vector<Row> out;
  local_join(reducer, spec, [&](const std::vector<const std::string*>& values, const std::vector<const Row*>&) {
    Row row;
    row.reserve(values.size());
    for (const auto* v : values) row.push_back(*v);
    out.push_back(std::move(row));
  });
  return out;
}

namespace detail {

/// Shared reduce phase: joins every reducer, fills loads and output stats.
/// `owner_check(reducer_residual_index, values)` filters outputs a residual
/// does not own.
template <typename OwnerCheck>
std::pair<JoinResult, ShuffleStats> reduce_all(const JoinSpec& spec, std::map<std::uint64_t, Reducer>& reducers,
                                               const std::vector<std::uint64_t>& offsets, ShuffleStats stats,
                                               const ExecutorOptions& options, OwnerCheck&& owner_check) {
  JoinResult result;
  result.attributes = spec.canonical_attributes();
  std::vector<std::uint64_t> nonempty(stats.residuals.size(), 0);
  // Exactly-once is judged on provenance (which input tuples were combined),
  // since duplicate input rows legitimately yield equal output values.
  std::vector<std::vector<const Row*>> provenance;
  for (auto& [global, reducer] : reducers) {
    const std::size_t index = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), global) - offsets.begin() - 1);
    auto& residual = stats.residuals[index];
    const std::uint64_t load = reducer.load();
    residual.max_load = std::max(residual.max_load, load);
    ++stats.load_histogram[load];
    ++nonempty[index];
    if (!options.reduce) continue;
    local_join(reducer, spec, [&](const std::vector<const std::string*>& values, const std::vector<const Row*>& sources) {
      if (!owner_check(index, values)) return;
      ++residual.output_count;
      if (options.materialize) {
        provenance.push_back(sources);
        Row row;
        row.reserve(values.size());
        for (const auto* v : values) row.push_back(*v);
        result.tuples.push_back(std::move(row));
      }
    });
  }
  std::uint64_t empty_reducers = 0;
  for (std::size_t i = 0; i < stats.residuals.size(); ++i) {
    auto& residual = stats.residuals[i];
    residual.mean_load = residual.k_int > 0 ? static_cast<double>(residual.measured_pairs) / residual.k_int : 0.0;
    empty_reducers += static_cast<std::uint64_t>(residual.k_int) - nonempty[i];
    stats.total_pairs += residual.measured_pairs;
    stats.reducer_count += residual.k_int;
    stats.max_load = std::max(stats.max_load, residual.max_load);
    stats.output_count += residual.output_count;
  }
  if (empty_reducers > 0) stats.load_histogram[0] += empty_reducers;
  stats.mean_load = stats.reducer_count > 0 ? static_cast<double>(stats.total_pairs) / stats.reducer_count : 0.0;

  if (options.materialize && options.reduce) {
    std::sort(provenance.begin(), provenance.end());
    for (std::size_t i = 1; i < provenance.size(); ++i) {
      if (provenance[i] == provenance[i - 1]) ++stats.duplicate_outputs;
    }
    stats.exactly_once_checked = true;
    if (stats.duplicate_outputs > 0 && options.check_exactly_once) {
      fail(ErrorKind::kInternal, std::to_string(stats.duplicate_outputs) + " output tuples produced more than once");
    }
    std::sort(result.tuples.begin(), result.tuples.end());
    result.tuples.erase(std::unique(result.tuples.begin(), result.tuples.end()), result.tuples.end());
  }
  return {std::move(result), std::move(stats)};
}

inline void check_reducer_cap(const Reducer& reducer, const ExecutorOptions& options) {
  if (options.max_reducer_tuples > 0 && reducer.load() > options.max_reducer_tuples) {
    fail(ErrorKind::kLimitExceeded,
         "reducer buffer exceeds the cap of " + std::to_string(options.max_reducer_tuples) + " tuples");
  }
}

}  // namespace detail

/// Simulates map, shuffle and reduce for a plan. Throws when the measured
/// pairs of a residual differ from its predicted cost, or when an output
/// tuple appears twice.
inline std::pair<JoinResult, ShuffleStats> run_job(const TupleStore& store, const JoinPlan& plan,
                                                   const ExecutorOptions& options = {}) {
  const Mapper mapper(plan);
  const auto& spec = plan.spec;
  const std::size_t relation_count = spec.relations().size();

  ShuffleStats stats;
  std::vector<std::uint64_t> offsets;
  std::uint64_t offset = 0;
  for (const auto& residual : plan.residuals) {
    offsets.push_back(offset);
    offset += static_cast<std::uint64_t>(residual.shares.k_int);
    ResidualStats rs;
    rs.residual_id = residual.id;
    rs.label = residual.label();
    rs.k = residual.k;
    rs.k_int = residual.shares.k_int;
    rs.predicted_cost = residual.predicted_cost;
    stats.residuals.push_back(rs);
  }

  std::map<std::uint64_t, Reducer> reducers;
  for (std::size_t r = 0; r < relation_count; ++r) {
    for (const Row& row : store.rows(r)) {
      mapper.for_each_emission(r, row, [&](std::size_t index, std::uint64_t linear) {
        auto& reducer = reducers[offsets[index] + linear];
        if (reducer.buffers.empty()) reducer.buffers.resize(relation_count);
        reducer.buffers[r].push_back(&row);
        detail::check_reducer_cap(reducer, options);
        ++stats.residuals[index].measured_pairs;
      });
      if (options.spill) {
        for (const auto& pair : mapper.map_tuple(TupleRecord{spec.relations()[r].name, row})) {
          write_spill_line(*options.spill, pair);
        }
      }
    }
  }
  for (auto& [global, reducer] : reducers) {
    const std::size_t index = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), global) - offsets.begin() - 1);
    reducer.key.residual = plan.residuals[index].id;
  }

  for (const auto& rs : stats.residuals) {
    if (static_cast<double>(rs.measured_pairs) != std::round(rs.predicted_cost)) {
      fail(ErrorKind::kInternal, "residual " + rs.label + " emitted " + std::to_string(rs.measured_pairs) +
                                     " pairs but its cost expression predicts " + std::to_string(rs.predicted_cost));
    }
  }

  const auto canonical = spec.canonical_attributes();
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < canonical.size(); ++i) column[canonical[i]] = i;
  const bool filter = !mapper.router().trivial();
  return detail::reduce_all(spec, reducers, offsets, std::move(stats), options,
                            [&](std::size_t index, const std::vector<const std::string*>& values) {
                              if (!filter) return true;
                              auto owner = mapper.router().owner(
                                  [&](const std::string& attribute) -> const std::string& { return *values[column.at(attribute)]; });
                              return owner && *owner == plan.residuals[index].id;
                            });
}

/// Skew handling that partitions the larger heavy-hitter side and broadcasts
/// the smaller one to all k reducers of that heavy hitter; tuples without a
/// heavy hitter are hash-joined on the join attribute over k reducers.
inline std::pair<JoinResult, ShuffleStats> naive_2way(const TupleStore& store, const JoinSpec& spec_in,
                                                      const std::vector<std::string>& heavy_values, std::int64_t k,
                                                      std::uint64_t hash_seed = 0,
                                                      const ExecutorOptions& options = {}) {
  const JoinSpec spec = validate_spec(spec_in);
  if (spec.relations().size() != 2) fail(ErrorKind::kUnsupported, "naive baseline needs a 2-way join");
  if (k < 1) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
  const auto& left = spec.relations()[0];
  const auto& right = spec.relations()[1];
  std::vector<std::string> shared;
  for (const auto& a : left.attributes) {
    if (right.contains(a)) shared.push_back(a);
  }
  if (shared.size() != 1) fail(ErrorKind::kUnsupported, "naive baseline needs exactly one join attribute");
  const std::string& join_attribute = shared.front();
  const HashFamily hashes(hash_seed);

  std::map<std::string, std::size_t> heavy_index;
  for (std::size_t i = 0; i < heavy_values.size(); ++i) heavy_index.emplace(heavy_values[i], i);

  // Per heavy value: tuple counts per side to decide which side to partition.
  std::vector<std::array<std::uint64_t, 2>> heavy_counts(heavy_values.size(), {0, 0});
  for (std::size_t r = 0; r < 2; ++r) {
    const std::size_t pos = *spec.relations()[r].position(join_attribute);
    for (const Row& row : store.rows(r)) {
      auto it = heavy_index.find(row[pos]);
      if (it != heavy_index.end()) ++heavy_counts[it->second][r];
    }
  }

  ShuffleStats stats;
  std::vector<std::uint64_t> offsets;
  {
    ResidualStats ordinary;
    ordinary.residual_id = 0;
    ordinary.label = "ordinary";
    ordinary.k = static_cast<double>(k);
    ordinary.k_int = k;
    stats.residuals.push_back(ordinary);
    offsets.push_back(0);
    for (std::size_t i = 0; i < heavy_values.size(); ++i) {
      ResidualStats heavy;
      heavy.residual_id = i + 1;
      heavy.label = join_attribute + "=" + heavy_values[i];
      heavy.k = static_cast<double>(k);
      heavy.k_int = k;
      const auto [r, s] = heavy_counts[i];
      heavy.predicted_cost = static_cast<double>(std::max(r, s) + static_cast<std::uint64_t>(k) * std::min(r, s));
      stats.residuals.push_back(heavy);
      offsets.push_back(static_cast<std::uint64_t>(k) * (i + 1));
    }
  }

  std::map<std::uint64_t, Reducer> reducers;
  auto deliver = [&](std::size_t index, std::uint64_t bucket, std::size_t r, const Row& row) {
    auto& reducer = reducers[offsets[index] + bucket];
    if (reducer.buffers.empty()) reducer.buffers.resize(2);
    reducer.buffers[r].push_back(&row);
    detail::check_reducer_cap(reducer, options);
    ++stats.residuals[index].measured_pairs;
  };
  const auto uk = static_cast<std::uint64_t>(k);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto& schema = spec.relations()[r];
    const std::size_t pos = *schema.position(join_attribute);
    for (std::size_t t = 0; t < store.rows(r).size(); ++t) {
      const Row& row = store.rows(r)[t];
      auto it = heavy_index.find(row[pos]);
      if (it == heavy_index.end()) {
        deliver(0, hashes.bucket(join_attribute, row[pos], uk), r, row);
        continue;
      }
      const std::size_t index = it->second + 1;
      const auto& counts = heavy_counts[it->second];
      const std::size_t partitioned = counts[1] > counts[0] ? 1 : 0;  // ties partition the first relation
      if (r == partitioned) {
        std::string rest;
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (c == pos) continue;
          rest += row[c];
          rest += '\x1f';
        }
        if (rest.empty()) rest = std::to_string(t);
        deliver(index, hashes.bucket("naive:" + schema.name, rest, uk), r, row);
      } else {
        for (std::uint64_t b = 0; b < uk; ++b) deliver(index, b, r, row);
      }
    }
  }
  stats.residuals[0].predicted_cost = static_cast<double>(stats.residuals[0].measured_pairs);
  for (auto& [global, reducer] : reducers) {
    reducer.key.residual = static_cast<std::size_t>(global / uk);
    reducer.key.buckets = {static_cast<std::uint32_t>(global % uk)};
  }
  return detail::reduce_all(spec, reducers, offsets, std::move(stats), options,
                            [](std::size_t, const std::vector<const std::string*>&) { return true; });
}

inline nlohmann::json stats_to_json(const ShuffleStats& stats) {
  nlohmann::json residuals = nlohmann::json::array();
  for (const auto& r : stats.residuals) {
    residuals.push_back({{"residual_id", r.residual_id},
                         {"label", r.label},
                         {"k", r.k},
                         {"k_int", r.k_int},
                         {"predicted_cost", r.predicted_cost},
                         {"measured_pairs", r.measured_pairs},
                         {"max_load", r.max_load},
                         {"mean_load", r.mean_load},
                         {"output_count", r.output_count}});
  }
  nlohmann::json histogram = nlohmann::json::array();
  for (const auto& [load, count] : stats.load_histogram) histogram.push_back({{"load", load}, {"reducers", count}});
  return {{"total_pairs", stats.total_pairs},
          {"reducer_count", stats.reducer_count},
          {"max_load", stats.max_load},
          {"mean_load", stats.mean_load},
          {"output_count", stats.output_count},
          {"duplicate_outputs", stats.duplicate_outputs},
          {"exactly_once_checked", stats.exactly_once_checked},
          {"load_histogram", histogram},
          {"residuals", residuals}};
}

inline void write_stats_csv(std::ostream& out, const ShuffleStats& stats) {
  out << "residual_id,label,k,k_int,predicted_cost,measured_pairs,max_load,mean_load,output_count\n";
  for (const auto& r : stats.residuals) {
    out << r.residual_id << ",\"" << r.label << "\"," << r.k << ',' << r.k_int << ',' << r.predicted_cost << ','
        << r.measured_pairs << ',' << r.max_load << ',' << r.mean_load << ',' << r.output_count << '\n';
  }
}

}  // namespace skewjoin
