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

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "skewjoin/error.hpp"
#include "skewjoin/executor.hpp"
#include "skewjoin/heavy_hitters.hpp"
#include "skewjoin/planner.hpp"

namespace skewjoin {

/// Algorithms: "shares" (one grid, skew ignored), "sharesskew" (residual
/// joins per heavy-hitter combination), "naive" (2-way partition/broadcast).
struct ExperimentSweep {
  std::vector<double> ks;
  std::vector<std::string> algorithms = {"shares", "sharesskew", "naive"};
  std::uint64_t hash_seed = 0;
  bool reduce = false;  // shuffle-only unless output counts are wanted
};

struct SweepRow {
  std::string algorithm;
  double k = 1.0;
  std::int64_t k_int = 1;
  double predicted_cost = 0.0;
  std::uint64_t measured_pairs = 0;
  std::uint64_t max_load = 0;
  std::uint64_t output_count = 0;
};

inline void check_sweep(const ExperimentSweep& sweep) {
  if (sweep.ks.empty()) fail(ErrorKind::kInvalidArgument, "sweep needs at least one k");
  for (std::size_t i = 0; i < sweep.ks.size(); ++i) {
    if (!(sweep.ks[i] >= 1.0)) fail(ErrorKind::kInvalidArgument, "sweep values must be >= 1");
    if (i > 0 && !(sweep.ks[i] > sweep.ks[i - 1])) {
      fail(ErrorKind::kInvalidArgument, "sweep values must be strictly increasing");
    }
  }
  for (const auto& a : sweep.algorithms) {
    if (a != "shares" && a != "sharesskew" && a != "naive") {
      fail(ErrorKind::kInvalidArgument, "unknown algorithm '" + a + "'");
    }
  }
}

/// Heavy values of the single join attribute of a 2-way join.
inline std::vector<std::string> two_way_heavy_values(const JoinSpec& spec, const HeavyHitterCatalog& catalog) {
  std::vector<std::string> values;
  for (const auto& attribute : catalog.attributes()) {
    if (spec.incidence(attribute).size() < 2) continue;
    for (const auto& h : catalog.heavy_hitters(attribute)) values.push_back(h.value);
  }
  return values;
}

inline std::vector<SweepRow> run_sweep(const JoinSpec& spec, const TupleStore& store, const HeavyHitterCatalog& catalog,
                                       const ExperimentSweep& sweep) {
  check_sweep(sweep);
  ExecutorOptions exec;
  exec.reduce = sweep.reduce;
  exec.materialize = false;
  std::vector<SweepRow> rows;
  for (const auto& algorithm : sweep.algorithms) {
    for (double k : sweep.ks) {
      SweepRow row;
      row.algorithm = algorithm;
      row.k = k;
      ShuffleStats stats;
      if (algorithm == "naive") {
        const auto kk = static_cast<std::int64_t>(std::floor(k));
        stats = naive_2way(store, spec, two_way_heavy_values(spec, catalog), kk, sweep.hash_seed, exec).second;
        row.k_int = kk;
        for (const auto& r : stats.residuals) row.predicted_cost += r.predicted_cost;
      } else {
        PlannerOptions options;
        options.k = k;
        options.hash_seed = sweep.hash_seed;
        const JoinPlan plan =
            build_plan(spec, store, algorithm == "shares" ? HeavyHitterCatalog{} : catalog, options);
        stats = run_job(store, plan, exec).second;
        row.predicted_cost = plan.predicted_cost();
        row.k_int = plan.reducer_count();
      }
      row.measured_pairs = stats.total_pairs;
      row.max_load = stats.max_load;
      row.output_count = stats.output_count;
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "algorithm,k,k_int,predicted_cost,measured_pairs,max_load\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.k << ',' << r.k_int << ',' << r.predicted_cost << ',' << r.measured_pairs << ','
        << r.max_load << '\n';
  }
}

}  // namespace skewjoin
