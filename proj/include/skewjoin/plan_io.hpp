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

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skewjoin/error.hpp"
#include "skewjoin/planner.hpp"
#include "skewjoin/spec_io.hpp"

namespace skewjoin {

inline constexpr const char* kPlanFormat = "skewjoin-plan/1";

namespace detail {

inline nlohmann::json cost_to_json(const CostExpression& expr) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : expr.terms) {
    terms.push_back({{"relation", t.relation}, {"coefficient", t.coefficient}, {"variables", t.variables}});
  }
  return {{"symbolic", expr.symbolic()},
          {"terms", terms},
          {"free_variables", expr.free_variables},
          {"pinned", expr.pinned}};
}

inline CostExpression cost_from_json(const nlohmann::json& j) {
  CostExpression expr;
  for (const auto& t : j.at("terms")) {
    expr.terms.push_back({t.at("relation").get<std::string>(), t.at("coefficient").get<double>(),
                          t.at("variables").get<std::vector<std::string>>()});
  }
  expr.free_variables = j.at("free_variables").get<std::vector<std::string>>();
  expr.pinned = j.at("pinned").get<std::vector<std::string>>();
  return expr;
}

}  // namespace detail

inline nlohmann::json plan_to_json(const JoinPlan& plan) {
  nlohmann::json residuals = nlohmann::json::array();
  for (const auto& r : plan.residuals) {
    nlohmann::json shares = nlohmann::json::object();
    for (const auto& [name, value] : r.shares.shares) shares[name] = {{"real", value.real}, {"integer", value.integer}};
    residuals.push_back({{"id", r.id},
                         {"label", r.label()},
                         {"types", r.types},
                         {"relevant_sizes", r.relevant_sizes},
                         {"cost", detail::cost_to_json(r.cost)},
                         {"shares", shares},
                         {"k", r.k},
                         {"k_real", r.shares.k_real},
                         {"k_int", r.shares.k_int},
                         {"real_cost", r.shares.real_cost},
                         {"predicted_cost", r.predicted_cost},
                         {"infeasible", r.infeasible},
                         {"absorbed", r.absorbed}});
  }
  nlohmann::json routing = nlohmann::json::array();
  for (const auto& [combination, residual] : plan.routing) routing.push_back({combination, residual});
  nlohmann::json j = {{"format", kPlanFormat},
                      {"spec", spec_to_json(plan.spec)},
                      {"catalog", catalog_to_json(plan.catalog)},
                      {"hash_seed", plan.hash_seed},
                      {"combination_count", plan.combination_count},
                      {"predicted_cost", plan.predicted_cost()},
                      {"reducer_count", plan.reducer_count()},
                      {"routing", routing},
                      {"residuals", residuals}};
  j["k"] = plan.k ? nlohmann::json(*plan.k) : nlohmann::json(nullptr);
  j["q"] = plan.q ? nlohmann::json(*plan.q) : nlohmann::json(nullptr);
  return j;
}

inline JoinPlan plan_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kPlanFormat) fail(ErrorKind::kParse, std::string("plan file is not ") + kPlanFormat);
  try {
    JoinPlan plan;
    plan.spec = spec_from_json(j.at("spec")).spec;
    plan.catalog = catalog_from_json(j.at("catalog"));
    plan.hash_seed = j.at("hash_seed").get<std::uint64_t>();
    plan.combination_count = j.at("combination_count").get<std::size_t>();
    if (!j.at("k").is_null()) plan.k = j.at("k").get<double>();
    if (!j.at("q").is_null()) plan.q = j.at("q").get<double>();
    for (const auto& e : j.at("routing")) plan.routing[e.at(0).get<std::size_t>()] = e.at(1).get<std::size_t>();
    for (const auto& r : j.at("residuals")) {
      ResidualPlan residual;
      residual.id = r.at("id").get<std::size_t>();
      residual.types = r.at("types").get<TypeAssignment>();
      residual.relevant_sizes = r.at("relevant_sizes").get<RelevantSizes>();
      residual.cost = detail::cost_from_json(r.at("cost"));
      for (const auto& [name, value] : r.at("shares").items()) {
        residual.shares.shares[name] = {value.at("real").get<double>(), value.at("integer").get<std::int64_t>()};
      }
      residual.k = r.at("k").get<double>();
      residual.shares.k_real = r.at("k_real").get<double>();
      residual.shares.k_int = r.at("k_int").get<std::int64_t>();
      residual.shares.real_cost = r.at("real_cost").get<double>();
      residual.predicted_cost = r.at("predicted_cost").get<double>();
      residual.shares.integer_cost = residual.predicted_cost;
      residual.infeasible = r.at("infeasible").get<bool>();
      residual.absorbed = r.at("absorbed").get<std::vector<std::size_t>>();
      plan.residuals.push_back(std::move(residual));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed plan: ") + e.what());
  }
}

}  // namespace skewjoin
