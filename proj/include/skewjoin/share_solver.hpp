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
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skewjoin/cost_expression.hpp"
#include "skewjoin/error.hpp"

namespace skewjoin {

struct SolverOptions {
  /// Relative tolerance on the stationarity residual max|g_i - lambda| / max g.
  double tolerance = 1e-9;
  int max_iterations = 10000;
};

/// Real-valued optimum of a cost expression under prod(shares) = k, shares >= 1.
struct RealShares {
  std::map<std::string, double> shares;  // free variables only
  double cost = 0.0;
  double k = 1.0;
  int iterations = 0;
};

struct ShareValue {
  double real = 1.0;
  std::int64_t integer = 1;
};

/// Shares of every variable of an expression (free and pinned). Pinned
/// variables always carry exactly 1.
struct ShareAssignment {
  std::map<std::string, ShareValue> shares;
  double k_real = 1.0;
  std::int64_t k_int = 1;
  double real_cost = 0.0;
  double integer_cost = 0.0;
  int iterations = 0;

  std::map<std::string, double> real_map() const {
    std::map<std::string, double> out;
    for (const auto& [name, value] : shares) out[name] = value.real;
    return out;
  }

  std::map<std::string, std::int64_t> integer_map() const {
    std::map<std::string, std::int64_t> out;
    for (const auto& [name, value] : shares) out[name] = value.integer;
    return out;
  }
};

namespace detail {

struct IndexedExpression {
  std::vector<std::string> names;
  std::vector<double> coefficient;
  std::vector<std::vector<int>> members;  // term -> variable indices
};

inline IndexedExpression index_expression(const CostExpression& expr) {
  IndexedExpression out;
  out.names = expr.free_variables;
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < out.names.size(); ++i) index[out.names[i]] = static_cast<int>(i);
  for (const auto& term : expr.terms) {
    out.coefficient.push_back(term.coefficient);
    out.members.emplace_back();
    for (const auto& variable : term.variables) {
      auto it = index.find(variable);
      if (it == index.end()) {
        fail(ErrorKind::kInvalidArgument, "term variable '" + variable + "' is not a free variable");
      }
      out.members.back().push_back(it->second);
    }
  }
  return out;
}

}  // namespace detail

/// Minimises sum_j c_j prod_{i in S_j} x_i subject to prod_i x_i = k and
/// x_i >= 1 over the free variables of `expr`.
///
/// Works on log-shares u_i = ln x_i, where the objective is a convex sum of
/// exponentials and the constraints are sum u_i = ln k, u_i >= 0. A damped
/// Newton method runs on the face of non-pinned variables; a variable hitting
/// u_i = 0 is pinned (share 1), and a pinned variable whose gradient falls
/// below the multiplier is released again, until the KKT conditions hold.
inline RealShares solve_real_shares(const CostExpression& expr, double k, const SolverOptions& options = {}) {
  if (!(k >= 1.0) || !std::isfinite(k)) fail(ErrorKind::kInvalidArgument, "reducer budget k must be >= 1");
  RealShares result;
  const auto ix = detail::index_expression(expr);
  const int n = static_cast<int>(ix.names.size());
  const int m = static_cast<int>(ix.coefficient.size());

  if (n == 0) {
    result.cost = expr.coefficient_sum();
    result.k = 1.0;
    return result;
  }
  result.k = k;

  // Variables that multiply no positive term cost nothing to grow.
  std::vector<bool> sink(n, true);
  for (int j = 0; j < m; ++j) {
    if (ix.coefficient[j] <= 0.0) continue;
    for (int i : ix.members[j]) sink[i] = false;
  }
  const int sink_count = static_cast<int>(std::count(sink.begin(), sink.end(), true));
  const double log_k = std::log(k);
  if (sink_count > 0 || log_k == 0.0) {
    // Budget goes to the sinks evenly; everything else stays at 1.
    for (int i = 0; i < n; ++i) {
      result.shares[ix.names[i]] = sink[i] ? std::exp(log_k / sink_count) : 1.0;
    }
    result.cost = expr.evaluate(result.shares);
    return result;
  }

  std::vector<double> u(n, log_k / n);
  std::vector<bool> free(n, true);
  std::vector<double> term_value(m), gradient(n);

  auto evaluate = [&](const std::vector<double>& point) {
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      double exponent = 0.0;
      for (int i : ix.members[j]) exponent += point[i];
      term_value[j] = ix.coefficient[j] * std::exp(exponent);
      total += term_value[j];
    }
    return total;
  };
  auto objective = [&](const std::vector<double>& point) {
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      double exponent = 0.0;
      for (int i : ix.members[j]) exponent += point[i];
      total += ix.coefficient[j] * std::exp(exponent);
    }
    return total;
  };

  bool converged = false;
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    const double f = evaluate(u);
    std::fill(gradient.begin(), gradient.end(), 0.0);
    for (int j = 0; j < m; ++j) {
      for (int i : ix.members[j]) gradient[i] += term_value[j];
    }
    std::vector<int> face;
    for (int i = 0; i < n; ++i) {
      if (free[i]) face.push_back(i);
    }
    if (face.empty()) fail(ErrorKind::kInternal, "share solver lost all free variables");

    double lambda = 0.0, g_max = 0.0;
    for (int i : face) lambda += gradient[i];
    lambda /= static_cast<double>(face.size());
    for (int i = 0; i < n; ++i) g_max = std::max(g_max, gradient[i]);
    double residual = 0.0;
    for (int i : face) residual = std::max(residual, std::abs(gradient[i] - lambda));

    const double tol = options.tolerance * g_max;
    if (residual <= tol) {
      // Stationary on the face; release the pinned variable that most wants to grow.
      int release = -1;
      for (int i = 0; i < n; ++i) {
        if (!free[i] && gradient[i] < lambda - tol && (release < 0 || gradient[i] < gradient[release])) release = i;
      }
      if (release < 0) {
        converged = true;
        break;
      }
      free[release] = true;
      continue;
    }

    // Equality-constrained Newton step on the face:
    //   [H  1][d]   [-g]
    //   [1' 0][nu] = [ 0]
    const int size = static_cast<int>(face.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(size + 1, size + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size + 1);
    std::vector<int> position(n, -1);
    for (int a = 0; a < size; ++a) position[face[a]] = a;
    for (int j = 0; j < m; ++j) {
      for (int i : ix.members[j]) {
        if (position[i] < 0) continue;
        for (int l : ix.members[j]) {
          if (position[l] < 0) continue;
          kkt(position[i], position[l]) += term_value[j];
        }
      }
    }
    // The Hessian is singular along directions that leave every term
    // unchanged (e.g. the cyclic (4,2) join); the cost is flat there, so the
    // minimum-norm step is taken. Scaling by g_max keeps the rank test sane.
    const double scale = 1.0 / g_max;
    kkt.topLeftCorner(size, size) *= scale;
    for (int a = 0; a < size; ++a) {
      kkt(a, size) = 1.0;
      kkt(size, a) = 1.0;
      rhs(a) = -gradient[face[a]] * scale;
    }
    Eigen::VectorXd solution = kkt.completeOrthogonalDecomposition().solve(rhs);
    std::vector<double> direction(n, 0.0);
    double slope = 0.0;
    for (int a = 0; a < size; ++a) {
      direction[face[a]] = solution(a);
      slope += gradient[face[a]] * solution(a);
    }
    if (!(slope < -1e-15 * f)) {
      // No numerically meaningful descent left.
      if (residual <= 1e-7 * g_max) {
        converged = true;
        break;
      }
      fail(ErrorKind::kNotConverged, "share solver stalled with stationarity residual " + std::to_string(residual / g_max));
    }

    double step_max = std::numeric_limits<double>::infinity();
    int blocking = -1;
    for (int i : face) {
      if (direction[i] < 0.0) {
        double limit = -u[i] / direction[i];
        if (limit < step_max) {
          step_max = limit;
          blocking = i;
        }
      }
    }
    if (blocking >= 0 && step_max <= 1e-12) {
      // Already on the bound up to rounding; a line search cannot resolve it.
      u[blocking] = 0.0;
      free[blocking] = false;
      continue;
    }
    double step = std::min(1.0, step_max);
    std::vector<double> trial(n);
    for (;;) {
      for (int i = 0; i < n; ++i) trial[i] = u[i] + step * direction[i];
      if (objective(trial) <= f + 1e-4 * step * slope || step < 1e-20) break;
      step *= 0.5;
    }
    const bool hit_bound = blocking >= 0 && step == step_max;
    u = trial;
    if (hit_bound) {
      u[blocking] = 0.0;
      free[blocking] = false;
    }
    for (int i = 0; i < n; ++i) {
      if (free[i] && u[i] < 0.0) {
        u[i] = 0.0;
        free[i] = false;
      }
    }
    // Re-project onto sum u = ln k to stop rounding drift.
    double total = 0.0;
    int free_count = 0;
    for (int i = 0; i < n; ++i) {
      total += u[i];
      if (free[i]) ++free_count;
    }
    if (free_count > 0) {
      const double shift = (log_k - total) / free_count;
      for (int i = 0; i < n; ++i) {
        if (free[i]) u[i] += shift;
      }
    }
  }
  if (!converged) {
    fail(ErrorKind::kNotConverged, "share solver did not converge in " + std::to_string(options.max_iterations) +
                                       " iterations");
  }
  for (int i = 0; i < n; ++i) result.shares[ix.names[i]] = free[i] ? std::exp(u[i]) : 1.0;
  result.cost = expr.evaluate(result.shares);
  result.iterations = iteration;
  return result;
}

/// Integer shares with product at most floor(k). Starts from the floor of the
/// real shares and greedily raises the share whose increment costs the least
/// per unit of log-reducer gain, ties broken by variable name, until no
/// increment fits the budget.
inline std::map<std::string, std::int64_t> integerize_shares(const CostExpression& expr,
                                                             const std::map<std::string, double>& real, double k) {
  const auto ix = detail::index_expression(expr);
  const int n = static_cast<int>(ix.names.size());
  std::map<std::string, std::int64_t> out;
  if (n == 0) return out;
  if (k > 4.0e18) fail(ErrorKind::kLimitExceeded, "reducer budget too large to integerize");
  const auto budget = static_cast<std::int64_t>(std::floor(k + 1e-9));

  std::vector<std::int64_t> x(n, 1);
  for (int i = 0; i < n; ++i) {
    auto it = real.find(ix.names[i]);
    double value = it == real.end() ? 1.0 : it->second;
    x[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(value + 1e-9)));
  }
  auto product = [&] {
    std::int64_t p = 1;
    for (auto v : x) p *= v;
    return p;
  };
  while (product() > budget) {
    *std::max_element(x.begin(), x.end()) -= 1;
  }

  std::int64_t current = product();
  for (;;) {
    int best = -1;
    double best_score = 0.0;
    for (int i = 0; i < n; ++i) {  // names are sorted, so the first minimum wins ties
      if (current / x[i] * (x[i] + 1) > budget) continue;
      double delta = 0.0;
      for (int j = 0; j < static_cast<int>(ix.members.size()); ++j) {
        const auto& members = ix.members[j];
        if (std::find(members.begin(), members.end(), i) == members.end()) continue;
        double others = ix.coefficient[j];
        for (int l : members) {
          if (l != i) others *= static_cast<double>(x[l]);
        }
        delta += others;
      }
      double gain = std::log(static_cast<double>(x[i] + 1) / static_cast<double>(x[i]));
      double score = delta / gain;
      if (best < 0 || score < best_score * (1.0 - 1e-12)) {
        best = i;
        best_score = score;
      }
    }
    if (best < 0) break;
    current = current / x[best] * (x[best] + 1);
    ++x[best];
  }
  for (int i = 0; i < n; ++i) out[ix.names[i]] = x[i];
  return out;
}

/// Real optimum plus integerized shares for a reducer budget k.
/// With no free variables the budget is forced to a single reducer.
inline ShareAssignment solve_shares(const CostExpression& expr, double k, const SolverOptions& options = {}) {
  ShareAssignment out;
  auto real = solve_real_shares(expr, k, options);
  auto integer = integerize_shares(expr, real.shares, real.k);
  out.k_real = real.k;
  out.real_cost = real.cost;
  out.iterations = real.iterations;
  for (const auto& name : expr.pinned) out.shares[name] = ShareValue{1.0, 1};
  out.k_int = 1;
  for (const auto& [name, value] : real.shares) {
    out.shares[name] = ShareValue{value, integer.at(name)};
    out.k_int *= integer.at(name);
  }
  std::map<std::string, std::int64_t> integer_all;
  for (const auto& [name, value] : out.shares) integer_all[name] = value.integer;
  out.integer_cost = expr.evaluate(integer_all);
  return out;
}

}  // namespace skewjoin
