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
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skewjoin/cost_expression.hpp"
#include "skewjoin/error.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/share_solver.hpp"

namespace skewjoin {

/// Minimum communication of any one-round scheme that joins r tuples with s
/// tuples sharing one heavy value on k reducers.
inline double two_way_lower_bound(double r, double s, double k) {
  if (r < 0 || s < 0 || k < 1) fail(ErrorKind::kInvalidArgument, "lower bound needs r, s >= 0 and k >= 1");
  return 2.0 * std::sqrt(k * r * s);
}

/// Partition-one-side, broadcast-the-other: the larger side is hashed once,
/// the smaller side is copied to all k reducers.
inline double naive_two_way_cost(double r, double s, double k) {
  return std::max(r, s) + k * std::min(r, s);
}

/// R1(A0,A1) ⋈ R2(A1,A2) ⋈ ... ⋈ Rn(A{n-1},An).
inline JoinSpec chain_spec(std::size_t n, const std::vector<std::size_t>& sizes = {}) {
  if (n < 2) fail(ErrorKind::kInvalidArgument, "a chain needs at least 2 relations");
  std::vector<RelationSchema> relations;
  for (std::size_t i = 1; i <= n; ++i) {
    RelationSchema relation{"R" + std::to_string(i), {"A" + std::to_string(i - 1), "A" + std::to_string(i)}, {}};
    if (!sizes.empty()) relation.declared_size = sizes.at(i - 1);
    relations.push_back(std::move(relation));
  }
  return JoinSpec(std::move(relations));
}

/// Cyclic symmetric join: n relations over attributes X1..Xn, relation Ri
/// covering the d cyclically consecutive attributes Xi..X(i+d-1).
inline JoinSpec cyclic_symmetric_spec(std::size_t n, std::size_t d, const std::vector<std::size_t>& sizes = {}) {
  if (d < 1 || d >= n) fail(ErrorKind::kInvalidArgument, "symmetric join needs 1 <= d < n");
  std::vector<RelationSchema> relations;
  for (std::size_t i = 0; i < n; ++i) {
    RelationSchema relation{"R" + std::to_string(i + 1), {}, {}};
    for (std::size_t t = 0; t < d; ++t) relation.attributes.push_back("X" + std::to_string((i + t) % n + 1));
    if (!sizes.empty()) relation.declared_size = sizes.at(i);
    relations.push_back(std::move(relation));
  }
  return JoinSpec(std::move(relations));
}

struct ChainEqualResult {
  std::vector<std::size_t> subchain_lengths;
  std::vector<double> subchain_k;
  std::map<std::string, double> shares;  // A0..An
  double cost = 0.0;
};

/// Equal-size chain split into subchains at heavy-hitter attributes
/// (`hh_positions` are indices j of attributes Aj, 0 < j < n). Subchain i of
/// n_i relations costs r * n_i * k_i^((n_i-2)/n_i); the k_i satisfy
/// (n_1-2) k_1^((n_1-2)/n_1) = (n_i-2) k_i^((n_i-2)/n_i) and prod k_i = k.
/// Two-relation subchains have a k-independent cost and get k_i = 1, unless
/// every subchain has two relations, in which case k is split evenly.
inline ChainEqualResult chain_equal_cost(std::size_t n, double r, std::vector<std::size_t> hh_positions, double k) {
  if (n < 2) fail(ErrorKind::kInvalidArgument, "a chain needs at least 2 relations");
  if (k < 1) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
  std::sort(hh_positions.begin(), hh_positions.end());
  if (std::adjacent_find(hh_positions.begin(), hh_positions.end()) != hh_positions.end()) {
    fail(ErrorKind::kInvalidArgument, "duplicate heavy-hitter position");
  }
  std::vector<std::size_t> bounds{0};
  for (std::size_t p : hh_positions) {
    if (p == 0 || p >= n) fail(ErrorKind::kInvalidArgument, "heavy-hitter position must lie strictly inside the chain");
    bounds.push_back(p);
  }
  bounds.push_back(n);

  ChainEqualResult out;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    std::size_t length = bounds[i + 1] - bounds[i];
    if (length % 2 != 0) {
      fail(ErrorKind::kUnsupported, "subchain of odd length " + std::to_string(length) + " has no closed form");
    }
    out.subchain_lengths.push_back(length);
  }
  const std::size_t m = out.subchain_lengths.size();
  out.subchain_k.assign(m, 1.0);

  // ln lambda = (ln k + sum_i e_i ln(n_i-2)) / sum_i e_i with e_i = n_i/(n_i-2).
  double weight = 0.0, offset = 0.0;
  for (std::size_t len : out.subchain_lengths) {
    if (len <= 2) continue;
    double e = static_cast<double>(len) / static_cast<double>(len - 2);
    weight += e;
    offset += e * std::log(static_cast<double>(len - 2));
  }
  if (weight == 0.0) {
    for (auto& ki : out.subchain_k) ki = std::pow(k, 1.0 / static_cast<double>(m));
  } else {
    const double log_lambda = (std::log(k) + offset) / weight;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t len = out.subchain_lengths[i];
      if (len <= 2) continue;
      double e = static_cast<double>(len) / static_cast<double>(len - 2);
      out.subchain_k[i] = std::exp(e * (log_lambda - std::log(static_cast<double>(len - 2))));
    }
  }

  for (std::size_t j = 0; j <= n; ++j) out.shares["A" + std::to_string(j)] = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double len = static_cast<double>(out.subchain_lengths[i]);
    out.cost += r * len * std::pow(out.subchain_k[i], (len - 2.0) / len);
    // Odd interior positions of the subchain split its budget evenly.
    for (std::size_t t = 1; t < out.subchain_lengths[i]; t += 2) {
      out.shares["A" + std::to_string(bounds[i] + t)] = std::pow(out.subchain_k[i], 2.0 / len);
    }
  }
  return out;
}

struct ChainArbitraryResult {
  double cost = 0.0;
  std::map<std::string, double> shares;  // A0..An, endpoints 1
};

/// Optimal cost of an even-length chain with arbitrary relation sizes:
///   n/2 * k^((n-2)/n) * ((r1 r3 r5 ...)^(2/n) + (r2 r4 r6 ...)^(2/n))
/// and the shares recovered from tau_i = r_i k / (a_{i-1} a_i) being lambda_1
/// on odd terms and lambda_2 on even terms. Shares may fall below 1 outside
/// the region where the closed form is the constrained optimum.
inline ChainArbitraryResult chain_arbitrary_cost(const std::vector<double>& sizes, double k) {
  const std::size_t n = sizes.size();
  if (n < 2) fail(ErrorKind::kInvalidArgument, "a chain needs at least 2 relations");
  if (n % 2 != 0) fail(ErrorKind::kUnsupported, "closed form covers even-length chains only");
  if (k < 1) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
  const double nd = static_cast<double>(n);
  double log_odd = 0.0, log_even = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[i] <= 0) fail(ErrorKind::kInvalidArgument, "chain sizes must be positive");
    (i % 2 == 0 ? log_odd : log_even) += std::log(sizes[i]);
  }
  const double scale = std::pow(k, (nd - 2.0) / nd);
  const double lambda_odd = scale * std::exp(2.0 / nd * log_odd);
  const double lambda_even = scale * std::exp(2.0 / nd * log_even);

  ChainArbitraryResult out;
  out.cost = nd / 2.0 * (lambda_odd + lambda_even);
  out.shares["A0"] = 1.0;
  double previous = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    // Term i (1-based) has lambda_odd when i is odd.
    const double lambda = (i % 2 == 1) ? lambda_odd : lambda_even;
    const double share = sizes[i - 1] * k / (lambda * previous);
    out.shares["A" + std::to_string(i)] = share;
    previous = share;
  }
  out.shares["A" + std::to_string(n)] = 1.0;
  return out;
}

namespace detail {

inline void check_symmetric(std::size_t n, std::size_t d, const std::vector<double>& sizes, double k) {
  if (d < 1 || d >= n) fail(ErrorKind::kInvalidArgument, "symmetric join needs 1 <= d < n");
  if (sizes.size() != n) fail(ErrorKind::kInvalidArgument, "need one size per relation");
  if (k < 1) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
  for (double s : sizes) {
    if (s <= 0) fail(ErrorKind::kInvalidArgument, "relation sizes must be positive");
  }
}

/// Common value of tau on each orbit {j, j+d, j+2d, ...} (mod n); the orbits
/// are the residue classes mod gcd(n, d).
inline std::vector<double> symmetric_orbit_tau(std::size_t n, std::size_t d, const std::vector<double>& sizes, double k) {
  const std::size_t g = std::gcd(n, d);
  const double n_d = static_cast<double>(n / g);
  std::vector<double> tau(g);
  for (std::size_t j = 0; j < g; ++j) {
    double log_product = 0.0;
    for (std::size_t i = j; i < n; i += g) log_product += std::log(sizes[i]);
    tau[j] = std::pow(k, 1.0 - static_cast<double>(d) / static_cast<double>(n)) * std::exp(log_product / n_d);
  }
  return tau;
}

}  // namespace detail

/// n_d * k^(1-d/n) * sum over orbits S of (prod_{i in S} r_i)^(1/n_d), with
/// n_d = n / gcd(n, d).
inline double symmetric_cost(std::size_t n, std::size_t d, const std::vector<double>& sizes, double k) {
  detail::check_symmetric(n, d, sizes, k);
  const double n_d = static_cast<double>(n / std::gcd(n, d));
  double total = 0.0;
  for (double tau : detail::symmetric_orbit_tau(n, d, sizes, k)) total += tau;
  return n_d * total;
}

struct SymmetricShares {
  std::map<std::string, double> shares;  // X1..Xn
  bool closed_form = true;               // false when the numeric solver was used instead
};

/// Shares for the cyclic symmetric join. With every tau_i known, ln(r_i k /
/// tau_i) = sum of the log-shares of the d attributes of R_i, a circulant
/// linear system; together with sum ln a = ln k it is solved in the minimum
/// norm sense (it is rank-deficient when gcd(n, d) > 1). The recovered shares
/// are checked against symmetric_cost; on mismatch the numeric solver is used.
inline SymmetricShares symmetric_shares(std::size_t n, std::size_t d, const std::vector<double>& sizes, double k) {
  detail::check_symmetric(n, d, sizes, k);
  const auto tau = detail::symmetric_orbit_tau(n, d, sizes, k);
  const std::size_t g = tau.size();
  const int rows = static_cast<int>(n) + 1;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(rows, static_cast<int>(n));
  Eigen::VectorXd rhs(rows);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < d; ++t) system(static_cast<int>(i), static_cast<int>((i + t) % n)) = 1.0;
    rhs(static_cast<int>(i)) = std::log(sizes[i] * k / tau[i % g]);
  }
  system.row(static_cast<int>(n)).setOnes();
  rhs(static_cast<int>(n)) = std::log(k);
  Eigen::VectorXd log_shares = system.completeOrthogonalDecomposition().solve(rhs);

  SymmetricShares out;
  for (std::size_t i = 0; i < n; ++i) out.shares["X" + std::to_string(i + 1)] = std::exp(log_shares(static_cast<int>(i)));

  auto spec = cyclic_symmetric_spec(n, d);
  auto expr = build_generic_cost(spec);
  for (std::size_t i = 0; i < n; ++i) expr.terms[i].coefficient = sizes[i];
  const double expected = symmetric_cost(n, d, sizes, k);
  const double residual = (system * log_shares - rhs).cwiseAbs().maxCoeff();
  if (residual > 1e-8 || std::abs(expr.evaluate(out.shares) - expected) > 1e-6 * expected) {
    out.shares = solve_real_shares(expr, k).shares;
    out.closed_form = false;
  }
  return out;
}

}  // namespace skewjoin
