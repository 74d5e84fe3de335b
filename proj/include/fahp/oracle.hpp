// SPDX-License-Identifier: Apache-2.0
//
// fahp: energy-efficient hybrid precoding for fully-adaptive-connected arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "fahp/matching.hpp"
#include "fahp/parallel.hpp"

namespace fahp {

inline constexpr std::size_t kExhaustiveMaxSwitches = 20;

struct OracleResult {
  ConnectionState best_d;
  double best_ee = 0.0;
  HybridPrecoder best_precoder;
  std::size_t evaluated_count = 0;
  double runtime_seconds = 0.0;
};

namespace detail {

// Row/column cap screen on a row-major packed state.
inline bool packed_within_caps(std::uint64_t bits, const SystemConfig& cfg) {
  const std::size_t n = cfg.n_rf;
  const std::uint64_t row_mask = (std::uint64_t{1} << n) - 1;
  for (std::size_t i = 0; i < cfg.m_t; ++i)
    if (static_cast<std::size_t>(std::popcount((bits >> (i * n)) & row_mask)) > cfg.row_caps[i]) return false;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < cfg.m_t; ++i) s += (bits >> (i * n + j)) & 1u;
    if (s > cfg.col_caps[j]) return false;
  }
  return true;
}

}  // namespace detail

// Enumerates every cap-feasible connection state and keeps the one with the
// highest AHP energy efficiency. Ties go to the smallest packed encoding.
inline OracleResult exhaustive_dcs(const UtilityEvaluator& u, std::size_t threads = 1) {
  const SystemConfig& cfg = u.config();
  const std::size_t switches = cfg.m_t * cfg.n_rf;
  if (switches > kExhaustiveMaxSwitches)
    throw InvalidInput("exhaustive search refused: m_t * n_rf = " + std::to_string(switches) + " exceeds " +
                       std::to_string(kExhaustiveMaxSwitches) + " (2^" + std::to_string(switches) + " AHP runs)");
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::uint64_t> feasible;
  const std::uint64_t total = std::uint64_t{1} << switches;
  for (std::uint64_t bits = 0; bits < total; ++bits)
    if (detail::packed_within_caps(bits, cfg)) feasible.push_back(bits);

  std::vector<double> values(feasible.size());
  parallel_for(feasible.size(), threads, [&](std::size_t k) {
    values[k] = u(ConnectionState::from_bits(cfg.m_t, cfg.n_rf, feasible[k]));
  });

  OracleResult out;
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  out.best_d = ConnectionState::from_bits(cfg.m_t, cfg.n_rf, feasible[best]);
  const UtilityCache::Entry e = u.evaluate(out.best_d);
  out.best_ee = e.ee;
  out.best_precoder = e.precoder;
  out.evaluated_count = feasible.size();
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline OracleResult exhaustive_dcs(const ChannelMatrix& h, const SystemConfig& cfg, std::uint64_t seed,
                                   std::size_t threads = 1) {
  return exhaustive_dcs(UtilityEvaluator(h, cfg, seed), threads);
}

struct GridOptimum {
  double power = 0.0;
  double ee = 0.0;
};

// Dense sweep of log2(1 + s1^2 p / sigma^2) / (p + pc) over p in [0, P_max],
// s1 the largest singular value of H. Single-stream reference for the
// full-digital solver.
inline GridOptimum grid_full_digital_ls1(const ChannelMatrix& h, double pc, const SystemConfig& cfg,
                                         std::size_t grid_points = 1'000'000) {
  if (cfg.l_s != 1) throw InvalidInput("grid oracle is single-stream only");
  if (grid_points < 2) throw InvalidInput("grid oracle needs at least two points");
  const Eigen::JacobiSVD<CMatrix> svd(h);
  const double s1 = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  GridOptimum best;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double p = cfg.p_max * static_cast<double>(k) / static_cast<double>(grid_points - 1);
    const double ee = std::log2(1.0 + s1 * s1 * p / cfg.sigma2) / (p + pc);
    if (ee > best.ee) best = {p, ee};
  }
  return best;
}

}  // namespace fahp
