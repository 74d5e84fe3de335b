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

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "fahp/core_model.hpp"
#include "fahp/rng.hpp"

namespace fahp {

enum class ChannelKind { rayleigh, geometric };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::rayleigh;
  std::vector<double> aod_degrees;  // one per path
  std::vector<cplx> path_gains;     // empty: drawn CN(0,1) from rng_seed
  double element_spacing_wavelengths = 0.5;
  std::uint64_t rng_seed = 0;
};

struct Beampattern {
  std::vector<double> angles;    // degrees, strictly increasing
  std::vector<double> gains_db;  // floored at kBeampatternFloorDb
};

inline constexpr double kBeampatternFloorDb = -300.0;

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// ULA steering vector a(theta)_m = exp(j 2 pi spacing m sin(theta)).
inline CVector steering_vector(std::size_t n, double theta_deg, double spacing = 0.5) {
  CVector a(static_cast<Eigen::Index>(n));
  const double k = 2.0 * std::numbers::pi * spacing * std::sin(deg_to_rad(theta_deg));
  for (std::size_t m = 0; m < n; ++m) a(static_cast<Eigen::Index>(m)) = std::polar(1.0, k * static_cast<double>(m));
  return a;
}

// I.i.d. CN(0,1) entries, reproducible from `seed`.
inline ChannelMatrix sample_rayleigh(const SystemConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ChannelMatrix h(static_cast<Eigen::Index>(cfg.m_r), static_cast<Eigen::Index>(cfg.m_t));
  for (Eigen::Index c = 0; c < h.cols(); ++c)
    for (Eigen::Index r = 0; r < h.rows(); ++r) h(r, c) = rng.complex_gaussian(1.0);
  return h;
}

// Sum of rank-one ULA paths, scaled so that E||H||_F^2 = M_T M_R.
inline ChannelMatrix sample_geometric(const SystemConfig& cfg, const ChannelSpec& spec) {
  if (spec.aod_degrees.empty()) throw InvalidInput("geometric channel needs at least one path");
  if (!(spec.element_spacing_wavelengths > 0.0)) throw InvalidInput("element spacing must be positive");
  if (!spec.path_gains.empty() && spec.path_gains.size() != spec.aod_degrees.size())
    throw InvalidInput("path_gains must match aod_degrees in length");

  std::vector<cplx> gains = spec.path_gains;
  if (gains.empty()) {
    Rng rng(spec.rng_seed);
    for (std::size_t p = 0; p < spec.aod_degrees.size(); ++p) gains.push_back(rng.complex_gaussian(1.0));
  }
  double power = 0.0;
  for (const cplx& g : gains) power += std::norm(g);
  if (!(power > 0.0)) throw InvalidInput("path gains are all zero");

  ChannelMatrix h = ChannelMatrix::Zero(static_cast<Eigen::Index>(cfg.m_r), static_cast<Eigen::Index>(cfg.m_t));
  for (std::size_t p = 0; p < gains.size(); ++p) {
    const CVector ar = steering_vector(cfg.m_r, spec.aod_degrees[p], spec.element_spacing_wavelengths);
    const CVector at = steering_vector(cfg.m_t, spec.aod_degrees[p], spec.element_spacing_wavelengths);
    h += gains[p] * ar * at.adjoint();
  }
  return h / std::sqrt(power);
}

inline ChannelMatrix sample_channel(const SystemConfig& cfg, const ChannelSpec& spec) {
  return spec.kind == ChannelKind::rayleigh ? sample_rayleigh(cfg, spec.rng_seed) : sample_geometric(cfg, spec);
}

inline std::vector<double> angle_grid(double start_deg, double stop_deg, double step_deg) {
  if (!(step_deg > 0.0) || stop_deg < start_deg) throw InvalidInput("angle grid needs step > 0 and stop >= start");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
  grid.reserve(n);
  for (std::size_t k = 0; k < n; ++k) grid.push_back(start_deg + step_deg * static_cast<double>(k));
  return grid;
}

// Transmit gain 10 log10 ||a(theta)^H T||^2 of an M_T x L_s precoder; streams
// add in power.
inline Beampattern beampattern_of(const CMatrix& t, const std::vector<double>& grid, double spacing = 0.5) {
  if (grid.empty()) throw InvalidInput("beampattern grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw InvalidInput("beampattern grid must be strictly increasing");
  Beampattern bp;
  bp.angles = grid;
  bp.gains_db.reserve(grid.size());
  for (double theta : grid) {
    const CVector a = steering_vector(static_cast<std::size_t>(t.rows()), theta, spacing);
    const double g = (a.adjoint() * t).squaredNorm();
    bp.gains_db.push_back(g > 0.0 ? std::max(kBeampatternFloorDb, 10.0 * std::log10(g)) : kBeampatternFloorDb);
  }
  return bp;
}

inline Beampattern beampattern(const HybridPrecoder& hp, const ConnectionState& d, const SystemConfig& cfg,
                               const std::vector<double>& grid, double spacing = 0.5) {
  detail::require_precoder(hp, d, cfg);
  return beampattern_of(effective_precoder(hp, d), grid, spacing);
}

struct LobeAnalysis {
  double peak_angle = 0.0;
  double peak_db = kBeampatternFloorDb;
  double highest_sidelobe_db = kBeampatternFloorDb;
  double main_to_sidelobe_db = 0.0;  // peak minus highest sidelobe
};

// The main lobe extends from the global peak down to the nearest local minimum
// on either side; everything beyond counts as sidelobe.
inline LobeAnalysis analyze_main_lobe(const Beampattern& bp) {
  LobeAnalysis out;
  const auto& g = bp.gains_db;
  if (g.empty()) return out;
  std::size_t peak = 0;
  for (std::size_t k = 1; k < g.size(); ++k)
    if (g[k] > g[peak]) peak = k;
  std::size_t lo = peak;
  while (lo > 0 && g[lo - 1] <= g[lo]) --lo;
  std::size_t hi = peak;
  while (hi + 1 < g.size() && g[hi + 1] <= g[hi]) ++hi;
  double side = kBeampatternFloorDb;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (k < lo || k > hi) side = std::max(side, g[k]);
  out.peak_angle = bp.angles[peak];
  out.peak_db = g[peak];
  out.highest_sidelobe_db = side;
  out.main_to_sidelobe_db = g[peak] - side;
  return out;
}

}  // namespace fahp
