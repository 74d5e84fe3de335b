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
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "fahp/errors.hpp"

namespace fahp {

// Scalar parameters of one transmitter/receiver setup. Powers are in Watts.
struct SystemConfig {
  std::size_t m_t = 64;   // transmit antennas
  std::size_t m_r = 64;   // receive antennas
  std::size_t n_rf = 4;   // RF chains
  std::size_t l_s = 1;    // data streams
  double sigma2 = 1.0;
  double p_max = 1.0;
  double p_rf = 0.3;
  double p_ps = 0.05;
  double p_sw = 0.01;
  double p_o = 0.5;
  std::vector<std::size_t> row_caps;  // p_i: max RF chains per antenna
  std::vector<std::size_t> col_caps;  // q_j: max antennas per RF chain
  double eps_in = 1e-4;
  double eps_dinkelbach = 1e-6;

  // Loosest caps: every antenna may use every chain and vice versa.
  void set_unconstrained_caps() {
    row_caps.assign(m_t, n_rf);
    col_caps.assign(n_rf, m_t);
  }

  // Throws InvalidInput describing the first violated invariant.
  void validate() const {
    std::ostringstream err;
    if (m_t == 0 || m_r == 0 || n_rf == 0 || l_s == 0)
      err << "array sizes must be positive; ";
    if (l_s > n_rf) err << "l_s (" << l_s << ") exceeds n_rf (" << n_rf << "); ";
    if (n_rf > m_t) err << "n_rf (" << n_rf << ") exceeds m_t (" << m_t << "); ";
    if (l_s > m_r) err << "l_s (" << l_s << ") exceeds m_r (" << m_r << "); ";
    if (row_caps.size() != m_t) err << "row_caps must have m_t entries; ";
    if (col_caps.size() != n_rf) err << "col_caps must have n_rf entries; ";
    for (std::size_t i = 0; i < row_caps.size(); ++i)
      if (row_caps[i] > n_rf) err << "row cap " << i << " exceeds n_rf; ";
    for (std::size_t j = 0; j < col_caps.size(); ++j)
      if (col_caps[j] > m_t) err << "col cap " << j << " exceeds m_t; ";
    auto positive = [&](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) err << name << " must be positive and finite; ";
    };
    positive(sigma2, "sigma2");
    positive(p_max, "p_max");
    positive(p_rf, "p_rf");
    positive(p_ps, "p_ps");
    positive(p_sw, "p_sw");
    positive(p_o, "p_o");
    positive(eps_in, "eps_in");
    positive(eps_dinkelbach, "eps_dinkelbach");
    const std::string msg = err.str();
    if (!msg.empty()) throw InvalidInput("SystemConfig: " + msg.substr(0, msg.size() - 2));
  }
};

// Default circuit-power constants with unconstrained caps.
inline SystemConfig make_config(std::size_t m_t, std::size_t m_r, std::size_t n_rf, std::size_t l_s,
                                double p_max_watts = 1.0) {
  SystemConfig cfg;
  cfg.m_t = m_t;
  cfg.m_r = m_r;
  cfg.n_rf = n_rf;
  cfg.l_s = l_s;
  cfg.p_max = p_max_watts;
  cfg.set_unconstrained_caps();
  return cfg;
}

inline double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double watts_to_dbw(double w) { return 10.0 * std::log10(w); }

}  // namespace fahp
