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
#include <complex>
#include <cstdint>
#include <numbers>

#include "fahp/core_model.hpp"
#include "fahp/rng.hpp"

namespace fahp::test {

inline CMatrix random_cmatrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double var = 1.0) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_gaussian(var);
  return m;
}

// Unit-modulus-over-sqrt(M_T) analog entries where D is on, zero elsewhere.
inline CMatrix random_analog(const ConnectionState& d, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d.rows()));
  CMatrix f = CMatrix::Zero(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(d.cols()));
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j)
      if (d(i, j)) f(i, j) = std::polar(scale, 2.0 * std::numbers::pi * rng.uniform());
  return f;
}

inline ConnectionState random_state(std::size_t m_t, std::size_t n_rf, Rng& rng, double density = 0.5) {
  ConnectionState d(m_t, n_rf);
  for (std::size_t i = 0; i < m_t; ++i)
    for (std::size_t j = 0; j < n_rf; ++j) d.set(i, j, rng.bernoulli(density) ? 1 : 0);
  return d;
}

inline HybridPrecoder random_precoder(const ConnectionState& d, const SystemConfig& cfg, Rng& rng) {
  return {random_analog(d, rng), random_cmatrix(static_cast<Eigen::Index>(cfg.n_rf),
                                                static_cast<Eigen::Index>(cfg.l_s), rng)};
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace fahp::test
