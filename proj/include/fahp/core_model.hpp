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
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "fahp/config.hpp"
#include "fahp/connection_state.hpp"
#include "fahp/errors.hpp"

namespace fahp {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// M_R x M_T channel gains.
using ChannelMatrix = CMatrix;

// Analog precoder f (M_T x N_RF) and digital precoder w (N_RF x L_s).
struct HybridPrecoder {
  CMatrix f;
  CMatrix w;
};

struct EvalResult {
  double se = 0.0;       // bits/s/Hz
  double pt = 0.0;       // transmit power, W
  double pc = 0.0;       // circuit power, W
  double p_total = 0.0;  // W
  double ee = 0.0;       // bits/s/Hz/W
};

namespace detail {

inline bool all_finite(const CMatrix& m) { return m.allFinite(); }

inline void require_binary(const ConnectionState& d, const SystemConfig& cfg) {
  if (d.rows() != cfg.m_t || d.cols() != cfg.n_rf)
    throw InvalidInput("connection state is " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) +
                       ", expected " + std::to_string(cfg.m_t) + "x" + std::to_string(cfg.n_rf));
  if (!d.is_binary()) throw InvalidInput("connection state has non-binary entries");
}

inline void require_precoder(const HybridPrecoder& hp, const ConnectionState& d, const SystemConfig& cfg) {
  require_binary(d, cfg);
  if (hp.f.rows() != static_cast<Eigen::Index>(cfg.m_t) || hp.f.cols() != static_cast<Eigen::Index>(cfg.n_rf))
    throw InvalidInput("analog precoder must be m_t x n_rf");
  if (hp.w.rows() != static_cast<Eigen::Index>(cfg.n_rf) || hp.w.cols() != static_cast<Eigen::Index>(cfg.l_s))
    throw InvalidInput("digital precoder must be n_rf x l_s");
  if (!all_finite(hp.f) || !all_finite(hp.w)) throw InvalidInput("precoder has non-finite entries");
}

inline void require_channel(const ChannelMatrix& h, const SystemConfig& cfg) {
  if (h.rows() != static_cast<Eigen::Index>(cfg.m_r) || h.cols() != static_cast<Eigen::Index>(cfg.m_t))
    throw InvalidInput("channel must be m_r x m_t");
  if (!all_finite(h)) throw InvalidInput("channel has non-finite entries");
}

// log2 det of a Hermitian positive-definite matrix via Cholesky.
inline double log2_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw InvalidInput("matrix is not positive definite");
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) s += std::log(llt.matrixL()(k, k).real());
  return 2.0 * s / std::numbers::ln2;
}

}  // namespace detail

// F o D: the analog precoder with disconnected entries zeroed.
inline CMatrix masked_analog(const CMatrix& f, const ConnectionState& d) {
  CMatrix out = f;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (d(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == 0) out(i, j) = 0.0;
  return out;
}

// (F o D) W, the M_T x L_s effective precoder.
inline CMatrix effective_precoder(const HybridPrecoder& hp, const ConnectionState& d) {
  return masked_analog(hp.f, d) * hp.w;
}

// Achievable rate of a precoder T (M_T x L_s), computed through the
// L_s x L_s Gram form det(I + T^H H^H H T / (L_s sigma^2)).
inline double rate_of_precoder(const ChannelMatrix& h, const CMatrix& t, const SystemConfig& cfg) {
  const CMatrix ht = h * t;
  CMatrix gram = ht.adjoint() * ht / (static_cast<double>(cfg.l_s) * cfg.sigma2);
  gram.diagonal().array() += 1.0;
  return std::max(0.0, detail::log2_det_hpd(gram));
}

inline double spectral_efficiency(const ChannelMatrix& h, const HybridPrecoder& hp, const ConnectionState& d,
                                  const SystemConfig& cfg) {
  detail::require_channel(h, cfg);
  detail::require_precoder(hp, d, cfg);
  return rate_of_precoder(h, effective_precoder(hp, d), cfg);
}

// (1/L_s) ||(F o D) W||_F^2
inline double transmit_power(const HybridPrecoder& hp, const ConnectionState& d, const SystemConfig& cfg) {
  detail::require_precoder(hp, d, cfg);
  return effective_precoder(hp, d).squaredNorm() / static_cast<double>(cfg.l_s);
}

// Working RF chains, working phase shifters, switch control, fixed overhead.
inline double circuit_power(const ConnectionState& d, const SystemConfig& cfg) {
  detail::require_binary(d, cfg);
  return static_cast<double>(d.working_rf_chains()) * cfg.p_rf + static_cast<double>(d.count_ones()) * cfg.p_ps +
         static_cast<double>(cfg.m_t * cfg.n_rf) * cfg.p_sw + cfg.p_o;
}

inline EvalResult energy_efficiency(const ChannelMatrix& h, const HybridPrecoder& hp, const ConnectionState& d,
                                    const SystemConfig& cfg) {
  EvalResult r;
  r.se = spectral_efficiency(h, hp, d, cfg);
  r.pt = transmit_power(hp, d, cfg);
  r.pc = circuit_power(d, cfg);
  r.p_total = r.pt + r.pc;
  r.ee = r.se / r.p_total;
  return r;
}

}  // namespace fahp
