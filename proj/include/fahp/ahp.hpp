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
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "fahp/core_model.hpp"
#include "fahp/full_digital.hpp"
#include "fahp/lbfgs.hpp"
#include "fahp/rng.hpp"

namespace fahp {

// One phase (radians) per connected (antenna, RF chain) pair, ordered
// column-major over the ones of D.
using PhaseVector = Eigen::VectorXd;

struct AntennaChain {
  std::size_t antenna;
  std::size_t chain;
  friend bool operator==(const AntennaChain&, const AntennaChain&) = default;
};

// Column-major positions of the ones of D: entry k of the reduced system is
// column k of (W^T kron I_{M_T}) after dropping every column where vec(D) = 0.
inline std::vector<AntennaChain> connected_pairs(const ConnectionState& d) {
  std::vector<AntennaChain> pairs;
  for (std::size_t j = 0; j < d.cols(); ++j)
    for (std::size_t i = 0; i < d.rows(); ++i)
      if (d(i, j) == 1) pairs.push_back({i, j});
  return pairs;
}

// The phase-only least-squares system ||w_fd - A_fv f_v||^2 for a fixed
// digital precoder. A_fv is kept implicit: column k maps f_v(k) into row
// `antenna` of the M_T x L_s product, weighted by row `chain` of W.
struct ReducedAnalogSystem {
  CMatrix target;  // W_FD, M_T x L_s (its column-major vectorization is the target vector)
  CMatrix w;       // N_RF x L_s
  std::vector<AntennaChain> index_map;
  std::size_t m_t = 0;

  std::size_t size() const noexcept { return index_map.size(); }

  // A_fv x, reshaped to M_T x L_s.
  CMatrix apply(const CVector& x) const {
    CMatrix out = CMatrix::Zero(target.rows(), target.cols());
    for (std::size_t k = 0; k < index_map.size(); ++k)
      out.row(static_cast<Eigen::Index>(index_map[k].antenna)) +=
          x(static_cast<Eigen::Index>(k)) * w.row(static_cast<Eigen::Index>(index_map[k].chain));
    return out;
  }

  // Dense (M_T L_s) x n_v operator, for inspection and tests only.
  CMatrix dense() const {
    const auto rows = static_cast<Eigen::Index>(m_t) * target.cols();
    CMatrix a = CMatrix::Zero(rows, static_cast<Eigen::Index>(index_map.size()));
    for (std::size_t k = 0; k < index_map.size(); ++k)
      for (Eigen::Index l = 0; l < target.cols(); ++l)
        a(l * static_cast<Eigen::Index>(m_t) + static_cast<Eigen::Index>(index_map[k].antenna),
          static_cast<Eigen::Index>(k)) = w(static_cast<Eigen::Index>(index_map[k].chain), l);
    return a;
  }

  CVector target_vector() const { return target.reshaped(); }

  CVector unit_modulus(const PhaseVector& phi) const {
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_t));
    CVector f(phi.size());
    for (Eigen::Index k = 0; k < phi.size(); ++k) f(k) = std::polar(scale, phi(k));
    return f;
  }

  // g(phi) = ||W_FD - A_fv e^{j phi} / sqrt(M_T)||^2 and its gradient.
  double objective(const PhaseVector& phi, Eigen::VectorXd* grad = nullptr) const {
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_t));
    CMatrix resid = target;
    for (std::size_t k = 0; k < index_map.size(); ++k) {
      const cplx fk = std::polar(scale, phi(static_cast<Eigen::Index>(k)));
      resid.row(static_cast<Eigen::Index>(index_map[k].antenna)) -=
          fk * w.row(static_cast<Eigen::Index>(index_map[k].chain));
    }
    if (grad) {
      grad->resize(phi.size());
      for (std::size_t k = 0; k < index_map.size(); ++k) {
        const cplx fk = std::polar(scale, phi(static_cast<Eigen::Index>(k)));
        const auto i = static_cast<Eigen::Index>(index_map[k].antenna);
        const auto j = static_cast<Eigen::Index>(index_map[k].chain);
        cplx acc = 0.0;
        for (Eigen::Index l = 0; l < w.cols(); ++l) acc += w(j, l) * std::conj(resid(i, l));
        (*grad)(static_cast<Eigen::Index>(k)) = 2.0 * (fk * acc).imag();
      }
    }
    return resid.squaredNorm();
  }
};

// Empty when D has no ones; the caller then uses F = 0.
inline std::optional<ReducedAnalogSystem> reduce_analog_system(const FullDigitalPrecoder& w_fd, const CMatrix& w,
                                                               const ConnectionState& d) {
  if (w_fd.w_fd.rows() != static_cast<Eigen::Index>(d.rows()) || w.rows() != static_cast<Eigen::Index>(d.cols()) ||
      w.cols() != w_fd.w_fd.cols())
    throw InvalidInput("reduce_analog_system: inconsistent shapes");
  ReducedAnalogSystem sys{w_fd.w_fd, w, connected_pairs(d), d.rows()};
  if (sys.index_map.empty()) return std::nullopt;
  return sys;
}

struct AnalogStepOptions {
  double grad_tol = 1e-6;
  int max_lbfgs_iter = 500;
  int memory = 10;
};

struct AnalogStepResult {
  PhaseVector phi;
  double objective = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  bool line_search_failed = false;
};

inline AnalogStepResult analog_step(const ReducedAnalogSystem& sys, const PhaseVector& phi_init,
                                    const AnalogStepOptions& opts = {}) {
  if (sys.size() == 0) throw InvalidInput("analog_step: empty system");
  if (static_cast<std::size_t>(phi_init.size()) != sys.size())
    throw InvalidInput("analog_step: phase vector length does not match the number of connections");
  lbfgs::Options lo;
  lo.memory = opts.memory;
  lo.max_iterations = opts.max_lbfgs_iter;
  lo.grad_tol = opts.grad_tol;
  AnalogStepResult out;
  out.phi = phi_init;
  const lbfgs::Result r = lbfgs::minimize(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return sys.objective(x, &g); }, out.phi, lo);
  out.objective = r.f;
  out.grad_inf = r.grad_inf;
  out.iterations = r.iterations;
  out.line_search_failed = r.status == lbfgs::Status::line_search_failed;
  return out;
}

// Least-squares digital precoder [(F o D)^H (F o D)]^+ (F o D)^H W_FD. The
// pseudo-inverse zeroes the rows belonging to disconnected RF chains.
inline CMatrix digital_step(const FullDigitalPrecoder& w_fd, const CMatrix& f, const ConnectionState& d) {
  const CMatrix fd = masked_analog(f, d);
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(fd);
  return cod.solve(w_fd.w_fd);
}

inline CMatrix analog_from_phases(const PhaseVector& phi, const std::vector<AntennaChain>& index_map,
                                  std::size_t m_t, std::size_t n_rf) {
  CMatrix f = CMatrix::Zero(static_cast<Eigen::Index>(m_t), static_cast<Eigen::Index>(n_rf));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_t));
  for (std::size_t k = 0; k < index_map.size(); ++k)
    f(static_cast<Eigen::Index>(index_map[k].antenna), static_cast<Eigen::Index>(index_map[k].chain)) =
        std::polar(scale, phi(static_cast<Eigen::Index>(k)));
  return f;
}

struct AhpTrace {
  std::vector<double> objective_w;  // after each digital update
  std::vector<double> objective_f;  // after each analog update
  int iterations = 0;
  bool converged = true;
  bool rescaled = false;  // final W was scaled back onto the power cap
  int line_search_warnings = 0;
};

struct AhpOptions {
  AnalogStepOptions analog;
  int max_outer = 500;
};

struct AhpResult {
  HybridPrecoder precoder;
  AhpTrace trace;
  EvalResult eval;
  FullDigitalSolution full_digital;
  double final_objective = 0.0;  // ||W_FD - (F o D) W||_F^2 at the returned pair
};

// Alternating hybrid precoding for a fixed connection state: fit (F o D) W to
// the energy-efficiency-optimal full-digital precoder by alternating the
// closed-form digital update with a quasi-Newton phase update, starting from
// random phases drawn from `seed`. With `warm_analog`, connected entries that
// are nonzero there start from its phases instead.
inline AhpResult run_ahp(const FullDigitalSolver& solver, const ChannelMatrix& h, const ConnectionState& d,
                         const SystemConfig& cfg, std::uint64_t seed, const AhpOptions& opts = {},
                         const CMatrix* warm_analog = nullptr) {
  detail::require_binary(d, cfg);
  AhpResult out;
  const double pc = circuit_power(d, cfg);
  out.full_digital = solver.solve(pc);
  const FullDigitalPrecoder& w_fd = out.full_digital.precoder;

  const auto m_t = static_cast<Eigen::Index>(cfg.m_t);
  const auto n_rf = static_cast<Eigen::Index>(cfg.n_rf);
  const auto l_s = static_cast<Eigen::Index>(cfg.l_s);
  const std::vector<AntennaChain> pairs = connected_pairs(d);
  if (pairs.empty()) {
    out.precoder = {CMatrix::Zero(m_t, n_rf), CMatrix::Zero(n_rf, l_s)};
    out.final_objective = w_fd.w_fd.squaredNorm();
    out.eval = energy_efficiency(h, out.precoder, d, cfg);
    return out;
  }

  Rng rng(seed);
  PhaseVector phi(static_cast<Eigen::Index>(pairs.size()));
  for (Eigen::Index k = 0; k < phi.size(); ++k) phi(k) = 2.0 * std::numbers::pi * rng.uniform();
  if (warm_analog && warm_analog->rows() == m_t && warm_analog->cols() == n_rf) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const cplx v = (*warm_analog)(static_cast<Eigen::Index>(pairs[k].antenna),
                                    static_cast<Eigen::Index>(pairs[k].chain));
      if (std::abs(v) > 0.0) phi(static_cast<Eigen::Index>(k)) = std::arg(v);
    }
  }
  CMatrix f = analog_from_phases(phi, pairs, cfg.m_t, cfg.n_rf);
  CMatrix w;

  ReducedAnalogSystem sys{w_fd.w_fd, CMatrix(), pairs, cfg.m_t};
  for (int n = 0; n < opts.max_outer; ++n) {
    w = digital_step(w_fd, f, d);
    sys.w = w;
    const double obj_w = sys.objective(phi);
    const AnalogStepResult a = analog_step(sys, phi, opts.analog);
    phi = a.phi;
    f = analog_from_phases(phi, pairs, cfg.m_t, cfg.n_rf);
    out.trace.objective_w.push_back(obj_w);
    out.trace.objective_f.push_back(a.objective);
    out.trace.iterations = n + 1;
    if (a.line_search_failed) ++out.trace.line_search_warnings;
    if (std::abs(obj_w - a.objective) < cfg.eps_in) break;
    if (n + 1 == opts.max_outer) out.trace.converged = false;
  }
  // Refit W to the final phases so the returned pair is a projection of W_FD.
  w = digital_step(w_fd, f, d);
  sys.w = w;
  out.final_objective = sys.objective(phi);

  // ||(F o D) W||_F^2 <= P_max must hold; scale W back if round-off says otherwise.
  const double radiated = masked_analog(f, d).operator*(w).squaredNorm();
  if (radiated > cfg.p_max) {
    w *= std::sqrt(cfg.p_max / radiated);
    out.trace.rescaled = true;
  }
  out.precoder = {std::move(f), std::move(w)};
  out.eval = energy_efficiency(h, out.precoder, d, cfg);
  return out;
}

inline AhpResult run_ahp(const ChannelMatrix& h, const ConnectionState& d, const SystemConfig& cfg,
                         std::uint64_t seed, const AhpOptions& opts = {}) {
  return run_ahp(FullDigitalSolver(h, cfg), h, d, cfg, seed, opts);
}

}  // namespace fahp
