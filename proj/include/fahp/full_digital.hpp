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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/SVD>

#include "fahp/core_model.hpp"
#include "fahp/errors.hpp"

namespace fahp {

// M_T x L_s full-digital precoder.
struct FullDigitalPrecoder {
  CMatrix w_fd;
};

struct DinkelbachTrace {
  std::vector<double> lambdas;    // lambda_k used by the k-th inner solve
  std::vector<double> residuals;  // R(W_k) - lambda_k P(W_k)
  int iterations = 0;
};

struct FullDigitalSolution {
  FullDigitalPrecoder precoder;
  DinkelbachTrace trace;
  std::vector<double> stream_powers;
  double rate = 0.0;
  double power = 0.0;  // ||W||^2 / L_s + pc
  double ee = 0.0;
};

struct DinkelbachOptions {
  int max_iter = 100;
  double waterfill_tol = 1e-10;
};

// Energy-efficiency maximization for an unconstrained M_T-antenna precoder:
//
//   max_W  log2 det(I + H W W^H H^H / (L_s sigma^2)) / (||W||_F^2 / L_s + pc)
//   s.t.   ||W||_F^2 <= P_max
//
// The outer layer is Dinkelbach's ratio update; each parameterized subproblem
// is solved in closed form by water-filling over the right singular vectors
// of H. The SVD is computed once so that repeated solves for different
// circuit powers on one channel are cheap.
class FullDigitalSolver {
 public:
  FullDigitalSolver(const ChannelMatrix& h, const SystemConfig& cfg, DinkelbachOptions opts = {})
      : cfg_(cfg), opts_(opts) {
    detail::require_channel(h, cfg);
    Eigen::BDCSVD<CMatrix> svd(h, Eigen::ComputeThinV);
    const auto ls = static_cast<Eigen::Index>(cfg.l_s);
    const Eigen::Index avail = std::min<Eigen::Index>(ls, svd.singularValues().size());
    singular_.assign(static_cast<std::size_t>(ls), 0.0);
    v_ = CMatrix::Zero(static_cast<Eigen::Index>(cfg.m_t), ls);
    for (Eigen::Index k = 0; k < avail; ++k) {
      singular_[static_cast<std::size_t>(k)] = svd.singularValues()(k);
      v_.col(k) = svd.matrixV().col(k);
    }
  }

  const std::vector<double>& singular_values() const noexcept { return singular_; }
  const CMatrix& right_singular_vectors() const noexcept { return v_; }

  // Stream powers maximizing R(W) - lambda (||W||^2 / L_s + pc) under the
  // power cap, for W = V diag(sqrt(p)).
  std::vector<double> waterfill_powers(double lambda) const {
    if (lambda < 0.0) throw InvalidInput("Dinkelbach parameter must be nonnegative");
    const double ls = static_cast<double>(cfg_.l_s);
    auto powers_at = [&](double mu) {
      std::vector<double> p(singular_.size(), 0.0);
      const double price = lambda / ls + mu;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double s2 = singular_[k] * singular_[k];
        if (s2 <= 0.0) continue;
        p[k] = price > 0.0 ? std::max(0.0, 1.0 / (std::numbers::ln2 * price) - ls * cfg_.sigma2 / s2)
                           : std::numeric_limits<double>::infinity();
      }
      return p;
    };
    auto total = [](const std::vector<double>& p) {
      double s = 0.0;
      for (double v : p) s += v;
      return s;
    };

    std::vector<double> p = powers_at(0.0);
    if (total(p) <= cfg_.p_max) return p;

    // Cap binds: bisect on the multiplier, keeping the feasible end.
    double mu_lo = 0.0;
    double mu_hi = ls / (std::numbers::ln2 * cfg_.p_max);
    std::vector<double> p_hi = powers_at(mu_hi);
    for (int it = 0; it < 300; ++it) {
      const double mu = 0.5 * (mu_lo + mu_hi);
      std::vector<double> pm = powers_at(mu);
      if (total(pm) > cfg_.p_max) {
        mu_lo = mu;
      } else {
        mu_hi = mu;
        p_hi = std::move(pm);
      }
      if (cfg_.p_max - total(p_hi) <= opts_.waterfill_tol) break;
    }
    return p_hi;
  }

  FullDigitalPrecoder precoder_from_powers(const std::vector<double>& p) const {
    CMatrix w = v_;
    for (std::size_t k = 0; k < p.size(); ++k) w.col(static_cast<Eigen::Index>(k)) *= std::sqrt(p[k]);
    return {w};
  }

  FullDigitalPrecoder inner_waterfill(double lambda) const { return precoder_from_powers(waterfill_powers(lambda)); }

  double rate_from_powers(const std::vector<double>& p) const {
    const double scale = static_cast<double>(cfg_.l_s) * cfg_.sigma2;
    double r = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) r += std::log2(1.0 + singular_[k] * singular_[k] * p[k] / scale);
    return r;
  }

  FullDigitalSolution solve(double pc) const {
    if (!(pc > 0.0)) throw InvalidInput("circuit power must be positive");
    const double ls = static_cast<double>(cfg_.l_s);
    FullDigitalSolution sol;
    double lambda = 0.0;
    for (int it = 0; it < opts_.max_iter; ++it) {
      std::vector<double> p = waterfill_powers(lambda);
      double psum = 0.0;
      for (double v : p) psum += v;
      const double rate = rate_from_powers(p);
      const double power = psum / ls + pc;
      const double residual = rate - lambda * power;
      sol.trace.lambdas.push_back(lambda);
      sol.trace.residuals.push_back(residual);
      sol.trace.iterations = it + 1;
      if (std::abs(residual) <= cfg_.eps_dinkelbach) {
        sol.stream_powers = p;
        sol.precoder = precoder_from_powers(p);
        sol.rate = rate;
        sol.power = power;
        sol.ee = rate / power;
        return sol;
      }
      lambda = rate / power;
    }
    throw ConvergenceFailure<DinkelbachTrace>("Dinkelbach iteration did not converge", sol.trace);
  }

 private:
  SystemConfig cfg_;
  DinkelbachOptions opts_;
  std::vector<double> singular_;
  CMatrix v_;
};

inline FullDigitalSolution solve_full_digital(const ChannelMatrix& h, double pc, const SystemConfig& cfg,
                                              DinkelbachOptions opts = {}) {
  return FullDigitalSolver(h, cfg, opts).solve(pc);
}

inline FullDigitalPrecoder inner_waterfill(const ChannelMatrix& h, double lambda, const SystemConfig& cfg) {
  return FullDigitalSolver(h, cfg).inner_waterfill(lambda);
}

}  // namespace fahp
