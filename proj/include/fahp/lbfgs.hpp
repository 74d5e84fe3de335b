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

// Limited-memory BFGS for smooth unconstrained minimization, with a line
// search enforcing the strong Wolfe conditions (bracketing + zoom with
// safeguarded cubic interpolation).

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Core>

namespace fahp::lbfgs {

struct Options {
  int memory = 10;
  int max_iterations = 500;
  double grad_tol = 1e-6;  // on the infinity norm of the gradient
  int max_linesearch = 40;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature
  double max_step = 1e20;
};

enum class Status { converged, max_iterations, line_search_failed };

struct Result {
  double f = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  int evaluations = 0;
  Status status = Status::converged;
};

namespace detail {

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or NaN.
inline double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

}  // namespace detail

// Minimizes `fg` starting from `x`, overwriting `x` with the best iterate.
// `fg(const Eigen::VectorXd& x, Eigen::VectorXd& grad) -> double`.
template <typename Fn>
Result minimize(Fn&& fg, Eigen::VectorXd& x, const Options& opt = {}) {
  using Vec = Eigen::VectorXd;
  const Eigen::Index n = x.size();
  Result res;
  Vec g(n);
  double f = fg(x, g);
  ++res.evaluations;
  res.f = f;
  res.grad_inf = n > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
  if (res.grad_inf <= opt.grad_tol) return res;

  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vec d(n), x_new(n), g_new(n), q(n);
  std::vector<double> alpha_buf(static_cast<std::size_t>(opt.memory));

  for (int it = 0; it < opt.max_iterations; ++it) {
    // Two-loop recursion for d = -H g.
    q = g;
    const std::size_t m = s_hist.size();
    for (std::size_t k = m; k-- > 0;) {
      alpha_buf[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha_buf[k] * y_hist[k];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha_buf[k] - beta) * s_hist[k];
    }
    d = -q;
    double dphi0 = g.dot(d);
    if (!(dphi0 < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
    }

    double step = m == 0 ? std::min(1.0, 1.0 / g.cwiseAbs().maxCoeff()) : 1.0;

    // Strong Wolfe line search.
    auto eval = [&](double a, double& fa, double& da) {
      x_new = x + a * d;
      fa = fg(x_new, g_new);
      ++res.evaluations;
      da = g_new.dot(d);
    };
    double a_prev = 0.0, f_prev = f, d_prev = dphi0;
    double a_ok = -1.0, f_ok = f;  // accepted step
    Vec x_ok, g_ok;
    bool found = false;

    auto zoom = [&](double lo, double f_lo, double d_lo, double hi, double f_hi, double d_hi, int budget) {
      for (int z = 0; z < budget; ++z) {
        double a = detail::cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi);
        const double left = std::min(lo, hi), right = std::max(lo, hi), width = right - left;
        if (!std::isfinite(a) || a < left + 0.1 * width || a > right - 0.1 * width) a = 0.5 * (lo + hi);
        double fa, da;
        eval(a, fa, da);
        if (fa > f + opt.c1 * a * dphi0 || fa >= f_lo) {
          hi = a;
          f_hi = fa;
          d_hi = da;
        } else {
          if (std::abs(da) <= -opt.c2 * dphi0) {
            a_ok = a, f_ok = fa, x_ok = x_new, g_ok = g_new;
            found = true;
            return;
          }
          if (da * (hi - lo) >= 0.0) {
            hi = lo;
            f_hi = f_lo;
            d_hi = d_lo;
          }
          lo = a;
          f_lo = fa;
          d_lo = da;
          a_ok = a, f_ok = fa, x_ok = x_new, g_ok = g_new;
        }
        if (std::abs(hi - lo) <= 1e-16 * std::max(1.0, std::abs(lo))) return;
      }
    };

    for (int ls = 0; ls < opt.max_linesearch && !found; ++ls) {
      double fa, da;
      eval(step, fa, da);
      if (!std::isfinite(fa)) {
        step = 0.5 * (a_prev + step);
        continue;
      }
      if (fa > f + opt.c1 * step * dphi0 || (ls > 0 && fa >= f_prev)) {
        zoom(a_prev, f_prev, d_prev, step, fa, da, opt.max_linesearch);
        break;
      }
      if (std::abs(da) <= -opt.c2 * dphi0) {
        a_ok = step, f_ok = fa, x_ok = x_new, g_ok = g_new;
        found = true;
        break;
      }
      if (da >= 0.0) {
        a_ok = step, f_ok = fa, x_ok = x_new, g_ok = g_new;
        zoom(step, fa, da, a_prev, f_prev, d_prev, opt.max_linesearch);
        break;
      }
      a_ok = step, f_ok = fa, x_ok = x_new, g_ok = g_new;
      a_prev = step;
      f_prev = fa;
      d_prev = da;
      step = std::min(2.0 * step, opt.max_step);
    }

    if (a_ok <= 0.0 || !(f_ok < f)) {
      res.status = Status::line_search_failed;
      res.iterations = it;
      return res;
    }

    const Vec s = x_ok - x;
    const Vec y = g_ok - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * std::max(1.0, y.squaredNorm())) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
    }
    x = x_ok;
    g = g_ok;
    f = f_ok;
    res.f = f;
    res.grad_inf = g.cwiseAbs().maxCoeff();
    res.iterations = it + 1;
    if (res.grad_inf <= opt.grad_tol) {
      res.status = Status::converged;
      return res;
    }
  }
  res.status = Status::max_iterations;
  return res;
}

}  // namespace fahp::lbfgs
