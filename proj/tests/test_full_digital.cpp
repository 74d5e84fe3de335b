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

#include <gtest/gtest.h>

#include <numeric>

#include "fahp/channel.hpp"
#include "fahp/full_digital.hpp"
#include "fahp/oracle.hpp"
#include "support.hpp"

using namespace fahp;
using fahp::test::random_cmatrix;
using fahp::test::rel_diff;

namespace {

double inner_objective(const ChannelMatrix& h, const CMatrix& w, double lambda, double pc, const SystemConfig& cfg) {
  return rate_of_precoder(h, w, cfg) - lambda * (w.squaredNorm() / static_cast<double>(cfg.l_s) + pc);
}

}  // namespace

TEST(FullDigital, MatchesPowerGridOnSingleStream) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto cfg = make_config(4, 4, 2, 1, dbw_to_watts(static_cast<double>(seed % 3) * 5.0 - 5.0));
    const CMatrix h = sample_rayleigh(cfg, seed);
    for (double pc : {0.5, 2.0, 9.0}) {
      const FullDigitalSolution sol = solve_full_digital(h, pc, cfg);
      const GridOptimum g = grid_full_digital_ls1(h, pc, cfg);
      EXPECT_LT(rel_diff(sol.ee, g.ee), 1e-4) << "seed " << seed << " pc " << pc;
      EXPECT_GE(sol.ee, g.ee * (1.0 - 1e-6));
    }
  }
}

TEST(FullDigital, ZeroChannel) {
  const auto cfg = make_config(4, 3, 2, 2);
  const FullDigitalSolution sol = solve_full_digital(CMatrix::Zero(3, 4), 1.0, cfg);
  EXPECT_EQ(sol.precoder.w_fd.norm(), 0.0);
  EXPECT_EQ(sol.ee, 0.0);
}

TEST(FullDigital, LambdaTraceIncreases) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto cfg = make_config(8, 8, 4, 1 + seed % 3, dbw_to_watts(static_cast<double>(seed % 5) * 5.0 - 10.0));
    const FullDigitalSolution sol = solve_full_digital(sample_rayleigh(cfg, seed), 1.0 + 0.5 * seed, cfg);
    const auto& l = sol.trace.lambdas;
    ASSERT_GE(l.size(), 1u);
    for (std::size_t k = 1; k < l.size(); ++k) EXPECT_GT(l[k], l[k - 1]);
    EXPECT_LE(std::abs(sol.trace.residuals.back()), cfg.eps_dinkelbach);
    EXPECT_LE(sol.precoder.w_fd.squaredNorm(), cfg.p_max + 1e-9);
    EXPECT_LE(rel_diff(sol.ee, sol.rate / sol.power), 1e-14);
  }
}

TEST(FullDigital, ColumnsSpanDominantRightSingularVectors) {
  const auto cfg = make_config(8, 8, 4, 3, 10.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CMatrix h = sample_rayleigh(cfg, seed);
    const FullDigitalSolution sol = solve_full_digital(h, 1.0, cfg);
    if (*std::min_element(sol.stream_powers.begin(), sol.stream_powers.end()) <= 0.0) continue;
    const Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullV);
    const CMatrix v = svd.matrixV().leftCols(3);
    const CMatrix w = sol.precoder.w_fd;
    const CMatrix outside = w - v * (v.adjoint() * w);
    EXPECT_LT(outside.norm(), 1e-8 * w.norm());
  }
}

TEST(Waterfill, ExpensivePowerTurnsStreamsOff) {
  const auto cfg = make_config(6, 6, 3, 3, 10.0);
  const FullDigitalSolver solver(sample_rayleigh(cfg, 1), cfg);
  for (double p : solver.waterfill_powers(1e9)) EXPECT_EQ(p, 0.0);
  EXPECT_EQ(inner_waterfill(sample_rayleigh(cfg, 1), 1e9, cfg).w_fd.norm(), 0.0);
}

TEST(Waterfill, FreePowerFillsTheBudget) {
  for (double pmax : {0.1, 1.0, 10.0}) {
    const auto cfg = make_config(6, 6, 3, 3, pmax);
    const FullDigitalSolver solver(sample_rayleigh(cfg, 2), cfg);
    const auto p = solver.waterfill_powers(0.0);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), pmax, 1e-9);
  }
  const auto cfg = make_config(4, 4, 2, 2);
  EXPECT_THROW(FullDigitalSolver(sample_rayleigh(cfg, 2), cfg).waterfill_powers(-1.0), InvalidInput);
}

TEST(Waterfill, NoRandomProbeDoesBetter) {
  const auto cfg = make_config(8, 8, 4, 2, 2.0);
  const double pc = 2.0;
  Rng rng(55);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const CMatrix h = sample_rayleigh(cfg, 100 + seed);
    const FullDigitalSolver solver(h, cfg);
    const double lambda = 0.5 * solver.solve(pc).ee;
    const CMatrix w = solver.inner_waterfill(lambda).w_fd;
    const double best = inner_objective(h, w, lambda, pc, cfg);
    double worst_gain = -1.0;
    for (int k = 0; k < 10000; ++k) {
      const double eps = std::pow(10.0, -4.0 + 4.0 * rng.uniform());
      CMatrix probe = w + eps * random_cmatrix(8, 2, rng);
      const double n2 = probe.squaredNorm();
      if (n2 > cfg.p_max) probe *= std::sqrt(cfg.p_max / n2);
      worst_gain = std::max(worst_gain, inner_objective(h, probe, lambda, pc, cfg) - best);
    }
    EXPECT_LE(worst_gain, 1e-8);
  }
}

TEST(FullDigital, RejectsNonPositiveCircuitPower) {
  const auto cfg = make_config(4, 4, 2, 1);
  EXPECT_THROW(solve_full_digital(sample_rayleigh(cfg, 0), 0.0, cfg), InvalidInput);
  EXPECT_THROW(solve_full_digital(CMatrix::Zero(3, 4), 1.0, cfg), InvalidInput);
}

TEST(FullDigital, ReportsNonConvergence) {
  const auto cfg = make_config(8, 8, 4, 2);
  DinkelbachOptions opts;
  opts.max_iter = 1;
  try {
    solve_full_digital(sample_rayleigh(cfg, 3), 1.0, cfg, opts);
    FAIL() << "expected a convergence failure";
  } catch (const ConvergenceFailure<DinkelbachTrace>& e) {
    EXPECT_EQ(e.trace().iterations, 1);
  }
}
