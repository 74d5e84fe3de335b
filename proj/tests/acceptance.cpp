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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fahp/ahp.hpp"
#include "fahp/channel.hpp"
#include "fahp/full_digital.hpp"
#include "fahp/harness/experiment.hpp"
#include "fahp/harness/io.hpp"
#include "fahp/harness/strategies.hpp"
#include "fahp/matching.hpp"
#include "fahp/oracle.hpp"
#include "support.hpp"

using namespace fahp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. MA-FAHP against exhaustive search on small arrays.
Outcome oracle_gap() {
  Outcome out{true, ""};
  std::size_t instances = 0, above_oracle = 0;
  double worst_ratio = 1.0;
  for (std::size_t m_t : {4u, 6u}) {
    for (double dbw : {0.0, 5.0, 10.0}) {
      const SystemConfig cfg = make_config(m_t, 64, 2, 1, dbw_to_watts(dbw));
      double sum_m = 0.0, sum_x = 0.0;
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::uint64_t cs = derive_seed(0xACCE55, seed);
        UtilityEvaluator u(sample_rayleigh(cfg, cs), cfg, derive_seed(cs, 1));
        const OracleResult x = exhaustive_dcs(u, worker_count());
        MafahpOptions opts;
        opts.init_seed = derive_seed(cs, 2);
        const MafahpResult m = run_mafahp(u, opts);
        sum_m += m.eval.ee;
        sum_x += x.best_ee;
        if (m.eval.ee > x.best_ee + 1e-9) ++above_oracle;
        ++instances;
      }
      const double ratio = sum_m / sum_x;
      worst_ratio = std::min(worst_ratio, ratio);
      out.detail += fmt(" M_T=%zu/%gdBW:%.4f", m_t, dbw, ratio);
      if (ratio < 0.95) out.pass = false;
    }
  }
  if (above_oracle) out.pass = false;
  out.detail = fmt("%zu instances, worst mean ratio %.4f (gate 0.95), %zu above oracle;", instances, worst_ratio,
                   above_oracle) +
               out.detail;
  return out;
}

struct ConvergenceSuite {
  std::size_t runs = 0;
  std::size_t non_increasing = 0;
  std::size_t unstable = 0;
  std::size_t loops = 0;
  std::size_t loops_over_bound = 0;
  std::size_t max_loop_evals = 0;
  double worst_bound_use = 0.0;
};

const ConvergenceSuite& convergence_suite() {
  static const ConvergenceSuite suite = [] {
    ConvergenceSuite s;
    Rng rng(0xC0FFEE);
    for (int k = 0; k < 200; ++k) {
      const std::size_t m_t = 4 + rng.below(13);
      const std::size_t n_rf = std::min<std::size_t>(m_t, 2 + rng.below(3));
      const std::size_t l_s = 1 + rng.below(std::min<std::size_t>(n_rf, 2));
      SystemConfig cfg = make_config(m_t, m_t, n_rf, l_s, dbw_to_watts(-10.0 + 5.0 * static_cast<double>(rng.below(5))));
      if (k % 3 == 2) {
        for (auto& p : cfg.row_caps) p = 1 + rng.below(n_rf);
        for (auto& q : cfg.col_caps) q = 1 + rng.below(m_t);
      }
      UtilityEvaluator u(sample_rayleigh(cfg, rng.next_u64()), cfg, rng.next_u64());
      MafahpOptions opts;
      opts.init_seed = rng.next_u64();
      const MafahpResult r = run_mafahp(u, opts);
      ++s.runs;
      const auto& t = r.stats.utility_trajectory;
      for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) {
          ++s.non_increasing;
          break;
        }
      if (!verify_stable(r.matching, u).stable) ++s.unstable;
      const std::size_t bound = m_t * m_t * n_rf * n_rf + m_t * n_rf;
      for (std::size_t n : r.stats.loop_opu_evaluations) {
        ++s.loops;
        s.max_loop_evals = std::max(s.max_loop_evals, n);
        s.worst_bound_use = std::max(s.worst_bound_use, static_cast<double>(n) / static_cast<double>(bound));
        if (n > bound) ++s.loops_over_bound;
      }
    }
    return s;
  }();
  return suite;
}

// 2. Strictly increasing utility and a stable end point.
Outcome monotone_convergence() {
  const ConvergenceSuite& s = convergence_suite();
  return {s.non_increasing == 0 && s.unstable == 0,
          fmt("%zu runs, %zu non-increasing trajectories, %zu unstable end points", s.runs, s.non_increasing,
              s.unstable)};
}

// 7. Candidate evaluations per loop under M_T^2 N_RF^2 + M_T N_RF.
Outcome complexity_bound() {
  const ConvergenceSuite& s = convergence_suite();
  return {s.loops_over_bound == 0,
          fmt("%zu loops, %zu over the bound, largest loop %zu evaluations, peak use %.1f%% of bound", s.loops,
              s.loops_over_bound, s.max_loop_evals, 100.0 * s.worst_bound_use)};
}

// 3. AHP output meets the power cap; rescaling stays rare.
Outcome power_constraint() {
  Rng rng(0x1E77A);
  std::size_t runs = 0, violations = 0, rescaled = 0;
  double worst = -1e300;
  for (int k = 0; k < 500; ++k) {
    const std::size_t m_t = rng.bernoulli(0.5) ? 8 : 16;
    const std::size_t n_rf = rng.bernoulli(0.5) ? 2 : 4;
    const std::size_t l_s = 1 + rng.below(2);
    const SystemConfig cfg =
        make_config(m_t, m_t, n_rf, l_s, dbw_to_watts(-10.0 + 5.0 * static_cast<double>(rng.below(5))));
    ConnectionState d = test::random_state(m_t, n_rf, rng, 0.2 + 0.8 * rng.uniform());
    const AhpResult r = run_ahp(sample_rayleigh(cfg, rng.next_u64()), d, cfg, rng.next_u64());
    const double radiated = effective_precoder(r.precoder, d).squaredNorm();
    const double excess = std::max(radiated, r.eval.pt) - cfg.p_max;
    worst = std::max(worst, excess);
    if (excess > 1e-9) ++violations;
    if (r.trace.rescaled) ++rescaled;
    ++runs;
  }
  const double rate = static_cast<double>(rescaled) / static_cast<double>(runs);
  return {violations == 0 && rate <= 0.01,
          fmt("%zu runs, %zu over P_max + 1e-9 (largest excess %.3g W), rescaled %zu (%.2f%%, gate 1%%)", runs,
              violations, worst, rescaled, 100.0 * rate)};
}

// 4. Dinkelbach solution against a dense power grid.
Outcome full_digital_grid() {
  Rng rng(0xF0D1);
  double worst = 0.0;
  std::size_t non_monotone = 0;
  for (int k = 0; k < 50; ++k) {
    const SystemConfig cfg = make_config(16, 16, 4, 1, dbw_to_watts(-10.0 + 20.0 * rng.uniform()));
    const CMatrix h = sample_rayleigh(cfg, rng.next_u64());
    const double pc = circuit_power(test::random_state(16, 4, rng, rng.uniform()), cfg);
    const FullDigitalSolution sol = solve_full_digital(h, pc, cfg);
    const GridOptimum g = grid_full_digital_ls1(h, pc, cfg, 1'000'000);
    worst = std::max(worst, test::rel_diff(sol.ee, g.ee));
    const auto& l = sol.trace.lambdas;
    for (std::size_t i = 1; i < l.size(); ++i)
      if (l[i] < l[i - 1]) {
        ++non_monotone;
        break;
      }
  }
  return {worst <= 1e-4 && non_monotone == 0,
          fmt("50 channels, worst relative EE gap %.3g (gate 1e-4), %zu non-monotone lambda traces", worst,
              non_monotone)};
}

// 5. Analytic phase gradient against central differences.
Outcome gradient_check() {
  Rng rng(0x6AAD);
  double worst = 0.0;
  std::size_t points = 0;
  for (std::size_t m_t : {8u, 16u})
    for (std::size_t n_rf : {2u, 4u})
      for (int k = 0; k < 100; ++k) {
        ConnectionState d = test::random_state(m_t, n_rf, rng);
        if (d.count_ones() == 0) d.set(0, 0, 1);
        const FullDigitalPrecoder w_fd{test::random_cmatrix(static_cast<Eigen::Index>(m_t), 2, rng)};
        const CMatrix w = test::random_cmatrix(static_cast<Eigen::Index>(n_rf), 2, rng);
        const ReducedAnalogSystem sys = *reduce_analog_system(w_fd, w, d);
        PhaseVector phi(static_cast<Eigen::Index>(sys.size()));
        for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = 2.0 * std::numbers::pi * rng.uniform();
        Eigen::VectorXd g;
        sys.objective(phi, &g);
        Eigen::VectorXd fd(phi.size());
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
          PhaseVector p = phi, m = phi;
          p(i) += 1e-6;
          m(i) -= 1e-6;
          fd(i) = (sys.objective(p) - sys.objective(m)) / 2e-6;
        }
        worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-300));
        ++points;
      }
  return {worst <= 1e-5, fmt("%zu points over M_T {8,16} x N_RF {2,4}, worst relative error %.3g (gate 1e-5)",
                             points, worst)};
}

// 6. MA-FAHP started from a fixed layout never ends below it.
Outcome baseline_dominance() {
  Rng rng(0xD0111);
  std::size_t full_bad = 0, sub_bad = 0, runs = 0;
  double full_gain = 0.0, sub_gain = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t m_t = k % 2 ? 16 : 8;
    const std::size_t n_rf = (k / 2) % 2 ? 4 : 2;
    const SystemConfig cfg =
        make_config(m_t, m_t, n_rf, 1, dbw_to_watts(-10.0 + 5.0 * static_cast<double>(rng.below(5))));
    UtilityEvaluator u(sample_rayleigh(cfg, rng.next_u64()), cfg, rng.next_u64());
    const double full = harness::strategy_full_connected_ahp(u).eval.ee;
    const double sub = harness::strategy_sub_connected_ahp(u).eval.ee;
    MafahpOptions from_full, from_sub;
    from_full.init = Matching::from_connection_state(ConnectionState::ones(m_t, n_rf));
    from_sub.init = Matching::from_connection_state(ConnectionState::sub_connected(m_t, n_rf));
    const double a = run_mafahp(u, from_full).eval.ee;
    const double b = run_mafahp(u, from_sub).eval.ee;
    if (a < full) ++full_bad;
    if (b < sub) ++sub_bad;
    full_gain += a / full;
    sub_gain += b / sub;
    ++runs;
  }
  return {full_bad == 0 && sub_bad == 0,
          fmt("%zu instances per start, violations full=%zu sub=%zu, mean EE gain x%.3f (full) x%.3f (sub)", runs,
              full_bad, sub_bad, full_gain / runs, sub_gain / runs)};
}

struct BeamCheck {
  std::size_t pass = 0;
  std::size_t runs = 0;
  double min_ratio = 1e300;
  double max_ratio = -1e300;
  double worst_peak_error = 0.0;
};

BeamCheck beam_runs(double p_max_dbw, std::size_t seeds) {
  BeamCheck c;
  const SystemConfig cfg = make_config(64, 64, 2, 1, dbw_to_watts(p_max_dbw));
  ChannelSpec spec{ChannelKind::geometric, {50.0}, {cplx(1.0)}, 0.5, 0};
  const CMatrix h = sample_geometric(cfg, spec);
  const std::vector<double> grid = angle_grid(-90.0, 90.0, 0.25);
  for (std::uint64_t s = 0; s < seeds; ++s) {
    MafahpOptions opts;
    opts.init_seed = derive_seed(0xBEA4, 2 * s);
    const MafahpResult r = run_mafahp(h, cfg, derive_seed(0xBEA4, 2 * s + 1), opts);
    const LobeAnalysis lobe = analyze_main_lobe(beampattern(r.precoder, r.d, cfg, grid));
    const double err = std::abs(lobe.peak_angle - 50.0);
    c.worst_peak_error = std::max(c.worst_peak_error, err);
    c.min_ratio = std::min(c.min_ratio, lobe.main_to_sidelobe_db);
    c.max_ratio = std::max(c.max_ratio, lobe.main_to_sidelobe_db);
    if (err <= 1.0 && lobe.main_to_sidelobe_db >= 10.0) ++c.pass;
    ++c.runs;
  }
  return c;
}

// 8. Beam direction and sidelobe level of the proposed design.
Outcome beampattern_check() {
  const BeamCheck c = beam_runs(-20.0, 5);
  return {c.pass == c.runs,
          fmt("P_max -20 dBW, %zu/%zu seeds pass, peak error <= %.2f deg, main-to-sidelobe %.2f..%.2f dB (gate 10)",
              c.pass, c.runs, c.worst_peak_error, c.min_ratio, c.max_ratio)};
}

// 9. Byte-identical CSV for every thread count.
Outcome determinism() {
  using namespace harness;
  std::vector<ExperimentSpec> specs;
  ExperimentSpec a = default_spec(ExperimentKind::ee_vs_pmax);
  a.base = make_config(8, 8, 2, 1);
  a.trials = 4;
  specs.push_back(a);
  ExperimentSpec b = default_spec(ExperimentKind::oracle_gap);
  b.trials = 3;
  specs.push_back(b);
  ExperimentSpec c = default_spec(ExperimentKind::beampattern);
  c.base = make_config(16, 16, 2, 1);
  specs.push_back(c);
  std::size_t mismatches = 0, files = 0;
  for (const ExperimentSpec& s : specs) {
    std::string ref;
    for (std::size_t threads : {1u, 2u, 5u}) {
      const ExperimentOutput out = run_experiment(s, threads);
      std::ostringstream os;
      write_csv(os, s, out.rows);
      write_pattern_csv(os, out.beams);
      os << summary_json(s, out).dump();
      if (threads == 1)
        ref = os.str();
      else if (os.str() != ref)
        ++mismatches;
      ++files;
    }
  }
  return {mismatches == 0,
          fmt("%zu specs x threads {1,2,5}, %zu outputs compared, %zu differ", specs.size(), files, mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "oracle gap", oracle_gap},
      {2, "monotone convergence", monotone_convergence},
      {3, "power constraint", power_constraint},
      {4, "full-digital vs grid", full_digital_grid},
      {5, "gradient check", gradient_check},
      {6, "baseline dominance", baseline_dominance},
      {7, "complexity bound", complexity_bound},
      {8, "beampattern", beampattern_check},
      {9, "determinism", determinism},
  };
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %-22s %s  %s [%.1fs]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
    if (c.id == 8 && (wanted.empty() || wanted.count(8))) {
      const BeamCheck info = beam_runs(0.0, 3);
      std::printf("info        beampattern at 0 dBW   %zu/%zu seeds reach 10 dB, main-to-sidelobe %.2f..%.2f dB\n",
                  info.pass, info.runs, info.min_ratio, info.max_ratio);
    }
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
