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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fahp/channel.hpp"
#include "fahp/harness/spec.hpp"
#include "fahp/harness/strategies.hpp"
#include "fahp/matching.hpp"
#include "fahp/oracle.hpp"
#include "fahp/parallel.hpp"

namespace fahp::harness {

struct ResultRow {
  std::string experiment;
  std::string strategy;
  double sweep_value = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double se = 0.0;
  double pt = 0.0;
  double pc = 0.0;
  double ee = 0.0;
  std::size_t while_loops = 0;
  std::size_t opu_evaluations = 0;
  double wall_seconds = 0.0;
  std::string error;  // empty on success

  bool ok() const noexcept { return error.empty(); }
};

struct BeamRecord {
  std::string strategy;
  double sweep_value = 0.0;
  std::size_t trial = 0;
  Beampattern pattern;
  LobeAnalysis lobe;
};

struct SummaryEntry {
  std::string strategy;
  double sweep_value = 0.0;
  std::size_t n = 0;
  std::size_t failures = 0;
  double mean_ee = 0.0;
  double stderr_ee = 0.0;
  double mean_se = 0.0;
  double mean_pc = 0.0;
  double mean_pt = 0.0;
  double mean_while_loops = 0.0;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;  // ordered by (sweep value, trial, strategy)
  std::vector<BeamRecord> beams;
  std::vector<SummaryEntry> summary;
};

// Seeds of one Monte-Carlo trial. The channel seed depends only on the trial
// index, so every sweep point sees the same channel draws.
struct TrialSeeds {
  std::uint64_t channel;
  std::uint64_t ahp;
  std::uint64_t init;
};

inline TrialSeeds trial_seeds(std::uint64_t master_seed, std::size_t trial) {
  const std::uint64_t c = derive_seed(master_seed, trial);
  return {c, derive_seed(c, 1), derive_seed(c, 2)};
}

inline ChannelMatrix experiment_channel(const ExperimentSpec& spec, const SystemConfig& cfg, double sweep_value,
                                        std::uint64_t seed) {
  if (spec.kind == ExperimentKind::beampattern) {
    ChannelSpec cs;
    cs.kind = ChannelKind::geometric;
    cs.aod_degrees = {sweep_value};
    cs.path_gains = {cplx(1.0, 0.0)};
    cs.rng_seed = seed;
    return sample_geometric(cfg, cs);
  }
  return sample_rayleigh(cfg, seed);
}

inline Matching initial_matching(InitPolicy policy, const SystemConfig& cfg, std::uint64_t seed) {
  switch (policy) {
    case InitPolicy::full_connected:
      return Matching::from_connection_state(ConnectionState::ones(cfg.m_t, cfg.n_rf));
    case InitPolicy::sub_connected:
      return Matching::from_connection_state(ConnectionState::sub_connected(cfg.m_t, cfg.n_rf));
    case InitPolicy::random: break;
  }
  return random_feasible_matching(cfg, seed);
}

namespace detail {

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s.empty() ? std::string("error") : s;
}

inline void fill(ResultRow& row, const EvalResult& e) {
  row.se = e.se;
  row.pt = e.pt;
  row.pc = e.pc;
  row.ee = e.ee;
}

struct UnitOutput {
  std::vector<ResultRow> rows;
  std::vector<BeamRecord> beams;
};

inline UnitOutput run_unit(const ExperimentSpec& spec, double sweep_value, std::size_t trial) {
  UnitOutput out;
  const SystemConfig cfg = spec.config_for(sweep_value);
  const TrialSeeds seeds = trial_seeds(spec.master_seed, trial);
  const bool beams = spec.kind == ExperimentKind::beampattern;
  const std::vector<double> grid =
      beams ? angle_grid(spec.grid_start, spec.grid_stop, spec.grid_step) : std::vector<double>{};

  std::unique_ptr<UtilityEvaluator> u;
  std::string setup_error;
  try {
    u = std::make_unique<UtilityEvaluator>(experiment_channel(spec, cfg, sweep_value, seeds.channel), cfg, seeds.ahp);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  for (Strategy strategy : spec.strategies) {
    ResultRow row;
    row.experiment = spec.id;
    row.strategy = std::string(to_string(strategy));
    row.sweep_value = sweep_value;
    row.trial = trial;
    row.seed = seeds.channel;
    const auto start = std::chrono::steady_clock::now();
    CMatrix effective;
    try {
      if (!u) throw InvalidInput(setup_error);
      switch (strategy) {
        case Strategy::proposed: {
          MafahpOptions mo;
          mo.init = initial_matching(spec.proposed_init, cfg, seeds.init);
          mo.warm_start = spec.warm_start;
          const MafahpResult r = run_mafahp(*u, mo);
          fill(row, r.eval);
          row.while_loops = r.stats.while_loops;
          row.opu_evaluations = r.stats.opu_evaluations;
          if (beams) effective = effective_precoder(r.precoder, r.d);
          break;
        }
        case Strategy::full_digital: {
          const FullDigitalOutcome r = strategy_full_digital(u->full_digital_solver(), cfg);
          fill(row, r.eval);
          if (beams) effective = r.solution.precoder.w_fd;
          break;
        }
        case Strategy::full_connected_ahp:
        case Strategy::sub_connected_ahp: {
          const AhpResult r = strategy == Strategy::full_connected_ahp ? strategy_full_connected_ahp(*u)
                                                                       : strategy_sub_connected_ahp(*u);
          fill(row, r.eval);
          if (beams) {
            const ConnectionState d = strategy == Strategy::full_connected_ahp
                                          ? ConnectionState::ones(cfg.m_t, cfg.n_rf)
                                          : ConnectionState::sub_connected(cfg.m_t, cfg.n_rf);
            effective = effective_precoder(r.precoder, d);
          }
          break;
        }
        case Strategy::random_init_only: {
          const ConnectionState d = random_feasible_matching(cfg, seeds.init).to_connection_state();
          const UtilityCache::Entry e = u->evaluate(d);
          fill(row, e.eval);
          if (beams) effective = effective_precoder(e.precoder, d);
          break;
        }
        case Strategy::exhaustive: {
          const OracleResult r = exhaustive_dcs(*u);
          const UtilityCache::Entry e = u->evaluate(r.best_d);
          fill(row, e.eval);
          row.opu_evaluations = r.evaluated_count;
          if (beams) effective = effective_precoder(e.precoder, r.best_d);
          break;
        }
      }
      if (beams) {
        BeamRecord b{row.strategy, sweep_value, trial, beampattern_of(effective, grid), {}};
        b.lobe = analyze_main_lobe(b.pattern);
        out.beams.push_back(std::move(b));
      }
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.se = row.pt = row.pc = row.ee = nan;
      row.error = sanitize(e.what());
    }
    if (spec.record_timing)
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

// Mean and standard error per (strategy, sweep value), failed rows excluded.
inline std::vector<SummaryEntry> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryEntry> out;
  std::map<std::pair<std::string, double>, std::size_t> index;
  std::vector<std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) {
    const auto key = std::make_pair(r.strategy, r.sweep_value);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({r.strategy, r.sweep_value});
      groups.emplace_back();
    }
    if (r.ok())
      groups[it->second].push_back(&r);
    else
      ++out[it->second].failures;
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    SummaryEntry& s = out[g];
    const auto& grp = groups[g];
    s.n = grp.size();
    if (grp.empty()) continue;
    const double n = static_cast<double>(grp.size());
    for (const ResultRow* r : grp) {
      s.mean_ee += r->ee;
      s.mean_se += r->se;
      s.mean_pc += r->pc;
      s.mean_pt += r->pt;
      s.mean_while_loops += static_cast<double>(r->while_loops);
    }
    s.mean_ee /= n;
    s.mean_se /= n;
    s.mean_pc /= n;
    s.mean_pt /= n;
    s.mean_while_loops /= n;
    if (grp.size() > 1) {
      double ss = 0.0;
      for (const ResultRow* r : grp) ss += (r->ee - s.mean_ee) * (r->ee - s.mean_ee);
      s.stderr_ee = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
  }
  return out;
}

// Runs every (sweep value, trial) unit on up to `threads` workers. Output
// order is fixed by the spec, not by completion order.
inline ExperimentOutput run_experiment(const ExperimentSpec& spec, std::size_t threads = 1) {
  spec.validate();
  const std::size_t units = spec.sweep.size() * spec.trials;
  std::vector<detail::UnitOutput> results(units);
  parallel_for(units, threads, [&](std::size_t k) {
    results[k] = detail::run_unit(spec, spec.sweep[k / spec.trials], k % spec.trials);
  });
  ExperimentOutput out;
  for (auto& r : results) {
    for (auto& row : r.rows) out.rows.push_back(std::move(row));
    for (auto& b : r.beams) out.beams.push_back(std::move(b));
  }
  out.summary = summarize(out.rows);
  return out;
}

}  // namespace fahp::harness
