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

#include <cstdint>

#include "fahp/ahp.hpp"
#include "fahp/full_digital.hpp"
#include "fahp/matching.hpp"

namespace fahp::harness {

// AHP on the all-ones connection state.
inline AhpResult strategy_full_connected_ahp(const UtilityEvaluator& u) {
  const SystemConfig& cfg = u.config();
  const ConnectionState d = ConnectionState::ones(cfg.m_t, cfg.n_rf);
  return run_ahp(u.full_digital_solver(), u.channel(), d, cfg, u.seed());
}

inline EvalResult strategy_full_connected_ahp(const ChannelMatrix& h, const SystemConfig& cfg, std::uint64_t seed) {
  return run_ahp(h, ConnectionState::ones(cfg.m_t, cfg.n_rf), cfg, seed).eval;
}

// AHP on the block layout: antenna group j feeds RF chain j.
inline AhpResult strategy_sub_connected_ahp(const UtilityEvaluator& u) {
  const SystemConfig& cfg = u.config();
  const ConnectionState d = ConnectionState::sub_connected(cfg.m_t, cfg.n_rf);
  return run_ahp(u.full_digital_solver(), u.channel(), d, cfg, u.seed());
}

inline EvalResult strategy_sub_connected_ahp(const ChannelMatrix& h, const SystemConfig& cfg, std::uint64_t seed) {
  return run_ahp(h, ConnectionState::sub_connected(cfg.m_t, cfg.n_rf), cfg, seed).eval;
}

// A full-digital transmitter has one RF chain per antenna and neither phase
// shifters nor switches.
inline double full_digital_circuit_power(const SystemConfig& cfg) {
  return static_cast<double>(cfg.m_t) * cfg.p_rf + cfg.p_o;
}

struct FullDigitalOutcome {
  FullDigitalSolution solution;
  EvalResult eval;
};

inline FullDigitalOutcome strategy_full_digital(const FullDigitalSolver& solver, const SystemConfig& cfg) {
  FullDigitalOutcome out;
  const double pc = full_digital_circuit_power(cfg);
  out.solution = solver.solve(pc);
  out.eval.se = out.solution.rate;
  out.eval.pt = out.solution.precoder.w_fd.squaredNorm() / static_cast<double>(cfg.l_s);
  out.eval.pc = pc;
  out.eval.p_total = out.eval.pt + out.eval.pc;
  out.eval.ee = out.eval.se / out.eval.p_total;
  return out;
}

}  // namespace fahp::harness
