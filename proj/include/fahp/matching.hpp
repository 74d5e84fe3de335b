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
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fahp/ahp.hpp"
#include "fahp/connection_state.hpp"
#include "fahp/errors.hpp"
#include "fahp/parallel.hpp"
#include "fahp/rng.hpp"

namespace fahp {

// Many-to-many matching between antennas and RF chains. Both directions are
// kept as sorted index lists and updated together, so j in antenna_to_rf(i)
// exactly when i in rf_to_antenna(j).
class Matching {
 public:
  Matching() = default;
  Matching(std::size_t m_t, std::size_t n_rf) : a2r_(m_t), r2a_(n_rf) {}

  static Matching from_connection_state(const ConnectionState& d) {
    if (!d.is_binary()) throw InvalidInput("matching: connection state has non-binary entries");
    Matching m(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j)
        if (d(i, j) == 1) m.add(i, j);
    return m;
  }

  ConnectionState to_connection_state() const {
    ConnectionState d(a2r_.size(), r2a_.size());
    for (std::size_t i = 0; i < a2r_.size(); ++i)
      for (std::size_t j : a2r_[i]) d.set(i, j, 1);
    return d;
  }

  std::size_t antennas() const noexcept { return a2r_.size(); }
  std::size_t chains() const noexcept { return r2a_.size(); }

  const std::vector<std::size_t>& antenna_to_rf(std::size_t i) const { return a2r_.at(i); }
  const std::vector<std::size_t>& rf_to_antenna(std::size_t j) const { return r2a_.at(j); }

  bool contains(std::size_t i, std::size_t j) const {
    const auto& s = a2r_.at(i);
    return std::binary_search(s.begin(), s.end(), j);
  }

  void add(std::size_t i, std::size_t j) {
    if (contains(i, j)) throw InvalidInput("matching already holds [" + pair_name(i, j) + "]");
    insert_sorted(a2r_[i], j);
    insert_sorted(r2a_.at(j), i);
  }

  void remove(std::size_t i, std::size_t j) {
    if (!contains(i, j)) throw InvalidInput("matching does not hold [" + pair_name(i, j) + "]");
    erase_value(a2r_[i], j);
    erase_value(r2a_[j], i);
  }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& s : a2r_) n += s.size();
    return n;
  }

  // Conditions 1-5 of a valid matching under the caps of `cfg`.
  bool is_valid(const SystemConfig& cfg) const {
    if (a2r_.size() != cfg.m_t || r2a_.size() != cfg.n_rf) return false;
    for (std::size_t i = 0; i < a2r_.size(); ++i) {
      if (a2r_[i].size() > cfg.row_caps[i]) return false;
      for (std::size_t j : a2r_[i])
        if (j >= r2a_.size() || !std::binary_search(r2a_[j].begin(), r2a_[j].end(), i)) return false;
    }
    std::size_t back = 0;
    for (std::size_t j = 0; j < r2a_.size(); ++j) {
      if (r2a_[j].size() > cfg.col_caps[j]) return false;
      back += r2a_[j].size();
    }
    return back == size();
  }

  friend bool operator==(const Matching&, const Matching&) = default;

  static std::string pair_name(std::size_t i, std::size_t j) { return std::to_string(i) + "," + std::to_string(j); }

 private:
  static void insert_sorted(std::vector<std::size_t>& v, std::size_t x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); }
  static void erase_value(std::vector<std::size_t>& v, std::size_t x) { v.erase(std::lower_bound(v.begin(), v.end(), x)); }

  std::vector<std::vector<std::size_t>> a2r_;
  std::vector<std::vector<std::size_t>> r2a_;
};

// Memo of AHP outcomes keyed by the packed connection state. Concurrent
// lookups share a lock; the first insert for a key wins.
class UtilityCache {
 public:
  struct Entry {
    double ee = 0.0;
    HybridPrecoder precoder;
    EvalResult eval;
    bool rescaled = false;
  };

  std::optional<Entry> find(const ConnectionState& d) const {
    const Key key = d.packed();
    std::shared_lock lock(mutex_);
    const auto it = map_.find(key);
    if (it == map_.end()) {
      misses_.fetch_add(1, std::memory_order_relaxed);
      return std::nullopt;
    }
    hits_.fetch_add(1, std::memory_order_relaxed);
    return it->second;
  }

  Entry insert(const ConnectionState& d, Entry e) {
    std::unique_lock lock(mutex_);
    return map_.try_emplace(d.packed(), std::move(e)).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
  }
  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }

 private:
  using Key = std::vector<std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 0x243F6A8885A308D3ull;
      for (std::uint64_t w : k) h = splitmix64(h ^ w);
      return static_cast<std::size_t>(h);
    }
  };

  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, Entry, KeyHash> map_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

// U(D): energy efficiency reached by AHP on connection state D for one
// channel. All AHP runs share `ahp_seed`, so U is a pure function of D unless
// warm starting is switched on.
class UtilityEvaluator {
 public:
  UtilityEvaluator(ChannelMatrix h, SystemConfig cfg, std::uint64_t ahp_seed,
                   std::shared_ptr<UtilityCache> cache = std::make_shared<UtilityCache>(), AhpOptions opts = {})
      : h_(std::move(h)), cfg_(std::move(cfg)), solver_(h_, cfg_), seed_(ahp_seed), cache_(std::move(cache)),
        opts_(opts) {}

  const ChannelMatrix& channel() const noexcept { return h_; }
  const SystemConfig& config() const noexcept { return cfg_; }
  const FullDigitalSolver& full_digital_solver() const noexcept { return solver_; }
  std::uint64_t seed() const noexcept { return seed_; }
  UtilityCache* cache() const noexcept { return cache_.get(); }
  std::size_t ahp_runs() const noexcept { return ahp_runs_.load(); }
  std::size_t rescaled_runs() const noexcept { return rescaled_runs_.load(); }

  // Warm-start source for subsequent cache misses; nullptr for cold starts.
  void set_warm_start(const CMatrix* analog) { warm_ = analog; }

  UtilityCache::Entry evaluate(const ConnectionState& d) const {
    if (cache_)
      if (auto hit = cache_->find(d)) return *hit;
    const AhpResult r = run_ahp(solver_, h_, d, cfg_, seed_, opts_, warm_);
    ahp_runs_.fetch_add(1, std::memory_order_relaxed);
    if (r.trace.rescaled) rescaled_runs_.fetch_add(1, std::memory_order_relaxed);
    UtilityCache::Entry e{r.eval.ee, r.precoder, r.eval, r.trace.rescaled};
    if (cache_) return cache_->insert(d, std::move(e));
    return e;
  }

  double operator()(const ConnectionState& d) const { return evaluate(d).ee; }

 private:
  ChannelMatrix h_;
  SystemConfig cfg_;
  FullDigitalSolver solver_;
  std::uint64_t seed_;
  std::shared_ptr<UtilityCache> cache_;
  AhpOptions opts_;
  const CMatrix* warm_ = nullptr;
  mutable std::atomic<std::size_t> ahp_runs_{0};
  mutable std::atomic<std::size_t> rescaled_runs_{0};
};

inline double utility(const Matching& psi, const UtilityEvaluator& u) {
  if (!psi.is_valid(u.config())) throw InvalidInput("utility: matching violates the matching conditions");
  return u(psi.to_connection_state());
}

// --- Operations ----------------------------------------------------------

enum class OperationKind { swap, join, leave };

inline const char* to_string(OperationKind k) {
  switch (k) {
    case OperationKind::swap: return "swap";
    case OperationKind::join: return "join";
    case OperationKind::leave: return "leave";
  }
  return "?";
}

// swap: ([i,j],[i2,j2]) -> [i,j2],[i2,j]; join/leave use only (i, j).
struct Operation {
  OperationKind kind;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t i2 = 0;
  std::size_t j2 = 0;
  friend bool operator==(const Operation&, const Operation&) = default;
};

inline bool swap_admissible(const Matching& psi, std::size_t i, std::size_t j, std::size_t i2, std::size_t j2) {
  return i != i2 && i < psi.antennas() && i2 < psi.antennas() && j < psi.chains() && j2 < psi.chains() &&
         psi.contains(i, j) && !psi.contains(i2, j) && psi.contains(i2, j2) && !psi.contains(i, j2);
}

inline Matching swap_matching(const Matching& psi, std::size_t i, std::size_t j, std::size_t i2, std::size_t j2) {
  if (!swap_admissible(psi, i, j, i2, j2))
    throw InvalidInput("invalid swap ([" + Matching::pair_name(i, j) + "],[" + Matching::pair_name(i2, j2) + "])");
  Matching out = psi;
  out.remove(i, j);
  out.remove(i2, j2);
  out.add(i, j2);
  out.add(i2, j);
  return out;
}

inline bool join_admissible(const Matching& psi, std::size_t i, std::size_t j, const SystemConfig& cfg) {
  return i < psi.antennas() && j < psi.chains() && !psi.contains(i, j) &&
         psi.antenna_to_rf(i).size() < cfg.row_caps[i] && psi.rf_to_antenna(j).size() < cfg.col_caps[j];
}

inline Matching join_matching(const Matching& psi, std::size_t i, std::size_t j, const SystemConfig& cfg) {
  if (!join_admissible(psi, i, j, cfg)) throw InvalidInput("invalid join [" + Matching::pair_name(i, j) + "]");
  Matching out = psi;
  out.add(i, j);
  return out;
}

// Set removal: the antenna stops being matched with the chain.
inline Matching leave_matching(const Matching& psi, std::size_t i, std::size_t j) {
  if (i >= psi.antennas() || j >= psi.chains() || !psi.contains(i, j))
    throw InvalidInput("invalid leave [" + Matching::pair_name(i, j) + "]");
  Matching out = psi;
  out.remove(i, j);
  return out;
}

inline Matching apply_operation(const Matching& psi, const Operation& op, const SystemConfig& cfg) {
  switch (op.kind) {
    case OperationKind::swap: return swap_matching(psi, op.i, op.j, op.i2, op.j2);
    case OperationKind::join: return join_matching(psi, op.i, op.j, cfg);
    case OperationKind::leave: return leave_matching(psi, op.i, op.j);
  }
  return psi;
}

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline double opu_swap(const Matching& psi, std::size_t i, std::size_t j, std::size_t i2, std::size_t j2,
                       const UtilityEvaluator& u) {
  const Matching next = swap_matching(psi, i, j, i2, j2);
  return positive_part(utility(next, u) - utility(psi, u));
}

inline double opu_join(const Matching& psi, std::size_t i, std::size_t j, const UtilityEvaluator& u) {
  const Matching next = join_matching(psi, i, j, u.config());
  return positive_part(utility(next, u) - utility(psi, u));
}

inline double opu_leave(const Matching& psi, std::size_t i, std::size_t j, const UtilityEvaluator& u) {
  const Matching next = leave_matching(psi, i, j);
  return positive_part(utility(next, u) - utility(psi, u));
}

// Candidate operations involving antenna i, in lexicographic operand order.
inline std::vector<Operation> swap_candidates(const Matching& psi, std::size_t i) {
  std::vector<Operation> ops;
  for (std::size_t j : psi.antenna_to_rf(i))
    for (std::size_t i2 = 0; i2 < psi.antennas(); ++i2) {
      if (i2 == i || psi.contains(i2, j)) continue;
      for (std::size_t j2 : psi.antenna_to_rf(i2))
        if (!psi.contains(i, j2)) ops.push_back({OperationKind::swap, i, j, i2, j2});
    }
  return ops;
}

inline std::vector<Operation> join_candidates(const Matching& psi, std::size_t i, const SystemConfig& cfg) {
  std::vector<Operation> ops;
  for (std::size_t j = 0; j < psi.chains(); ++j)
    if (join_admissible(psi, i, j, cfg)) ops.push_back({OperationKind::join, i, j});
  return ops;
}

inline std::vector<Operation> leave_candidates(const Matching& psi, std::size_t i) {
  std::vector<Operation> ops;
  for (std::size_t j : psi.antenna_to_rf(i)) ops.push_back({OperationKind::leave, i, j});
  return ops;
}

// --- Algorithm -----------------------------------------------------------

struct ExecutedOperation {
  Operation op;
  double opu = 0.0;
  double utility = 0.0;  // after execution
};

struct MatchingStats {
  std::size_t while_loops = 0;
  std::size_t opu_evaluations = 0;
  std::vector<std::size_t> loop_opu_evaluations;  // per while loop
  std::vector<double> utility_trajectory;         // initial utility, then one entry per executed operation
  std::vector<ExecutedOperation> executed_ops;
  std::size_t ahp_runs = 0;  // cache misses
};

struct MafahpOptions {
  std::optional<Matching> init;  // random feasible matching from init_seed when empty
  std::uint64_t init_seed = 0;
  std::size_t max_loops = 0;  // 0: 10 * M_T
  std::size_t threads = 1;    // parallel candidate evaluation
  bool warm_start = false;    // seed AHP from the incumbent's analog precoder
};

struct MafahpResult {
  Matching matching;
  ConnectionState d;
  HybridPrecoder precoder;
  EvalResult eval;
  MatchingStats stats;
};

// Each d(i,j) ~ Bernoulli(1/2), then uniformly random ones are dropped from
// any row and then any column that exceeds its cap.
inline Matching random_feasible_matching(const SystemConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ConnectionState d(cfg.m_t, cfg.n_rf);
  for (std::size_t i = 0; i < cfg.m_t; ++i)
    for (std::size_t j = 0; j < cfg.n_rf; ++j) d.set(i, j, rng.bernoulli(0.5) ? 1 : 0);
  for (std::size_t i = 0; i < cfg.m_t; ++i) {
    while (d.row_sum(i) > cfg.row_caps[i]) {
      std::vector<std::size_t> on;
      for (std::size_t j = 0; j < cfg.n_rf; ++j)
        if (d(i, j) == 1) on.push_back(j);
      d.set(i, on[rng.below(on.size())], 0);
    }
  }
  for (std::size_t j = 0; j < cfg.n_rf; ++j) {
    while (d.col_sum(j) > cfg.col_caps[j]) {
      std::vector<std::size_t> on;
      for (std::size_t i = 0; i < cfg.m_t; ++i)
        if (d(i, j) == 1) on.push_back(i);
      d.set(on[rng.below(on.size())], j, 0);
    }
  }
  return Matching::from_connection_state(d);
}

namespace detail {

struct BestCandidate {
  std::optional<Operation> op;
  double opu = 0.0;
  double utility = 0.0;
  Matching next;
};

// Evaluates every candidate against the current matching and keeps the first
// one (in enumeration order) with the strictly largest positive OPU.
inline BestCandidate best_operation(const Matching& psi, double current, const std::vector<Operation>& ops,
                                    const UtilityEvaluator& u, std::size_t threads) {
  std::vector<Matching> nexts;
  nexts.reserve(ops.size());
  for (const Operation& op : ops) nexts.push_back(apply_operation(psi, op, u.config()));
  std::vector<double> values(ops.size());
  parallel_for(ops.size(), threads, [&](std::size_t k) { values[k] = u(nexts[k].to_connection_state()); });
  BestCandidate best;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const double opu = positive_part(values[k] - current);
    if (opu > best.opu) {
      best.op = ops[k];
      best.opu = opu;
      best.utility = values[k];
      best.next = nexts[k];
    }
  }
  return best;
}

}  // namespace detail

// Runs the swap / join / leave matching search until a full pass over the
// antennas changes nothing.
inline MafahpResult run_mafahp(UtilityEvaluator& u, const MafahpOptions& opts = {}) {
  const SystemConfig& cfg = u.config();
  cfg.validate();
  Matching psi = opts.init ? *opts.init : random_feasible_matching(cfg, opts.init_seed);
  if (!psi.is_valid(cfg)) throw InvalidInput("run_mafahp: initial matching is not feasible");
  const std::size_t max_loops = opts.max_loops ? opts.max_loops : 10 * cfg.m_t;
  const std::size_t runs_before = u.ahp_runs();

  MatchingStats stats;
  UtilityCache::Entry incumbent = u.evaluate(psi.to_connection_state());
  stats.utility_trajectory.push_back(incumbent.ee);

  for (;;) {
    if (stats.while_loops == max_loops)
      throw ConvergenceFailure<MatchingStats>("matching did not stabilize within " + std::to_string(max_loops) +
                                                  " loops",
                                              stats);
    ++stats.while_loops;
    const Matching before = psi;
    std::size_t evaluations = 0;
    for (std::size_t i = 0; i < cfg.m_t; ++i) {
      for (OperationKind kind : {OperationKind::swap, OperationKind::join, OperationKind::leave}) {
        const std::vector<Operation> ops = kind == OperationKind::swap   ? swap_candidates(psi, i)
                                           : kind == OperationKind::join ? join_candidates(psi, i, cfg)
                                                                         : leave_candidates(psi, i);
        if (opts.warm_start) u.set_warm_start(&incumbent.precoder.f);
        detail::BestCandidate best = detail::best_operation(psi, incumbent.ee, ops, u, opts.threads);
        u.set_warm_start(nullptr);
        evaluations += ops.size();
        if (best.op) {
          psi = std::move(best.next);
          incumbent = u.evaluate(psi.to_connection_state());
          stats.executed_ops.push_back({*best.op, best.opu, incumbent.ee});
          stats.utility_trajectory.push_back(incumbent.ee);
        }
      }
    }
    stats.loop_opu_evaluations.push_back(evaluations);
    stats.opu_evaluations += evaluations;
    if (psi == before) break;
  }
  stats.ahp_runs = u.ahp_runs() - runs_before;

  MafahpResult out;
  out.d = psi.to_connection_state();
  out.matching = std::move(psi);
  out.precoder = incumbent.precoder;
  out.eval = incumbent.eval;
  out.stats = std::move(stats);
  return out;
}

inline MafahpResult run_mafahp(const ChannelMatrix& h, const SystemConfig& cfg, std::uint64_t ahp_seed,
                               const MafahpOptions& opts = {}) {
  UtilityEvaluator u(h, cfg, ahp_seed);
  return run_mafahp(u, opts);
}

struct StabilityReport {
  bool stable = true;
  std::size_t candidates = 0;
  double max_opu = 0.0;
  std::optional<Operation> witness;  // an operation with positive OPU, if any
};

// Re-enumerates every swap, join and leave for every antenna.
inline StabilityReport verify_stable(const Matching& psi, const UtilityEvaluator& u) {
  StabilityReport rep;
  const double current = utility(psi, u);
  for (std::size_t i = 0; i < psi.antennas(); ++i) {
    std::vector<Operation> ops = swap_candidates(psi, i);
    const auto joins = join_candidates(psi, i, u.config());
    const auto leaves = leave_candidates(psi, i);
    ops.insert(ops.end(), joins.begin(), joins.end());
    ops.insert(ops.end(), leaves.begin(), leaves.end());
    for (const Operation& op : ops) {
      const double opu = positive_part(u(apply_operation(psi, op, u.config()).to_connection_state()) - current);
      ++rep.candidates;
      if (opu > rep.max_opu) {
        rep.max_opu = opu;
        rep.witness = op;
        rep.stable = false;
      }
    }
  }
  return rep;
}

}  // namespace fahp
