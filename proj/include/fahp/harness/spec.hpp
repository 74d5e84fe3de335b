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
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fahp/config.hpp"
#include "fahp/errors.hpp"

namespace fahp::harness {

enum class ExperimentKind { ee_vs_pmax, ee_vs_nrf, ee_vs_mt, beampattern, oracle_gap };

enum class Strategy { proposed, full_digital, full_connected_ahp, sub_connected_ahp, random_init_only, exhaustive };

enum class InitPolicy { random, full_connected, sub_connected };

inline constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::ee_vs_pmax, "ee_vs_pmax"},   {ExperimentKind::ee_vs_nrf, "ee_vs_nrf"},
    {ExperimentKind::ee_vs_mt, "ee_vs_mt"},       {ExperimentKind::beampattern, "beampattern"},
    {ExperimentKind::oracle_gap, "oracle_gap"},
};

inline constexpr std::pair<Strategy, std::string_view> kStrategyNames[] = {
    {Strategy::proposed, "proposed"},
    {Strategy::full_digital, "full_digital"},
    {Strategy::full_connected_ahp, "full_connected_ahp"},
    {Strategy::sub_connected_ahp, "sub_connected_ahp"},
    {Strategy::random_init_only, "random_init_only"},
    {Strategy::exhaustive, "exhaustive"},
};

inline constexpr std::pair<InitPolicy, std::string_view> kInitNames[] = {
    {InitPolicy::random, "random"},
    {InitPolicy::full_connected, "full"},
    {InitPolicy::sub_connected, "sub"},
};

template <typename E, std::size_t N>
std::string_view name_of(E value, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [v, n] : table)
    if (v == value) return n;
  return "?";
}

template <typename E, std::size_t N>
E parse_enum(std::string_view text, const std::pair<E, std::string_view> (&table)[N], const char* what) {
  for (const auto& [v, n] : table)
    if (n == text) return v;
  throw InvalidInput(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

inline std::string_view to_string(ExperimentKind k) { return name_of(k, kKindNames); }
inline std::string_view to_string(Strategy s) { return name_of(s, kStrategyNames); }
inline std::string_view to_string(InitPolicy p) { return name_of(p, kInitNames); }

// One experiment: a base configuration, the swept parameter, the strategies
// compared, and the Monte-Carlo budget. Everything that affects emitted bytes
// lives here; thread count does not.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::ee_vs_pmax;
  std::string id = "ee_vs_pmax";
  SystemConfig base;        // p_max is overwritten from p_max_dbw
  double p_max_dbw = 10.0;  // used when P_max is not the swept parameter
  bool m_r_tracks_m_t = false;
  std::size_t row_cap = 0;  // 0: every antenna may use all RF chains
  std::size_t col_cap = 0;  // 0: every RF chain may feed all antennas
  std::vector<double> sweep;
  std::vector<Strategy> strategies;
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  std::string output = ".";
  InitPolicy proposed_init = InitPolicy::random;
  bool warm_start = false;
  bool record_timing = false;  // wall_seconds column stays 0 unless set
  double grid_start = -90.0;   // beampattern grid, degrees
  double grid_stop = 90.0;
  double grid_step = 0.25;

  void validate() const {
    if (sweep.empty()) throw InvalidInput("experiment sweep is empty");
    if (trials == 0) throw InvalidInput("experiment needs at least one trial");
    if (strategies.empty()) throw InvalidInput("experiment runs no strategies");
    if (id.empty() || id.find_first_of("/\\,\n") != std::string::npos)
      throw InvalidInput("experiment id must be a plain file stem");
    for (double v : sweep)
      if ((kind == ExperimentKind::ee_vs_nrf || kind == ExperimentKind::ee_vs_mt) &&
          (v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v))))
        throw InvalidInput("array-size sweeps take positive integers");
    for (double v : sweep) config_for(v).validate();
  }

  // The system configuration at one sweep point.
  SystemConfig config_for(double sweep_value) const {
    SystemConfig cfg = base;
    cfg.p_max = dbw_to_watts(p_max_dbw);
    switch (kind) {
      case ExperimentKind::ee_vs_pmax:
      case ExperimentKind::oracle_gap: cfg.p_max = dbw_to_watts(sweep_value); break;
      case ExperimentKind::ee_vs_nrf: cfg.n_rf = static_cast<std::size_t>(sweep_value); break;
      case ExperimentKind::ee_vs_mt: cfg.m_t = static_cast<std::size_t>(sweep_value); break;
      case ExperimentKind::beampattern: break;
    }
    if (m_r_tracks_m_t) cfg.m_r = cfg.m_t;
    cfg.row_caps.assign(cfg.m_t, row_cap ? std::min(row_cap, cfg.n_rf) : cfg.n_rf);
    cfg.col_caps.assign(cfg.n_rf, col_cap ? std::min(col_cap, cfg.m_t) : cfg.m_t);
    return cfg;
  }
};

// Desk-scale defaults per experiment kind.
inline ExperimentSpec default_spec(ExperimentKind kind) {
  using S = Strategy;
  ExperimentSpec s;
  s.kind = kind;
  s.id = std::string(to_string(kind));
  s.base = make_config(16, 16, 4, 1);
  switch (kind) {
    case ExperimentKind::ee_vs_pmax:
      s.sweep = {-10, -5, 0, 5, 10};
      s.strategies = {S::proposed, S::full_digital, S::full_connected_ahp, S::sub_connected_ahp, S::random_init_only};
      break;
    case ExperimentKind::ee_vs_nrf:
      s.sweep = {2, 4, 8};
      s.strategies = {S::proposed, S::full_digital, S::full_connected_ahp, S::sub_connected_ahp};
      break;
    case ExperimentKind::ee_vs_mt:
      s.base.l_s = 2;
      s.m_r_tracks_m_t = true;
      s.sweep = {8, 12, 16};
      s.strategies = {S::proposed, S::full_digital, S::full_connected_ahp, S::sub_connected_ahp};
      break;
    case ExperimentKind::beampattern:
      s.base = make_config(64, 64, 2, 1);
      s.p_max_dbw = -20.0;
      s.sweep = {50.0};
      s.trials = 1;
      s.strategies = {S::proposed, S::full_digital};
      break;
    case ExperimentKind::oracle_gap:
      s.base = make_config(4, 64, 2, 1);
      s.sweep = {0, 5, 10};
      s.trials = 50;
      s.strategies = {S::proposed, S::exhaustive};
      break;
  }
  return s;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidInput("'" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw InvalidInput("'" + key + "' expects a nonnegative integer, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidInput("'" + key + "' expects true/false, got '" + v + "'");
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

// Applies one `key = value` setting. `experiment` is handled by the loader.
inline void apply_setting(ExperimentSpec& s, const std::string& key, const std::string& value) {
  using namespace detail;
  auto size = [&] { return static_cast<std::size_t>(to_u64(key, value)); };
  if (key == "id") s.id = value;
  else if (key == "m_t") s.base.m_t = size();
  else if (key == "m_r") {
    s.m_r_tracks_m_t = value == "auto";
    if (!s.m_r_tracks_m_t) s.base.m_r = size();
  }
  else if (key == "n_rf") s.base.n_rf = size();
  else if (key == "l_s") s.base.l_s = size();
  else if (key == "sigma2") s.base.sigma2 = to_double(key, value);
  else if (key == "p_max_dbw") s.p_max_dbw = to_double(key, value);
  else if (key == "p_rf") s.base.p_rf = to_double(key, value);
  else if (key == "p_ps") s.base.p_ps = to_double(key, value);
  else if (key == "p_sw") s.base.p_sw = to_double(key, value);
  else if (key == "p_o") s.base.p_o = to_double(key, value);
  else if (key == "row_cap") s.row_cap = size();
  else if (key == "col_cap") s.col_cap = size();
  else if (key == "eps_in") s.base.eps_in = to_double(key, value);
  else if (key == "eps_dinkelbach") s.base.eps_dinkelbach = to_double(key, value);
  else if (key == "sweep") {
    s.sweep.clear();
    for (const auto& v : split_list(value)) s.sweep.push_back(to_double(key, v));
  } else if (key == "strategies") {
    s.strategies.clear();
    for (const auto& v : split_list(value)) s.strategies.push_back(parse_enum(v, kStrategyNames, "strategy"));
  } else if (key == "trials") s.trials = size();
  else if (key == "master_seed") s.master_seed = to_u64(key, value);
  else if (key == "output") s.output = value;
  else if (key == "proposed_init") s.proposed_init = parse_enum(value, kInitNames, "init policy");
  else if (key == "warm_start") s.warm_start = to_bool(key, value);
  else if (key == "record_timing") s.record_timing = to_bool(key, value);
  else if (key == "grid_start") s.grid_start = to_double(key, value);
  else if (key == "grid_stop") s.grid_stop = to_double(key, value);
  else if (key == "grid_step") s.grid_step = to_double(key, value);
  else throw InvalidInput("unknown setting '" + key + "'");
}

// Ordered key/value echo of a spec; feeding it back through apply_setting
// reproduces the spec.
inline std::vector<std::pair<std::string, std::string>> to_settings(const ExperimentSpec& s) {
  using detail::format_double;
  auto join = [](const auto& items, auto fmt) {
    std::string out;
    for (const auto& it : items) out += (out.empty() ? "" : ",") + fmt(it);
    return out;
  };
  return {
      {"experiment", std::string(to_string(s.kind))},
      {"id", s.id},
      {"m_t", std::to_string(s.base.m_t)},
      {"m_r", s.m_r_tracks_m_t ? "auto" : std::to_string(s.base.m_r)},
      {"n_rf", std::to_string(s.base.n_rf)},
      {"l_s", std::to_string(s.base.l_s)},
      {"sigma2", format_double(s.base.sigma2)},
      {"p_max_dbw", format_double(s.p_max_dbw)},
      {"p_rf", format_double(s.base.p_rf)},
      {"p_ps", format_double(s.base.p_ps)},
      {"p_sw", format_double(s.base.p_sw)},
      {"p_o", format_double(s.base.p_o)},
      {"row_cap", std::to_string(s.row_cap)},
      {"col_cap", std::to_string(s.col_cap)},
      {"eps_in", format_double(s.base.eps_in)},
      {"eps_dinkelbach", format_double(s.base.eps_dinkelbach)},
      {"sweep", join(s.sweep, [](double v) { return format_double(v); })},
      {"strategies", join(s.strategies, [](Strategy v) { return std::string(to_string(v)); })},
      {"trials", std::to_string(s.trials)},
      {"master_seed", std::to_string(s.master_seed)},
      {"output", s.output},
      {"proposed_init", std::string(to_string(s.proposed_init))},
      {"warm_start", s.warm_start ? "true" : "false"},
      {"record_timing", s.record_timing ? "true" : "false"},
      {"grid_start", format_double(s.grid_start)},
      {"grid_stop", format_double(s.grid_stop)},
      {"grid_step", format_double(s.grid_step)},
  };
}

inline std::pair<std::string, std::string> split_assignment(const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw InvalidInput("expected key = value, got '" + line + "'");
  return {detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1))};
}

// Parses a spec from `key = value` lines ('#' starts a comment). The
// `experiment` key selects the defaults every other key then overrides.
inline ExperimentSpec parse_spec(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      pairs.push_back(split_assignment(line));
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  ExperimentKind kind = ExperimentKind::ee_vs_pmax;
  for (const auto& [k, v] : pairs)
    if (k == "experiment") kind = parse_enum(v, kKindNames, "experiment kind");
  ExperimentSpec spec = default_spec(kind);
  for (const auto& [k, v] : pairs)
    if (k != "experiment") apply_setting(spec, k, v);
  return spec;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open spec file '" + path + "'");
  return parse_spec(in);
}

inline std::string format_spec(const ExperimentSpec& s) {
  std::string out;
  for (const auto& [k, v] : to_settings(s)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace fahp::harness
