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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fahp/harness/experiment.hpp"
#include "fahp/version.hpp"

namespace fahp::harness {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader =
    "experiment,strategy,sweep_value,trial,seed,se,pt,pc,ee,while_loops,opu_evaluations,wall_seconds,error";

namespace detail {

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

inline void finish(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace detail

inline void write_csv(std::ostream& out, const ExperimentSpec& spec, const std::vector<ResultRow>& rows) {
  out << "# " << kVersion << '\n';
  for (const auto& [k, v] : to_settings(spec)) out << "# " << k << " = " << v << '\n';
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.experiment << ',' << r.strategy << ',' << detail::fmt_g(r.sweep_value) << ',' << r.trial << ','
        << r.seed << ',' << detail::fmt_g(r.se) << ',' << detail::fmt_g(r.pt) << ',' << detail::fmt_g(r.pc) << ','
        << detail::fmt_g(r.ee) << ',' << r.while_loops << ',' << r.opu_evaluations << ','
        << detail::fmt_g(r.wall_seconds) << ',' << r.error << '\n';
  }
}

inline std::vector<ResultRow> parse_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw IoError("unexpected CSV header: " + line);
      header = true;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 13) throw IoError("malformed CSV row: " + line);
    try {
      ResultRow r;
      r.experiment = f[0];
      r.strategy = f[1];
      r.sweep_value = std::stod(f[2]);
      r.trial = std::stoull(f[3]);
      r.seed = std::stoull(f[4]);
      r.se = std::stod(f[5]);
      r.pt = std::stod(f[6]);
      r.pc = std::stod(f[7]);
      r.ee = std::stod(f[8]);
      r.while_loops = std::stoull(f[9]);
      r.opu_evaluations = std::stoull(f[10]);
      r.wall_seconds = std::stod(f[11]);
      r.error = f[12];
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError("malformed CSV row: " + line);
    }
  }
  if (!header) throw IoError("CSV has no header");
  return rows;
}

inline nlohmann::ordered_json summary_json(const ExperimentSpec& spec, const ExperimentOutput& out) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [k, v] : to_settings(spec)) s[k] = v;
  j["spec"] = s;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const SummaryEntry& e : out.summary) {
    summary.push_back({{"strategy", e.strategy},
                       {"sweep_value", e.sweep_value},
                       {"n", e.n},
                       {"failures", e.failures},
                       {"mean_ee", num(e.mean_ee)},
                       {"stderr_ee", num(e.stderr_ee)},
                       {"mean_se", num(e.mean_se)},
                       {"mean_pc", num(e.mean_pc)},
                       {"mean_pt", num(e.mean_pt)},
                       {"mean_while_loops", num(e.mean_while_loops)}});
  }
  j["summary"] = summary;
  if (!out.beams.empty()) {
    nlohmann::ordered_json beams = nlohmann::ordered_json::array();
    for (const BeamRecord& b : out.beams) {
      beams.push_back({{"strategy", b.strategy},
                       {"sweep_value", b.sweep_value},
                       {"trial", b.trial},
                       {"peak_angle", b.lobe.peak_angle},
                       {"peak_db", num(b.lobe.peak_db)},
                       {"highest_sidelobe_db", num(b.lobe.highest_sidelobe_db)},
                       {"main_to_sidelobe_db", num(b.lobe.main_to_sidelobe_db)}});
    }
    j["beams"] = beams;
  }
  return j;
}

inline void write_pattern_csv(std::ostream& out, const std::vector<BeamRecord>& beams) {
  out << "strategy,sweep_value,trial,angle_deg,gain_db\n";
  for (const BeamRecord& b : beams)
    for (std::size_t k = 0; k < b.pattern.angles.size(); ++k)
      out << b.strategy << ',' << detail::fmt_g(b.sweep_value) << ',' << b.trial << ','
          << detail::fmt_g(b.pattern.angles[k]) << ',' << detail::fmt_g(b.pattern.gains_db[k]) << '\n';
}

// Writes <id>.csv, <id>.summary.json and, for beam patterns, <id>.pattern.csv.
// Returns the paths written.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out,
                                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  const auto csv = dir / (spec.id + ".csv");
  auto f = detail::open_out(csv);
  write_csv(f, spec, out.rows);
  detail::finish(f, csv);
  written.push_back(csv);

  const auto js = dir / (spec.id + ".summary.json");
  auto g = detail::open_out(js);
  g << summary_json(spec, out).dump(2) << '\n';
  detail::finish(g, js);
  written.push_back(js);

  if (!out.beams.empty()) {
    const auto pat = dir / (spec.id + ".pattern.csv");
    auto p = detail::open_out(pat);
    write_pattern_csv(p, out.beams);
    detail::finish(p, pat);
    written.push_back(pat);
  }
  return written;
}

}  // namespace fahp::harness
