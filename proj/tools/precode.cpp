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

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fahp/harness/experiment.hpp"
#include "fahp/harness/io.hpp"
#include "fahp/version.hpp"

namespace {

using namespace fahp::harness;

struct CommonFlags {
  std::vector<std::string> overrides;
  std::string out;
  std::size_t threads = 0;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--override,-o", f.overrides, "key=value setting applied after the spec file")->take_all();
  cmd->add_option("--out", f.out, "output directory (default: the spec's output key)");
  cmd->add_option("--threads,-j", f.threads, "worker threads (default: hardware concurrency)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_flag("--quiet,-q", f.quiet, "suppress the summary table");
}

void print_summary(const ExperimentOutput& out) {
  std::printf("%-20s %12s %6s %6s %14s %12s\n", "strategy", "sweep", "n", "fail", "mean_ee", "stderr");
  for (const SummaryEntry& s : out.summary)
    std::printf("%-20s %12.6g %6zu %6zu %14.6g %12.3g\n", s.strategy.c_str(), s.sweep_value, s.n, s.failures,
                s.mean_ee, s.stderr_ee);
}

int execute(ExperimentSpec spec, const CommonFlags& f) {
  for (const std::string& o : f.overrides) {
    const auto [k, v] = split_assignment(o);
    if (k == "experiment") throw fahp::InvalidInput("the experiment kind cannot be overridden");
    apply_setting(spec, k, v);
  }
  if (f.seed) spec.master_seed = *f.seed;
  if (!f.out.empty()) spec.output = f.out;
  spec.validate();
  std::size_t threads = f.threads ? f.threads : std::max(1u, std::thread::hardware_concurrency());
  const ExperimentOutput out = run_experiment(spec, threads);
  const auto written = write_outputs(spec, out, spec.output);
  if (!f.quiet) print_summary(out);
  for (const auto& p : written) std::cerr << "wrote " << p.string() << '\n';
  std::size_t failures = 0;
  for (const ResultRow& r : out.rows) failures += r.ok() ? 0 : 1;
  if (failures) std::cerr << failures << " row(s) recorded an error\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient hybrid precoding experiments", "precode"};
  app.set_version_flag("--version", std::string(fahp::kVersion));
  app.require_subcommand(1);

  CommonFlags run_flags, gap_flags, beam_flags;
  std::string spec_file;
  auto* run = app.add_subcommand("run", "run the experiment described by a spec file");
  run->add_option("spec", spec_file, "key = value spec file")->required()->check(CLI::ExistingFile);
  add_common(run, run_flags);

  auto* gap = app.add_subcommand("oracle-gap", "compare MA-FAHP with exhaustive search on small arrays");
  add_common(gap, gap_flags);

  auto* beam = app.add_subcommand("beampattern", "beam patterns on a single-path channel");
  add_common(beam, beam_flags);

  std::string kind_name;
  auto* tmpl = app.add_subcommand("template", "print the default spec for an experiment kind");
  tmpl->add_option("kind", kind_name, "ee_vs_pmax, ee_vs_nrf, ee_vs_mt, beampattern or oracle_gap")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return execute(load_spec(spec_file), run_flags);
    if (*gap) return execute(default_spec(ExperimentKind::oracle_gap), gap_flags);
    if (*beam) return execute(default_spec(ExperimentKind::beampattern), beam_flags);
    if (*tmpl) {
      std::cout << format_spec(default_spec(parse_enum(kind_name, kKindNames, "experiment kind")));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "precode: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
