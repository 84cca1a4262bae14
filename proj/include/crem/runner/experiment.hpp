// Copyright 2026 The CREM Sampling Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "crem/runner/config.hpp"
#include "crem/runner/table.hpp"

namespace crem::runner {

/// "crem <version>".
std::string code_version();

struct ExperimentReport {
  std::string experiment;
  Table table;
  /// Text of the CSV "#" line: version, experiment, config hash and seed.
  std::string header;
  /// Config echo, code version, seeds, wall time, warnings and failures.
  nlohmann::json manifest;
  std::vector<std::string> warnings;
  /// Violated internal invariants; a nonempty list means a nonzero exit.
  std::vector<std::string> failures;
  /// Plot kind drawn when the config asks for one; empty if none applies.
  std::string plot_kind;

  bool ok() const { return failures.empty(); }
};

/// Runs the configured grid. Every realization seed is
/// derive_seed(seed, tag, grid_index, realization) with a per-experiment
/// tag, so results do not depend on the worker count. Capacity errors are
/// rethrown naming the grid point.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct WrittenFiles {
  std::string table;
  std::string manifest;
  std::string plot;
};

/// Writes <out_dir>/<stem>.csv (or .json), <stem>.manifest.json and, when
/// cfg.plot is set and a plot kind applies, <stem>.svg.
WrittenFiles write_report(const ExperimentReport& report, const ExperimentConfig& cfg,
                          const std::string& command_line = "");

/// The table in the configured format.
std::string render_table(const ExperimentReport& report, const std::string& format);

}  // namespace crem::runner
