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

// Experiment configuration: a flat key/value document with [spec], [grid]
// and [envelope] tables in a TOML-compatible grammar, or the same structure
// as JSON.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crem/covariance.hpp"
#include "crem/field.hpp"

namespace crem::runner {

/// Syntax error; line and column are 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// A semantically invalid configuration; names the offending field.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parses the TOML subset used by configs: comments, [table] headers,
/// key = value with strings, integers (decimal or 0x), floats, booleans and
/// single-level arrays. Returns an object of objects.
nlohmann::json parse_toml_subset(std::string_view text);

inline const std::vector<std::string> kExperimentKinds{
    "thermo", "sample", "kl", "kl-sweep", "hardness", "steep-rate", "brw"};

struct ExperimentConfig {
  std::string experiment;
  std::optional<std::uint64_t> seed;
  int workers = 0;  // 0: CREM_WORKERS or hardware threads
  std::string out_dir = ".";
  std::string output;  // file stem; defaults to the experiment kind
  std::string format = "csv";
  bool plot = false;
  int dense_cap = kDefaultDenseCap;

  // Covariance profile: a named profile or explicit breakpoints and slopes.
  std::string spec_name;
  std::vector<double> breakpoints;
  std::vector<double> slopes;

  std::vector<double> beta;
  std::vector<int> N;
  std::vector<int> M;
  std::vector<double> epsilon;  // block schedule in place of M
  std::vector<int> K;           // empty: select automatically
  std::vector<double> z;        // empty: select automatically
  int reals = 200;
  int trials = 1000;
  int reps = 10;
  std::uint64_t budget = 10'000'000;
  std::vector<std::uint64_t> record;
  std::string algorithm = "sampler";

  double gap_factor = 2.0;
  double sigma = 3.0;

  CovarianceSpec covariance() const;
  bool has_spec() const { return !spec_name.empty() || !breakpoints.empty(); }
  std::string stem() const { return output.empty() ? experiment : output; }

  /// Every field that influences results (not workers, paths or format).
  nlohmann::json canonical() const;
  /// Full echo, including run-time settings.
  nlohmann::json to_json() const;
  /// FNV-1a of canonical().dump(), as 16 hex digits.
  std::string hash() const;

  /// Throws ValidationError naming the first bad field.
  void validate() const;
};

/// Builds a config from a parsed document; unknown keys are errors with a
/// closest-match suggestion. Does not validate.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// JSON when the text starts with '{', the TOML subset otherwise. A
/// manifest (an object with a "config" member) is accepted in place of a
/// config.
ExperimentConfig parse_config_text(std::string_view text);

/// Reads, parses, applies defaults and validates.
ExperimentConfig parse_config(const std::string& path);

/// Parses a decimal or 0x-prefixed unsigned 64-bit value.
std::uint64_t parse_seed(std::string_view text);

/// Edit distance, for "did you mean" suggestions.
std::size_t levenshtein(std::string_view a, std::string_view b);

}  // namespace crem::runner
