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

// Standalone SVG figures drawn from report tables.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crem/runner/table.hpp"

namespace crem::runner {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // optional error bars
  std::vector<double> hi;
  bool markers_only = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  /// Vertical marker, e.g. the hardness threshold.
  std::optional<double> marker_x;
  std::string marker_label;
  /// Dashed reference line of this slope in the plotted coordinates,
  /// anchored at the first point of the first series.
  std::optional<double> reference_slope;
  std::string reference_label;
};

/// Renders a figure; throws PlotError when there is nothing to draw.
std::string render_svg(const Figure& figure);

/// Kinds: "thermo", "kl-vs-beta", "kl-vs-M", "deviation-vs-M",
/// "steep-rate", "tau-prime-survival", "brw".
const std::vector<std::string>& plot_kinds();

/// Builds and renders the figure for `kind`. Throws MissingColumn when a
/// required column is absent and PlotError for an empty table or an unknown
/// kind.
std::string emit_plot(const Table& table, const std::string& kind);

}  // namespace crem::runner
