// Copyright 2026 The dst Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dst {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> ys;
};

/// Line plot with a shared x axis. Series longer than 2000 points are
/// decimated by striding.
void write_line_plot_svg(std::ostream& out, const std::string& title,
                         const std::vector<double>& xs,
                         const std::vector<SvgSeries>& series, double y_min,
                         double y_max);

/// Histogram of values over [lo, hi] with a vertical marker line at
/// `marker` if given. Values outside the range go to the edge bins.
void write_histogram_svg(std::ostream& out, const std::string& title,
                         const std::vector<double>& values, int bins, double lo,
                         double hi, std::optional<double> marker);

}  // namespace dst
