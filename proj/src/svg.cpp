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

#include "dst/svg.hpp"

#include <algorithm>
#include <cmath>

#include "dst/controller.hpp"
#include "dst/types.hpp"

namespace dst {

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 400;
constexpr double kLeft = 60;
constexpr double kRight = 160;
constexpr double kTop = 40;
constexpr double kBottom = 40;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  return format_real(std::round(v * 100.0) / 100.0);
}

void open(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title)
      << "</text>\n";
}

void axes(std::ostream& out, double x0, double x1, double y0, double y1) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text,
                   const char* anchor) {
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y)
        << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << text
        << "</text>\n";
  };
  label(kLeft, kHeight - kBottom + 16, format_real(x0), "start");
  label(kLeft + pw, kHeight - kBottom + 16, format_real(x1), "end");
  label(kLeft - 6, kHeight - kBottom, format_real(y0), "end");
  label(kLeft - 6, kTop + 10, format_real(y1), "end");
}

}  // namespace

void write_line_plot_svg(std::ostream& out, const std::string& title,
                         const std::vector<double>& xs,
                         const std::vector<SvgSeries>& series, double y_min,
                         double y_max) {
  if (!(y_max > y_min)) throw InvalidArgument("empty y range");
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const double x0 = xs.empty() ? 0.0 : xs.front();
  const double x1 = xs.empty() ? 1.0 : std::max(xs.back(), x0 + 1.0);
  open(out, title);
  axes(out, x0, x1, y_min, y_max);
  int legend_row = 0;
  for (const SvgSeries& s : series) {
    const std::size_t n = std::min(xs.size(), s.ys.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    out << "<polyline fill=\"none\" stroke=\"" << escape(s.color)
        << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < n; i += stride) {
      const double y = std::clamp(s.ys[i], y_min, y_max);
      out << num(kLeft + (xs[i] - x0) / (x1 - x0) * pw) << ','
          << num(kTop + (y_max - y) / (y_max - y_min) * ph) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 14 + 18 * legend_row++;
    out << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly - 4
        << "\" x2=\"" << kWidth - kRight + 30 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_histogram_svg(std::ostream& out, const std::string& title,
                         const std::vector<double>& values, int bins, double lo,
                         double hi, std::optional<double> marker) {
  if (bins < 1) throw InvalidArgument("bins must be >= 1");
  if (!(hi > lo)) throw InvalidArgument("empty histogram range");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    const double t = (v - lo) / (hi - lo) * bins;
    const int b = std::clamp(static_cast<int>(std::floor(t)), 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const std::size_t peak =
      std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end()));
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  open(out, title);
  axes(out, lo, hi, 0, static_cast<double>(peak));
  const double bw = pw / bins;
  for (int b = 0; b < bins; ++b) {
    const double h = ph * static_cast<double>(counts[b]) / static_cast<double>(peak);
    out << "<rect x=\"" << num(kLeft + b * bw) << "\" y=\""
        << num(kTop + ph - h) << "\" width=\"" << num(bw) << "\" height=\""
        << num(h) << "\" fill=\"steelblue\" stroke=\"white\"/>\n";
  }
  if (marker) {
    const double x = kLeft + (std::clamp(*marker, lo, hi) - lo) / (hi - lo) * pw;
    out << "<line x1=\"" << num(x) << "\" y1=\"" << kTop << "\" x2=\""
        << num(x) << "\" y2=\"" << kTop + ph
        << "\" stroke=\"crimson\" stroke-dasharray=\"4 3\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace dst
