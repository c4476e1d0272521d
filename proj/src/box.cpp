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

#include "dst/box.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dst {

namespace {

std::int64_t to_ticks(double v) {
  if (!std::isfinite(v)) {
    throw InvalidArgument("box coordinate is not finite");
  }
  const double scaled = v * static_cast<double>(BoundingBox::kTicksPerPixel);
  if (std::fabs(scaled) > 0x1p62) {
    throw InvalidArgument("box coordinate out of range");
  }
  return std::llround(scaled);
}

}  // namespace

Mode parse_mode(std::string_view s) {
  if (s == "regular") return Mode::kRegular;
  if (s == "collage") return Mode::kCollage;
  throw ParseError("unknown mode '" + std::string(s) + "'");
}

BoundingBox BoundingBox::from_pixels(double x, double y, double w, double h) {
  return BoundingBox(to_ticks(x), to_ticks(y), to_ticks(w), to_ticks(h), 1);
}

double BoundingBox::x() const {
  return static_cast<double>(x_) / static_cast<double>(denominator());
}
double BoundingBox::y() const {
  return static_cast<double>(y_) / static_cast<double>(denominator());
}
double BoundingBox::width() const {
  return static_cast<double>(w_) / static_cast<double>(denominator());
}
double BoundingBox::height() const {
  return static_cast<double>(h_) / static_cast<double>(denominator());
}
double BoundingBox::area() const { return width() * height(); }

int BoundingBox::compare_area(std::int64_t pixels2) const {
  const __int128 d = denominator();
  const __int128 lhs = static_cast<__int128>(w_) * h_;
  const __int128 rhs = static_cast<__int128>(pixels2) * d * d;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

BoundingBox BoundingBox::shrink_and_translate(int factor, int offset_x,
                                              int offset_y) const {
  if (factor < 1) throw InvalidArgument("shrink factor must be >= 1");
  const std::int32_t sub = subdivision_ * factor;
  const std::int64_t d = kTicksPerPixel * sub;
  return BoundingBox(x_ + offset_x * d, y_ + offset_y * d, w_, h_, sub);
}

BoundingBox BoundingBox::clamped(int width, int height) const {
  const std::int64_t d = denominator();
  const std::int64_t max_x = width * d;
  const std::int64_t max_y = height * d;
  const std::int64_t x0 = std::clamp<std::int64_t>(x_, 0, max_x);
  const std::int64_t y0 = std::clamp<std::int64_t>(y_, 0, max_y);
  const std::int64_t x1 = std::clamp<std::int64_t>(x_ + w_, 0, max_x);
  const std::int64_t y1 = std::clamp<std::int64_t>(y_ + h_, 0, max_y);
  return BoundingBox(x0, y0, x1 - x0, y1 - y0, subdivision_);
}

ScaleClass classify_scale(const BoundingBox& box) {
  if (box.compare_area(kSmallAreaLimit) < 0) return ScaleClass::kSmall;
  if (box.compare_area(kMediumAreaLimit) < 0) return ScaleClass::kMedium;
  return ScaleClass::kLarge;
}

}  // namespace dst
