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

#include <cstdint>

#include "dst/types.hpp"

namespace dst {

// Area thresholds of the COCO scale protocol, in pixels^2.
inline constexpr std::int64_t kSmallAreaLimit = 32 * 32;
inline constexpr std::int64_t kMediumAreaLimit = 96 * 96;

/// Axis-aligned box with continuous coordinates.
///
/// Coordinates are stored as exact fixed-point rationals: every value equals
/// `ticks / (kTicksPerPixel * subdivision)` pixels. Ingested boxes have
/// subdivision 1; shrinking a box by an integer factor f multiplies the
/// subdivision by f and leaves the extents untouched, so area and aspect ratio
/// transform without rounding.
class BoundingBox {
 public:
  static constexpr std::int64_t kTicksPerPixel = std::int64_t{1} << 20;

  constexpr BoundingBox() = default;
  constexpr BoundingBox(std::int64_t x, std::int64_t y, std::int64_t w,
                        std::int64_t h, std::int32_t subdivision = 1)
      : x_(x), y_(y), w_(w), h_(h), subdivision_(subdivision) {}

  /// Quantizes pixel coordinates to the tick grid (2^-20 px). Throws
  /// InvalidArgument on non-finite input.
  static BoundingBox from_pixels(double x, double y, double w, double h);

  double x() const;
  double y() const;
  double width() const;
  double height() const;
  double area() const;

  std::int64_t x_ticks() const { return x_; }
  std::int64_t y_ticks() const { return y_; }
  std::int64_t w_ticks() const { return w_; }
  std::int64_t h_ticks() const { return h_; }
  std::int32_t subdivision() const { return subdivision_; }
  /// Ticks per pixel at this box's subdivision.
  std::int64_t denominator() const { return kTicksPerPixel * subdivision_; }

  bool valid() const { return w_ > 0 && h_ > 0 && subdivision_ > 0; }

  /// Exact three-way comparison of area() against an integer pixel area:
  /// negative, zero or positive.
  int compare_area(std::int64_t pixels2) const;

  /// Maps the box through p -> p / factor + offset on both axes.
  BoundingBox shrink_and_translate(int factor, int offset_x,
                                   int offset_y) const;

  /// Intersection with [0, width] x [0, height]. May be degenerate.
  BoundingBox clamped(int width, int height) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  std::int64_t x_ = 0;
  std::int64_t y_ = 0;
  std::int64_t w_ = 0;
  std::int64_t h_ = 0;
  std::int32_t subdivision_ = 1;
};

ScaleClass classify_scale(const BoundingBox& box);

}  // namespace dst
