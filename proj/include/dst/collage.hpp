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

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "dst/dataset.hpp"
#include "dst/image.hpp"

namespace dst {

inline constexpr std::int64_t kDefaultTinyArea = 100;

struct CanvasSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const CanvasSize&, const CanvasSize&) = default;
};

/// Grid side length for a component count: 1, 2 or 3. Throws
/// InvalidArgument for any k outside {1, 4, 9}.
int grid_side(int k);

struct CellAssignment {
  ImageId source_image_id{};
  /// sqrt(k); the component is shrunk by exactly this factor.
  int factor = 1;
  int offset_x = 0;
  int offset_y = 0;
  int source_width = 0;
  int source_height = 0;

  double scale() const { return 1.0 / factor; }
  friend bool operator==(const CellAssignment&, const CellAssignment&) = default;
};

/// Cells are row-major over a sqrt(k) x sqrt(k) grid.
struct CollagePlan {
  int k = 1;
  CanvasSize canvas;
  std::vector<CellAssignment> cells;

  int side() const { return grid_side(k); }
  int cell_width() const { return canvas.width / side(); }
  int cell_height() const { return canvas.height / side(); }
};

/// Smallest canvas holding every source at full size, rounded up so that
/// both dimensions divide by sqrt(k).
CanvasSize fit_canvas(std::span<const ImageRecord* const> sources, int k);

/// Assigns sources to cells in the order given. Every source must fit inside
/// the canvas and the canvas must divide evenly into cells.
CollagePlan plan_collage(std::span<const ImageRecord* const> sources, int k,
                         CanvasSize canvas);
CollagePlan plan_collage(std::span<const ImageRecord> sources, int k,
                         CanvasSize canvas);

/// Shrinks each box by the cell factor and moves it to the cell origin.
/// Input order is kept; no filtering.
std::vector<InstanceAnnotation> transform_annotations(
    std::span<const InstanceAnnotation> annotations, const CellAssignment& cell);
std::vector<InstanceAnnotation> transform_annotations(
    const ImageRecord& source, const CellAssignment& cell);

struct TinyFilterResult {
  std::vector<InstanceAnnotation> kept;
  std::size_t dropped = 0;
};

/// Drops boxes with area strictly below min_area pixels^2.
TinyFilterResult filter_tiny(std::vector<InstanceAnnotation> annotations,
                             std::int64_t min_area = kDefaultTinyArea);

struct CollageResult {
  ImageBuffer pixels;
  /// Transformed boxes in cell order. image_id still names the source image.
  std::vector<InstanceAnnotation> annotations;
  std::size_t dropped_tiny = 0;
};

using PixelMap = std::unordered_map<ImageId, const ImageBuffer*>;
using AnnotationMap =
    std::unordered_map<ImageId, std::vector<InstanceAnnotation>>;

/// Composes the collage: a zero canvas where each cell receives its source
/// subsampled with nearest-neighbor index src = dst * sqrt(k). Sources with no
/// entry in `annotations` contribute no boxes.
CollageResult compose_collage(const CollagePlan& plan, const PixelMap& images,
                              const AnnotationMap& annotations,
                              bool tiny_filter_on,
                              std::int64_t min_area = kDefaultTinyArea);

}  // namespace dst
