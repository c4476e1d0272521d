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

#include "dst/collage.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace dst {

namespace {

int round_up(int v, int m) { return (v + m - 1) / m * m; }

// Copies one shrunk component into its cell. Rows and columns past the
// shrunk source stay as padding.
void blit_subsampled(const ImageBuffer& src, ImageBuffer& canvas,
                     const CellAssignment& cell, int cell_w, int cell_h) {
  const int f = cell.factor;
  const int ch = src.channels();
  const int out_w = std::min(cell_w, (src.width() + f - 1) / f);
  const int out_h = std::min(cell_h, (src.height() + f - 1) / f);
  for (int dy = 0; dy < out_h; ++dy) {
    const std::uint8_t* in = src.row(dy * f).data();
    std::uint8_t* out = canvas.row(cell.offset_y + dy).data() +
                        static_cast<std::size_t>(cell.offset_x) * ch;
    if (f == 1) {
      std::memcpy(out, in, static_cast<std::size_t>(out_w) * ch);
      continue;
    }
    const std::size_t step = static_cast<std::size_t>(f) * ch;
    if (ch == 3) {
      for (int dx = 0; dx < out_w; ++dx, out += 3, in += step) {
        out[0] = in[0];
        out[1] = in[1];
        out[2] = in[2];
      }
    } else {
      for (int dx = 0; dx < out_w; ++dx, out += ch, in += step) {
        std::memcpy(out, in, ch);
      }
    }
  }
}

}  // namespace

int grid_side(int k) {
  switch (k) {
    case 1:
      return 1;
    case 4:
      return 2;
    case 9:
      return 3;
    default:
      throw InvalidArgument("k must be a perfect square in {1,4,9}");
  }
}

CanvasSize fit_canvas(std::span<const ImageRecord* const> sources, int k) {
  const int side = grid_side(k);
  CanvasSize c;
  for (const ImageRecord* s : sources) {
    c.width = std::max(c.width, s->width);
    c.height = std::max(c.height, s->height);
  }
  if (c.width <= 0 || c.height <= 0) {
    throw InvalidArgument("cannot fit a canvas to zero sources");
  }
  return {round_up(c.width, side), round_up(c.height, side)};
}

CollagePlan plan_collage(std::span<const ImageRecord* const> sources, int k,
                         CanvasSize canvas) {
  const int side = grid_side(k);
  if (sources.size() != static_cast<std::size_t>(k)) {
    throw InvalidArgument("collage of k=" + std::to_string(k) + " needs " +
                          std::to_string(k) + " sources, got " +
                          std::to_string(sources.size()));
  }
  if (canvas.width <= 0 || canvas.height <= 0) {
    throw InvalidArgument("canvas dimensions must be positive");
  }
  if (canvas.width % side != 0 || canvas.height % side != 0) {
    throw InvalidArgument("canvas dimensions must be divisible by sqrt(k)");
  }
  CollagePlan plan{k, canvas, {}};
  const int cw = canvas.width / side;
  const int chh = canvas.height / side;
  plan.cells.reserve(sources.size());
  for (int i = 0; i < k; ++i) {
    const ImageRecord& src = *sources[i];
    if (src.width > canvas.width || src.height > canvas.height) {
      throw InvalidArgument("image " + std::to_string(raw(src.id)) +
                            " is larger than the canvas");
    }
    const int r = i / side;
    const int c = i % side;
    plan.cells.push_back(CellAssignment{src.id, side, c * cw, r * chh,
                                        src.width, src.height});
  }
  return plan;
}

CollagePlan plan_collage(std::span<const ImageRecord> sources, int k,
                         CanvasSize canvas) {
  std::vector<const ImageRecord*> ptrs;
  ptrs.reserve(sources.size());
  for (const ImageRecord& s : sources) ptrs.push_back(&s);
  return plan_collage(std::span<const ImageRecord* const>(ptrs), k, canvas);
}

std::vector<InstanceAnnotation> transform_annotations(
    std::span<const InstanceAnnotation> annotations,
    const CellAssignment& cell) {
  std::vector<InstanceAnnotation> out;
  out.reserve(annotations.size());
  for (const InstanceAnnotation& a : annotations) {
    InstanceAnnotation t = a;
    t.box = a.box.shrink_and_translate(cell.factor, cell.offset_x,
                                       cell.offset_y);
    out.push_back(t);
  }
  return out;
}

std::vector<InstanceAnnotation> transform_annotations(
    const ImageRecord& source, const CellAssignment& cell) {
  return transform_annotations(source.annotations, cell);
}

TinyFilterResult filter_tiny(std::vector<InstanceAnnotation> annotations,
                             std::int64_t min_area) {
  TinyFilterResult result;
  const auto tiny = [min_area](const InstanceAnnotation& a) {
    return a.box.compare_area(min_area) < 0;
  };
  const auto first_tiny =
      std::stable_partition(annotations.begin(), annotations.end(),
                            [&](const InstanceAnnotation& a) { return !tiny(a); });
  result.dropped = static_cast<std::size_t>(annotations.end() - first_tiny);
  annotations.erase(first_tiny, annotations.end());
  result.kept = std::move(annotations);
  return result;
}

CollageResult compose_collage(const CollagePlan& plan, const PixelMap& images,
                              const AnnotationMap& annotations,
                              bool tiny_filter_on, std::int64_t min_area) {
  if (plan.cells.empty()) throw InvalidArgument("collage plan has no cells");
  const int cw = plan.cell_width();
  const int chh = plan.cell_height();

  int channels = 0;
  std::vector<const ImageBuffer*> sources;
  sources.reserve(plan.cells.size());
  for (const CellAssignment& cell : plan.cells) {
    auto it = images.find(cell.source_image_id);
    if (it == images.end() || it->second == nullptr) {
      throw InvalidArgument("missing pixel buffer for image " +
                            std::to_string(raw(cell.source_image_id)));
    }
    const ImageBuffer& buf = *it->second;
    if (buf.width() != cell.source_width || buf.height() != cell.source_height) {
      throw InvalidArgument("pixel buffer of image " +
                            std::to_string(raw(cell.source_image_id)) +
                            " does not match its recorded dimensions");
    }
    if (channels == 0) channels = buf.channels();
    if (buf.channels() != channels) {
      throw InvalidArgument("collage sources have different channel counts");
    }
    sources.push_back(&buf);
  }

  CollageResult result;
  result.pixels = ImageBuffer(plan.canvas.width, plan.canvas.height, channels);
  std::vector<InstanceAnnotation> boxes;
  for (std::size_t i = 0; i < plan.cells.size(); ++i) {
    const CellAssignment& cell = plan.cells[i];
    blit_subsampled(*sources[i], result.pixels, cell, cw, chh);
    if (auto it = annotations.find(cell.source_image_id); it != annotations.end()) {
      auto moved = transform_annotations(it->second, cell);
      boxes.insert(boxes.end(), moved.begin(), moved.end());
    }
  }
  if (tiny_filter_on) {
    TinyFilterResult f = filter_tiny(std::move(boxes), min_area);
    result.annotations = std::move(f.kept);
    result.dropped_tiny = f.dropped;
  } else {
    result.annotations = std::move(boxes);
  }
  return result;
}

}  // namespace dst
