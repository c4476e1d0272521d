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

#include "dst/image_io.hpp"

#include <cstring>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "dst/types.hpp"

namespace dst {

namespace {

cv::Mat as_mat(const ImageBuffer& image) {
  // OpenCV only reads through this header.
  return cv::Mat(image.height(), image.width(), CV_8UC(image.channels()),
                 const_cast<std::uint8_t*>(image.data().data()),
                 image.row_bytes());
}

}  // namespace

ImageBuffer read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("image file not found: '" + path.string() + "'");
  }
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) {
    throw IoError("cannot decode image '" + path.string() + "'");
  }
  if (mat.depth() != CV_8U) {
    throw IoError("unsupported bit depth in '" + path.string() + "'");
  }
  ImageBuffer out(mat.cols, mat.rows, mat.channels());
  for (int y = 0; y < mat.rows; ++y) {
    std::memcpy(out.row(y).data(), mat.ptr(y), out.row_bytes());
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  std::vector<std::uint8_t> bytes;
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 3};
  if (!cv::imencode(".png", as_mat(image), bytes, params)) {
    throw IoError("PNG encoding failed");
  }
  return bytes;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  const std::vector<std::uint8_t> bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

ComposedCollage compose_from_files(const Dataset& ds,
                                   std::span<const ImageId> group, int k,
                                   const std::filesystem::path& images_dir,
                                   bool tiny_filter, ImageId collage_id,
                                   const std::string& file_name,
                                   std::int64_t first_annotation_id) {
  std::vector<const ImageRecord*> sources;
  std::vector<ImageBuffer> pixels;
  pixels.reserve(group.size());
  PixelMap pm;
  AnnotationMap am;
  for (ImageId id : group) {
    const ImageRecord& rec = ds.at(id);
    sources.push_back(&rec);
    pixels.push_back(read_image(images_dir / rec.file_name));
    pm[id] = &pixels.back();
    am[id] = rec.annotations;
  }
  ComposedCollage out;
  out.plan = plan_collage(sources, k, fit_canvas(sources, k));
  out.result = compose_collage(out.plan, pm, am, tiny_filter);
  out.record = ImageRecord{collage_id, out.plan.canvas.width,
                           out.plan.canvas.height, file_name, {}};
  std::int64_t next_id = first_annotation_id;
  for (InstanceAnnotation a : out.result.annotations) {
    if (a.iscrowd) continue;
    a.id = AnnotationId{next_id++};
    a.image_id = collage_id;
    out.record.annotations.push_back(a);
  }
  return out;
}

}  // namespace dst
