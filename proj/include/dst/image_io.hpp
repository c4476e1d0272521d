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
#include <filesystem>
#include <span>
#include <vector>

#include "dst/collage.hpp"
#include "dst/dataset.hpp"
#include "dst/image.hpp"

namespace dst {

/// Decodes any format OpenCV understands (PNG, JPEG, ...) keeping the
/// stored channel count and order. 16-bit images are rejected.
/// Throws IoError when the file is missing or undecodable.
ImageBuffer read_image(const std::filesystem::path& path);

/// Lossless PNG encoding with fixed settings, so equal buffers give equal bytes.
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

struct ComposedCollage {
  CollagePlan plan;
  CollageResult result;
  /// The collage as a one-image record: id \`collage_id\`, non-crowd boxes
  /// renumbered from \`first_annotation_id\`.
  ImageRecord record;
};

/// Reads the k sources of \`group\` from \`images_dir\`, composes them on the
/// fitted canvas and builds the collage record. Crowd regions are left out
/// of the record. Throws IoError when a source file is missing.
ComposedCollage compose_from_files(const Dataset& ds,
                                   std::span<const ImageId> group, int k,
                                   const std::filesystem::path& images_dir,
                                   bool tiny_filter, ImageId collage_id,
                                   const std::string& file_name,
                                   std::int64_t first_annotation_id = 1);

}  // namespace dst
