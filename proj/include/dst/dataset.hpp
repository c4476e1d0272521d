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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dst/box.hpp"
#include "dst/types.hpp"

namespace dst {

struct InstanceAnnotation {
  AnnotationId id{};
  ImageId image_id{};
  BoundingBox box;
  CategoryId category_id{};
  bool iscrowd = false;

  friend bool operator==(const InstanceAnnotation&,
                         const InstanceAnnotation&) = default;
};

struct ImageRecord {
  ImageId id{};
  int width = 0;
  int height = 0;
  std::string file_name;
  std::vector<InstanceAnnotation> annotations;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Immutable in-memory annotation set. Image order is the order of the
/// source document.
class Dataset {
 public:
  Dataset() = default;
  /// Validates id uniqueness and annotation ownership; throws
  /// InvalidArgument on violation.
  Dataset(std::vector<ImageRecord> images,
          std::map<CategoryId, std::string> categories,
          std::size_t dropped_degenerate = 0);

  std::span<const ImageRecord> images() const { return images_; }
  const std::map<CategoryId, std::string>& categories() const {
    return categories_;
  }
  std::size_t size() const { return images_.size(); }
  bool empty() const { return images_.empty(); }
  std::size_t instance_count() const { return instance_count_; }
  /// Annotations dropped at ingestion for non-positive extent.
  std::size_t dropped_degenerate() const { return dropped_degenerate_; }

  const ImageRecord* find(ImageId id) const;
  const ImageRecord& at(ImageId id) const;
  std::vector<ImageId> image_ids() const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.images_ == b.images_ && a.categories_ == b.categories_ &&
           a.dropped_degenerate_ == b.dropped_degenerate_;
  }

 private:
  std::vector<ImageRecord> images_;
  std::map<CategoryId, std::string> categories_;
  std::unordered_map<ImageId, std::size_t> index_;
  std::size_t instance_count_ = 0;
  std::size_t dropped_degenerate_ = 0;
};

/// Reads a COCO-format annotation document. Boxes come from `bbox` as
/// [x, y, w, h]; the stored `area` is ignored. Boxes are clamped to the
/// image and annotations with non-positive extent are dropped and counted.
///
/// Throws IoError if the file cannot be read and ParseError (naming the
/// offending record) for malformed content.
Dataset load_annotations(const std::filesystem::path& path);

/// Same as load_annotations but from an in-memory document.
Dataset parse_annotations(std::string_view document);

/// Writes a COCO-format document (images, annotations, categories). When
/// `provenance` has an entry for an image it is written as that image's
/// `source_ids` array.
void write_annotations(
    const std::filesystem::path& path, const Dataset& ds,
    const std::map<ImageId, std::vector<ImageId>>& provenance = {});

struct ScaleStats {
  std::size_t images = 0;
  std::size_t instances = 0;
  PerScale<std::size_t> instance_count{};
  PerScale<double> instance_share{};
  /// Fraction of images holding at least one instance of the class.
  PerScale<double> image_coverage{};
};

/// Per-scale instance shares and image coverage. Crowd regions count.
/// Throws InvalidArgument("empty dataset") when there are no images or no
/// instances.
ScaleStats dataset_scale_stats(const Dataset& ds);

}  // namespace dst
