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

#include "dst/dataset.hpp"

#include <unordered_set>

namespace dst {

Dataset::Dataset(std::vector<ImageRecord> images,
                 std::map<CategoryId, std::string> categories,
                 std::size_t dropped_degenerate)
    : images_(std::move(images)),
      categories_(std::move(categories)),
      dropped_degenerate_(dropped_degenerate) {
  std::unordered_set<AnnotationId> annotation_ids;
  index_.reserve(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const ImageRecord& img = images_[i];
    if (img.width <= 0 || img.height <= 0) {
      throw InvalidArgument("image " + std::to_string(raw(img.id)) +
                            ": non-positive dimensions");
    }
    if (!index_.emplace(img.id, i).second) {
      throw InvalidArgument("duplicate image id " + std::to_string(raw(img.id)));
    }
    for (const InstanceAnnotation& a : img.annotations) {
      if (a.image_id != img.id) {
        throw InvalidArgument("annotation " + std::to_string(raw(a.id)) +
                              " is not owned by image " +
                              std::to_string(raw(img.id)));
      }
      if (!annotation_ids.insert(a.id).second) {
        throw InvalidArgument("duplicate annotation id " +
                              std::to_string(raw(a.id)));
      }
    }
    instance_count_ += img.annotations.size();
  }
}

const ImageRecord* Dataset::find(ImageId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &images_[it->second];
}

const ImageRecord& Dataset::at(ImageId id) const {
  const ImageRecord* rec = find(id);
  if (rec == nullptr) {
    throw InvalidArgument("unknown image id " + std::to_string(raw(id)));
  }
  return *rec;
}

std::vector<ImageId> Dataset::image_ids() const {
  std::vector<ImageId> ids;
  ids.reserve(images_.size());
  for (const ImageRecord& img : images_) ids.push_back(img.id);
  return ids;
}

ScaleStats dataset_scale_stats(const Dataset& ds) {
  if (ds.empty() || ds.instance_count() == 0) {
    throw InvalidArgument("empty dataset");
  }
  ScaleStats stats;
  stats.images = ds.size();
  PerScale<std::size_t> images_with{};
  for (const ImageRecord& img : ds.images()) {
    PerScale<bool> seen{};
    for (const InstanceAnnotation& a : img.annotations) {
      const std::size_t s = index(classify_scale(a.box));
      ++stats.instance_count[s];
      seen[s] = true;
    }
    for (std::size_t s = 0; s < kNumScales; ++s) {
      if (seen[s]) ++images_with[s];
    }
  }
  for (std::size_t s = 0; s < kNumScales; ++s) stats.instances += stats.instance_count[s];
  for (std::size_t s = 0; s < kNumScales; ++s) {
    stats.instance_share[s] = static_cast<double>(stats.instance_count[s]) /
                              static_cast<double>(stats.instances);
    stats.image_coverage[s] = static_cast<double>(images_with[s]) /
                              static_cast<double>(stats.images);
  }
  return stats;
}

}  // namespace dst
