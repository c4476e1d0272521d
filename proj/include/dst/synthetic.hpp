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

#include "dst/dataset.hpp"

namespace dst {

/// Instance population of one scale class in a synthetic dataset.
struct ScaleMix {
  /// Fraction of images holding at least one instance of the class.
  double coverage = 0.0;
  /// Mean instance count in images that hold the class (>= 1).
  double mean_count = 1.0;
  /// Box areas are log-uniform in [min_area, max_area).
  double min_area = 0.0;
  double max_area = 0.0;
};

struct SyntheticSpec {
  int num_images = 2000;
  int width = 1216;
  int height = 800;
  PerScale<ScaleMix> mix{};
  std::uint64_t seed = 1;

  /// Few images hold small objects: the image-level imbalance the
  /// controller is meant to correct.
  static SyntheticSpec small_starved();
  /// Instance share and image coverage close to COCO train2017
  /// (about 41% small instances; 52/71/83% image coverage).
  static SyntheticSpec coco_like();
};

/// Generates images with boxes placed inside the image bounds; aspect ratios
/// are log-uniform in [1/2, 2]. Deterministic in spec.seed.
Dataset make_synthetic_dataset(const SyntheticSpec& spec);

}  // namespace dst
