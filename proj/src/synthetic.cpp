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

#include "dst/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "dst/rng.hpp"

namespace dst {

SyntheticSpec SyntheticSpec::small_starved() {
  SyntheticSpec s;
  s.mix[index(ScaleClass::kSmall)] = {0.22, 2.0, 100.0, 1024.0};
  s.mix[index(ScaleClass::kMedium)] = {0.77, 2.2, 1024.0, 9216.0};
  s.mix[index(ScaleClass::kLarge)] = {0.61, 2.8, 9216.0, 85000.0};
  return s;
}

SyntheticSpec SyntheticSpec::coco_like() {
  SyntheticSpec s;
  s.mix[index(ScaleClass::kSmall)] = {0.52, 5.8, 16.0, 1024.0};
  s.mix[index(ScaleClass::kMedium)] = {0.71, 3.5, 1024.0, 9216.0};
  s.mix[index(ScaleClass::kLarge)] = {0.83, 2.2, 9216.0, 300000.0};
  return s;
}

Dataset make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.num_images < 1) throw InvalidArgument("num_images must be >= 1");
  Rng rng(spec.seed);
  std::vector<ImageRecord> images;
  images.reserve(spec.num_images);
  std::int64_t next_annotation = 1;
  const double max_fit = static_cast<double>(spec.width) * spec.height;
  for (int i = 0; i < spec.num_images; ++i) {
    ImageRecord img{ImageId{i + 1}, spec.width, spec.height,
                    "synthetic_" + std::to_string(i + 1) + ".png", {}};
    for (ScaleClass sc : kAllScales) {
      const ScaleMix& mix = spec.mix[index(sc)];
      if (!rng.bernoulli(mix.coverage)) continue;
      const std::int64_t count = 1 + rng.poisson(std::max(0.0, mix.mean_count - 1.0));
      for (std::int64_t n = 0; n < count; ++n) {
        const double area = std::exp(rng.uniform(std::log(mix.min_area),
                                                  std::log(std::min(mix.max_area, max_fit))));
        const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
        double w = std::sqrt(area * aspect);
        double h = area / w;
        // Keep the requested area when the box has to be narrowed to fit.
        if (w > spec.width) {
          w = spec.width;
          h = area / w;
        }
        if (h > spec.height) {
          h = spec.height;
          w = std::min<double>(spec.width, area / h);
        }
        const double x = rng.uniform(0.0, spec.width - w);
        const double y = rng.uniform(0.0, spec.height - h);
        BoundingBox box = BoundingBox::from_pixels(x, y, w, h).clamped(spec.width, spec.height);
        if (!box.valid()) continue;
        img.annotations.push_back(InstanceAnnotation{
            AnnotationId{next_annotation++}, img.id, box, CategoryId{1}, false});
      }
    }
    images.push_back(std::move(img));
  }
  return Dataset(std::move(images), {{CategoryId{1}, "object"}});
}

}  // namespace dst
