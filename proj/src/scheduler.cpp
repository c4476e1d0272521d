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

#include "dst/scheduler.hpp"

#include <algorithm>
#include <string>

namespace dst {

BatchSampler::BatchSampler(std::vector<ImageId> ids, std::uint64_t seed)
    : ids_(std::move(ids)), rng_(seed) {
  if (ids_.empty()) throw InvalidArgument("sampler needs at least one image");
  reshuffle();
}

void BatchSampler::reshuffle() {
  order_ = ids_;
  rng_.shuffle(std::span<ImageId>(order_));
  cursor_ = 0;
}

// Next id of the stream. If a pass boundary falls inside a collage group and
// the fresh permutation would repeat an id of that group, the first later id
// not in the group is swapped forward; the permutation stays a permutation.
ImageId BatchSampler::take(const std::vector<ImageId>& group) {
  if (cursor_ == order_.size()) {
    reshuffle();
    ++epoch_;
  }
  const auto in_group = [&group](ImageId id) {
    return std::find(group.begin(), group.end(), id) != group.end();
  };
  if (in_group(order_[cursor_])) {
    for (std::size_t j = cursor_ + 1; j < order_.size(); ++j) {
      if (!in_group(order_[j])) {
        std::swap(order_[cursor_], order_[j]);
        break;
      }
    }
  }
  ++consumed_;
  return order_[cursor_++];
}

BatchPlan BatchSampler::next_batch(const Decision& decision, int batch_size,
                                   int k) {
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (k != 1 && k != 4 && k != 9) {
    throw InvalidArgument("k must be a perfect square in {1,4,9}");
  }
  const int group_size = decision.mode == Mode::kCollage ? k : 1;
  const std::size_t needed = static_cast<std::size_t>(batch_size) * group_size;
  if (needed > order_.size()) {
    throw InvalidArgument("dataset has " + std::to_string(order_.size()) +
                          " images, fewer than the " + std::to_string(needed) +
                          " one plan needs");
  }
  BatchPlan plan{decision.iter, decision.mode, batch_size, k, {}};
  plan.groups.reserve(batch_size);
  for (int b = 0; b < batch_size; ++b) {
    std::vector<ImageId> group;
    group.reserve(group_size);
    for (int i = 0; i < group_size; ++i) group.push_back(take(group));
    plan.groups.push_back(std::move(group));
  }
  return plan;
}

}  // namespace dst
