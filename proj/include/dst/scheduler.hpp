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
#include <vector>

#include "dst/controller.hpp"
#include "dst/rng.hpp"
#include "dst/types.hpp"

namespace dst {

/// Concrete next-batch instruction. Regular plans hold batch_size singleton
/// groups; collage plans hold batch_size groups of k distinct ids.
struct BatchPlan {
  std::int64_t iter = 0;
  Mode mode = Mode::kRegular;
  int batch_size = 0;
  int k = 1;
  std::vector<std::vector<ImageId>> groups;

  friend bool operator==(const BatchPlan&, const BatchPlan&) = default;
};

/// Endless stream over a fixed id set: each pass is a fresh seeded
/// permutation and the pass boundary may fall anywhere inside a batch.
class BatchSampler {
 public:
  BatchSampler(std::vector<ImageId> ids, std::uint64_t seed);

  /// Consumes batch_size ids (Regular) or batch_size * k ids (Collage).
  /// Throws InvalidArgument when batch_size < 1, k is not in {1,4,9}, or the
  /// id set is smaller than the ids one plan needs.
  BatchPlan next_batch(const Decision& decision, int batch_size, int k);

  std::uint64_t epoch() const { return epoch_; }
  std::size_t cursor() const { return cursor_; }
  std::uint64_t consumed() const { return consumed_; }
  std::size_t size() const { return order_.size(); }

 private:
  ImageId take(const std::vector<ImageId>& group);
  void reshuffle();

  std::vector<ImageId> ids_;
  std::vector<ImageId> order_;
  Rng rng_;
  std::size_t cursor_ = 0;
  std::uint64_t epoch_ = 0;
  std::uint64_t consumed_ = 0;
};

}  // namespace dst
