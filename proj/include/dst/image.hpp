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
#include <span>
#include <vector>

namespace dst {

/// Row-major, interleaved 8-bit image. New buffers are zero (black).
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t row_bytes() const {
    return static_cast<std::size_t>(width_) * channels_;
  }

  std::span<std::uint8_t> row(int y) {
    return {data_.data() + y * row_bytes(), row_bytes()};
  }
  std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + y * row_bytes(), row_bytes()};
  }
  std::uint8_t& at(int x, int y, int c) {
    return data_[y * row_bytes() + static_cast<std::size_t>(x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[y * row_bytes() + static_cast<std::size_t>(x) * channels_ + c];
  }
  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace dst
