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

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dst {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed annotation documents or wire messages.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Precondition violations on caller-supplied values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

enum class ImageId : std::int64_t {};
enum class AnnotationId : std::int64_t {};
enum class CategoryId : std::int64_t {};

template <typename Id>
constexpr std::int64_t raw(Id id) {
  return static_cast<std::int64_t>(id);
}

/// Object size buckets under the COCO protocol. The enumerator order is the
/// size order, so comparisons between classes are meaningful.
enum class ScaleClass : std::uint8_t { kSmall = 0, kMedium = 1, kLarge = 2 };

inline constexpr std::size_t kNumScales = 3;
inline constexpr std::array<ScaleClass, kNumScales> kAllScales = {
    ScaleClass::kSmall, ScaleClass::kMedium, ScaleClass::kLarge};

template <typename T>
using PerScale = std::array<T, kNumScales>;

constexpr std::size_t index(ScaleClass s) { return static_cast<std::size_t>(s); }

constexpr std::string_view to_string(ScaleClass s) {
  switch (s) {
    case ScaleClass::kSmall:
      return "small";
    case ScaleClass::kMedium:
      return "medium";
    case ScaleClass::kLarge:
      return "large";
  }
  return "?";
}

/// Data preparation mode for one iteration: regular images or collages.
enum class Mode : std::uint8_t { kRegular, kCollage };

constexpr std::string_view to_string(Mode m) {
  return m == Mode::kRegular ? "regular" : "collage";
}

Mode parse_mode(std::string_view s);

}  // namespace dst
