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
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dst/controller.hpp"
#include "dst/scheduler.hpp"
#include "dst/types.hpp"

namespace dst {

/// Raised for lines that are not a well-formed message. The reason is sent
/// back verbatim in an error message.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

struct HelloMsg {
  std::string dataset;
  int batch_size = 1;
  int k = 4;
  double tau = 0.1;
  std::string strategy = "reg_loss";
  std::uint64_t seed = 0;
  bool tiny_filter = false;
  std::optional<double> random_p;

  friend bool operator==(const HelloMsg&, const HelloMsg&) = default;
};

struct LossReportMsg {
  LossReport report;
  BatchComposition composition;
};

struct PlanMsg {
  BatchPlan plan;
  /// Collage PNG paths, present only when the service composes into a
  /// scratch directory.
  std::vector<std::string> files;
};

struct StatsRequestMsg {};

struct StatsMsg {
  std::int64_t next_iter = 0;
  std::uint64_t observations = 0;
  std::uint64_t collage_plans = 0;
  std::uint64_t images_consumed = 0;
  std::uint64_t epoch = 0;
  std::optional<double> last_r_s;
};

struct ErrorMsg {
  std::string reason;
};

struct ByeMsg {};

using Message = std::variant<HelloMsg, LossReportMsg, PlanMsg, StatsRequestMsg,
                             StatsMsg, ErrorMsg, ByeMsg>;

/// Parses one NDJSON line. Unknown fields are ignored; missing or mistyped
/// required fields raise ProtocolError.
Message parse_message(std::string_view line);

/// One line of compact JSON with a fixed key order, without the trailing
/// newline.
std::string serialize(const Message& msg);

}  // namespace dst
