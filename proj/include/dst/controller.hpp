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
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "dst/rng.hpp"
#include "dst/types.hpp"

namespace dst {

enum class StrategyKind : std::uint8_t {
  kAllRegular,
  kAllCollage,
  kRandom,
  kInputRatio,
  kClsLoss,
  kRegLoss,
  kJointLoss,
};

/// How the small-object proportion is observed, or a static policy.
struct Strategy {
  StrategyKind kind = StrategyKind::kRegLoss;
  /// Collage probability; only read by kRandom.
  double random_p = 0.5;

  /// Accepts all_regular, all_collage, random, random:<p>, input_ratio,
  /// cls_loss, reg_loss, joint_loss.
  static Strategy parse(std::string_view name);
  std::string name() const;
  bool is_feedback() const;
  bool is_loss_feedback() const;

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

/// Per-scale loss sums for one iteration. Each positive-sample loss term is
/// attributed to the scale of its matched ground-truth box; background terms
/// are excluded.
struct LossReport {
  std::int64_t iter = 0;
  PerScale<double> cls{};
  PerScale<double> reg{};
};

struct BatchComposition {
  std::int64_t iter = 0;
  PerScale<std::int64_t> instance_counts{};
};

struct ControllerConfig {
  double tau = 0.1;
  Strategy strategy;
  int k = 4;
  std::uint64_t rng_seed = 0;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

struct Decision {
  /// Iteration the decision applies to: one past the observation.
  std::int64_t iter = 0;
  Mode mode = Mode::kRegular;
  std::optional<double> r_s;
};

/// Small-object proportion under the strategy; nullopt for static
/// strategies or when nothing was observed (zero denominator).
/// Throws InvalidArgument on negative or non-finite losses or counts.
std::optional<double> compute_ratio(const LossReport& report,
                                    const BatchComposition& composition,
                                    const Strategy& strategy);

/// Threshold rule: Collage iff r_s <= tau for feedback strategies; an
/// undefined ratio means Regular. Random draws once from `rng`.
Decision decide(const ControllerConfig& cfg, std::int64_t next_iter,
                std::optional<double> ratio, Rng& rng);

struct TraceEntry {
  std::int64_t iter = 0;
  std::optional<double> r_s;
  /// Decision taken from this observation, applied at iter + 1.
  Mode mode = Mode::kRegular;
};

/// Serial state machine turning per-iteration feedback into decisions.
class FeedbackController {
 public:
  /// trace_capacity bounds the trace ring; 0 keeps every entry.
  explicit FeedbackController(ControllerConfig cfg,
                              std::size_t trace_capacity = 0);

  /// Throws InvalidArgument when report and composition disagree on iter or
  /// when iter does not strictly increase.
  Decision observe(const LossReport& report, const BatchComposition& composition);

  const ControllerConfig& config() const { return cfg_; }
  const std::deque<TraceEntry>& trace() const { return trace_; }
  std::size_t observations() const { return observations_; }
  std::optional<std::int64_t> last_iter() const { return last_iter_; }

  /// CSV with header iter,r_s,mode,strategy,tau. Undefined r_s is empty.
  void write_trace_csv(std::ostream& out) const;

 private:
  ControllerConfig cfg_;
  Rng rng_;
  std::size_t capacity_;
  std::deque<TraceEntry> trace_;
  std::size_t observations_ = 0;
  std::optional<std::int64_t> last_iter_;
};

/// Formats a real the way every CSV in this project does (shortest
/// round-trip form).
std::string format_real(double v);

}  // namespace dst
