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
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dst/controller.hpp"
#include "dst/dataset.hpp"
#include "dst/rng.hpp"

namespace dst {

// The surrogate below stands in for a detector: it has no notion of anchors,
// gradients or accuracy. Its only job is to let data policy move per-scale
// loss proportions so the controller can be exercised end to end.

struct SurrogateParams {
  PerScale<double> base_loss{1.0, 1.0, 1.0};
  /// Per-instance exponential decay rate of a scale's loss level.
  double decay = 1e-4;
  /// Amplitude of the multiplicative uniform noise, in [0, 1).
  double noise = 0.05;

  void validate() const;
};

/// Per-scale loss level base * exp(-decay * exposure), where exposure counts
/// instances of that scale seen so far.
class SurrogateModel {
 public:
  SurrogateModel(SurrogateParams params, std::uint64_t seed);

  PerScale<double> loss_levels() const;
  /// Loss sums of one batch: count * level * (1 + u) per scale and task, with
  /// u drawn uniformly from [-noise, noise]. Exposure is not changed.
  LossReport report(std::int64_t iter, const PerScale<std::int64_t>& counts);
  void expose(const PerScale<std::int64_t>& counts);
  const PerScale<std::int64_t>& exposure() const { return exposure_; }

 private:
  SurrogateParams params_;
  Rng rng_;
  PerScale<std::int64_t> exposure_{};
};

/// A data policy: a controller strategy, or loss re-weighting on regular
/// data ("resampling": the small-object loss mass is raised to at least the mean of
/// the medium and large masses every iteration).
struct SimPolicy {
  std::string label;
  Strategy strategy;
  bool resampling = false;

  /// Strategy names plus "resampling".
  static SimPolicy parse(std::string_view name);
};

struct SimConfig {
  int iters = 10000;
  int batch_size = 1;
  int k = 4;
  double tau = 0.1;
  bool tiny_filter = false;
  SurrogateParams surrogate;
  /// Trailing window (iterations) over which loss shares are measured.
  std::size_t balance_window = 100;
  std::uint64_t seed = 0;
};

struct SimStep {
  std::int64_t iter = 0;
  Mode mode = Mode::kRegular;
  /// Small-object share of the regression loss; nullopt when the batch
  /// carried no loss.
  std::optional<double> r_s;
  PerScale<std::int64_t> counts{};
  /// Exposure after this iteration.
  PerScale<std::int64_t> exposure{};
  /// Reported loss of the batch, classification plus regression.
  PerScale<double> loss{};
  /// Per-scale share of loss over the trailing window.
  PerScale<double> share{};
};

struct SimReport {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<SimStep> trace;
  /// Mean over iterations of (smallest windowed loss share) / (1/3).
  double balance = 0.0;
  /// Mean of the defined r_s values.
  double mean_r_s = 0.0;
  /// Fraction of iterations with defined r_s where r_s <= tau.
  double low_fraction = 0.0;
  double collage_fraction = 0.0;
  std::uint64_t images_consumed = 0;
  std::uint64_t tiny_dropped = 0;
};

/// Runs the loop: sample a plan, count its instances (after the collage
/// shrink and optional tiny filter), emit surrogate losses, expose, observe,
/// decide. Iteration 0 is regular. Crowd regions are not counted.
SimReport run_simulation(const Dataset& ds, const SimPolicy& policy,
                         const SimConfig& cfg);

/// Runs every (policy, seed) pair on up to `jobs` threads. Results are in
/// policy-major order regardless of scheduling.
std::vector<SimReport> run_simulations(const Dataset& ds,
                                       const std::vector<SimPolicy>& policies,
                                       const SimConfig& cfg,
                                       const std::vector<std::uint64_t>& seeds,
                                       int jobs);

struct PolicySummary {
  std::string policy;
  std::size_t runs = 0;
  double balance = 0.0;
  double mean_r_s = 0.0;
  double low_fraction = 0.0;
  double collage_fraction = 0.0;
  double images_consumed = 0.0;
};

/// Per-policy medians over seeds, in first-appearance order.
std::vector<PolicySummary> summarize(const std::vector<SimReport>& reports);

double median(std::vector<double> values);

void write_sim_trace_csv(std::ostream& out, const SimReport& report);
void write_sim_runs_csv(std::ostream& out, const std::vector<SimReport>& reports);
void write_sim_summary_csv(std::ostream& out,
                           const std::vector<PolicySummary>& summary);

}  // namespace dst
