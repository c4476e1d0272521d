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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "dst/dataset.hpp"
#include "dst/simulator.hpp"

namespace dst {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitRuntime = 3,
};

struct CliConfig {
  std::filesystem::path dataset;
  std::filesystem::path images;
  std::filesystem::path out;
  double tau = 0.1;
  int k = 4;
  int batch_size = 1;
  std::string strategy = "reg_loss";
  std::uint64_t seed = 0;
  int iters = 10000;
  bool tiny_filter = false;
  int jobs = 1;
  std::filesystem::path socket;
  std::string plot = "svg";
  // simulate only
  std::vector<std::string> policies;
  int seeds = 5;
  std::string synthetic = "small_starved";
  // serve only
  std::filesystem::path scratch;

  /// Throws InvalidArgument naming the offending flag.
  void validate() const;
};

/// Per-scale shares and coverage to `out` (text) and, when cfg.out is set,
/// cfg.out/stats.csv.
int cmd_stats(const CliConfig& cfg, std::ostream& out);

struct BuildSummary {
  std::size_t collages = 0;
  std::size_t skipped_groups = 0;
  std::size_t leftover_images = 0;
  std::size_t annotations = 0;
  std::size_t dropped_tiny = 0;
};

/// Groups images by a seeded permutation into groups of k and writes
/// cfg.out/images/collage_NNNNNN.png plus cfg.out/annotations.json. Groups
/// with a missing source file are skipped and counted.
BuildSummary build_collage_dataset(const CliConfig& cfg);
int cmd_build_collage(const CliConfig& cfg, std::ostream& out);

/// Serves on cfg.socket, or on stdin/stdout when no socket is given, until
/// `stop` (or bye, for stdio).
int cmd_serve(const CliConfig& cfg, const std::atomic<bool>& stop);

/// Runs every (policy, seed) pair and writes runs.csv, summary.csv,
/// traces/ and, with plot=svg, plots/ under cfg.out.
int cmd_simulate(const CliConfig& cfg, std::ostream& out);

/// The policies simulate runs when none are given.
std::vector<std::string> default_policies();

}  // namespace dst
