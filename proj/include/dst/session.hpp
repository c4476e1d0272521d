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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "dst/controller.hpp"
#include "dst/dataset.hpp"
#include "dst/protocol.hpp"
#include "dst/scheduler.hpp"

namespace dst {

struct ServiceOptions {
  /// Used when a hello names no dataset.
  std::filesystem::path default_dataset;
  /// Trace CSVs go here when set.
  std::filesystem::path out_dir;
  /// Source images, needed only by scratch composition.
  std::filesystem::path images_dir;
  /// When set, collage plans are also composed to PNG + JSON under this
  /// directory and the plan lists the files.
  std::filesystem::path scratch_dir;
  std::size_t trace_capacity = 0;
};

/// Loaded datasets shared by every session, keyed by path.
class DatasetCache {
 public:
  std::shared_ptr<const Dataset> get(const std::filesystem::path& path);

 private:
  std::mutex mu_;
  std::map<std::filesystem::path, std::shared_ptr<const Dataset>> cache_;
};

/// One trainer's state: controller, sampler and the next expected iter.
class Session {
 public:
  /// Throws InvalidArgument with the reply reason when the hello is invalid.
  Session(std::uint64_t id, const HelloMsg& hello,
          std::shared_ptr<const Dataset> dataset, const ServiceOptions& opts);

  /// The cold-start plan for iteration 0 (always regular).
  PlanMsg start();
  /// Observe, decide and plan the next iteration. Throws InvalidArgument
  /// and leaves the state unchanged when the report is rejected.
  PlanMsg on_loss_report(const LossReportMsg& msg);
  StatsMsg stats() const;

  std::uint64_t id() const { return id_; }
  const FeedbackController& controller() const { return controller_; }
  /// Writes out_dir/trace_session_<id>.csv; no-op without out_dir.
  void flush_trace() const;

 private:
  PlanMsg finish(BatchPlan plan);

  std::uint64_t id_;
  HelloMsg hello_;
  std::shared_ptr<const Dataset> dataset_;
  const ServiceOptions& opts_;
  FeedbackController controller_;
  BatchSampler sampler_;
  std::int64_t next_iter_ = 0;
  bool started_ = false;
  std::uint64_t collage_plans_ = 0;
  std::optional<double> last_r_s_;
};

/// Process-wide state shared across connections.
class ServiceEngine {
 public:
  explicit ServiceEngine(ServiceOptions opts) : opts_(std::move(opts)) {}

  const ServiceOptions& options() const { return opts_; }
  DatasetCache& cache() { return cache_; }
  std::uint64_t next_session_id() { return ++session_counter_; }

 private:
  ServiceOptions opts_;
  DatasetCache cache_;
  std::atomic<std::uint64_t> session_counter_{0};
};

/// Serial message loop for one connection. At most one session is active.
class Connection {
 public:
  explicit Connection(ServiceEngine& engine) : engine_(engine) {}
  ~Connection();

  /// Returns the reply line without the newline. A bye is answered with bye
  /// and ends the connection.
  std::string handle_line(std::string_view line);
  bool finished() const { return finished_; }
  /// Flushes the active session's trace; safe to call more than once.
  void close();
  const Session* session() const { return session_.get(); }

 private:
  ServiceEngine& engine_;
  std::unique_ptr<Session> session_;
  bool finished_ = false;
  bool flushed_ = false;
};

}  // namespace dst
