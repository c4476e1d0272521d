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

#include "dst/session.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "dst/image_io.hpp"

namespace dst {

namespace {

ControllerConfig make_config(const HelloMsg& h) {
  ControllerConfig cfg;
  cfg.tau = h.tau;
  cfg.k = h.k;
  cfg.rng_seed = mix_seed(h.seed, 2);
  cfg.strategy = Strategy::parse(h.strategy);
  if (h.random_p) {
    if (cfg.strategy.kind != StrategyKind::kRandom) {
      throw InvalidArgument("random_p given for non-random strategy");
    }
    cfg.strategy.random_p = *h.random_p;
  }
  cfg.validate();
  if (h.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  return cfg;
}

}  // namespace

std::shared_ptr<const Dataset> DatasetCache::get(const std::filesystem::path& path) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(path);
  if (it != cache_.end()) return it->second;
  auto ds = std::make_shared<const Dataset>(load_annotations(path));
  spdlog::info("loaded {} ({} images, {} instances)", path.string(), ds->size(),
               ds->instance_count());
  cache_.emplace(path, ds);
  return ds;
}

Session::Session(std::uint64_t id, const HelloMsg& hello,
                 std::shared_ptr<const Dataset> dataset, const ServiceOptions& opts)
    : id_(id),
      hello_(hello),
      dataset_(std::move(dataset)),
      opts_(opts),
      controller_(make_config(hello), opts.trace_capacity),
      sampler_(dataset_->image_ids(), mix_seed(hello.seed, 0)) {
  const std::size_t need = static_cast<std::size_t>(hello.batch_size) *
                           static_cast<std::size_t>(hello.k);
  if (dataset_->size() < need) {
    throw InvalidArgument("dataset has " + std::to_string(dataset_->size()) +
                          " images, fewer than batch_size * k = " +
                          std::to_string(need));
  }
}

PlanMsg Session::start() {
  if (started_) throw InvalidArgument("session already started");
  started_ = true;
  return finish(sampler_.next_batch(Decision{0, Mode::kRegular, std::nullopt},
                                    hello_.batch_size, hello_.k));
}

PlanMsg Session::on_loss_report(const LossReportMsg& msg) {
  const std::int64_t iter = msg.report.iter;
  if (iter < next_iter_) throw InvalidArgument("iteration replay");
  if (iter > next_iter_) {
    throw InvalidArgument("out-of-order iteration " + std::to_string(iter) +
                          ", expected " + std::to_string(next_iter_));
  }
  const Decision d = controller_.observe(msg.report, msg.composition);
  last_r_s_ = controller_.trace().back().r_s;
  ++next_iter_;
  return finish(sampler_.next_batch(d, hello_.batch_size, hello_.k));
}

PlanMsg Session::finish(BatchPlan plan) {
  PlanMsg out;
  if (plan.mode == Mode::kCollage) {
    ++collage_plans_;
    if (!opts_.scratch_dir.empty()) {
      const std::filesystem::path dir =
          opts_.scratch_dir / ("session_" + std::to_string(id_));
      std::filesystem::create_directories(dir);
      for (std::size_t g = 0; g < plan.groups.size(); ++g) {
        try {
          const std::string stem =
              "iter_" + std::to_string(plan.iter) + "_g" + std::to_string(g);
          const ComposedCollage c = compose_from_files(
              *dataset_, plan.groups[g], plan.k, opts_.images_dir,
              hello_.tiny_filter, ImageId{static_cast<std::int64_t>(g)},
              stem + ".png");
          write_png(dir / (stem + ".png"), c.result.pixels);
          write_annotations(dir / (stem + ".json"),
                            Dataset({c.record}, dataset_->categories()),
                            {{c.record.id, plan.groups[g]}});
          out.files.push_back((dir / (stem + ".png")).string());
        } catch (const Error& e) {
          // The plan still goes out; the trainer can compose it itself.
          spdlog::warn("session {}: scratch composition of iter {} group {} failed: {}",
                       id_, plan.iter, g, e.what());
        }
      }
    }
  }
  out.plan = std::move(plan);
  return out;
}

StatsMsg Session::stats() const {
  StatsMsg s;
  s.next_iter = next_iter_;
  s.observations = controller_.observations();
  s.collage_plans = collage_plans_;
  s.images_consumed = sampler_.consumed();
  s.epoch = sampler_.epoch();
  s.last_r_s = last_r_s_;
  return s;
}

void Session::flush_trace() const {
  if (opts_.out_dir.empty()) return;
  std::filesystem::create_directories(opts_.out_dir);
  const auto path = opts_.out_dir / ("trace_session_" + std::to_string(id_) + ".csv");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  controller_.write_trace_csv(f);
  spdlog::info("session {}: wrote {} trace rows to {}", id_,
               controller_.trace().size(), path.string());
}

Connection::~Connection() {
  try {
    close();
  } catch (const std::exception& e) {
    spdlog::error("trace flush failed: {}", e.what());
  }
}

void Connection::close() {
  if (flushed_ || !session_) return;
  flushed_ = true;
  session_->flush_trace();
}

std::string Connection::handle_line(std::string_view line) {
  if (finished_) return serialize(ErrorMsg{"connection closed"});
  Message msg;
  try {
    msg = parse_message(line);
  } catch (const ProtocolError& e) {
    return serialize(ErrorMsg{e.what()});
  }
  try {
    if (const auto* h = std::get_if<HelloMsg>(&msg)) {
      if (session_) return serialize(ErrorMsg{"session already active"});
      // Config errors are reported before the dataset is touched.
      make_config(*h);
      const std::filesystem::path path =
          h->dataset.empty() ? engine_.options().default_dataset
                             : std::filesystem::path(h->dataset);
      if (path.empty()) return serialize(ErrorMsg{"no dataset given"});
      std::shared_ptr<const Dataset> ds;
      try {
        ds = engine_.cache().get(path);
      } catch (const Error& e) {
        return serialize(ErrorMsg{std::string("dataset load failed: ") + e.what()});
      }
      auto s = std::make_unique<Session>(engine_.next_session_id(), *h, ds,
                                         engine_.options());
      PlanMsg plan = s->start();
      session_ = std::move(s);
      spdlog::info("session {} started: strategy {}, k {}, B {}", session_->id(),
                   h->strategy, h->k, h->batch_size);
      return serialize(plan);
    }
    if (const auto* r = std::get_if<LossReportMsg>(&msg)) {
      if (!session_) return serialize(ErrorMsg{"no active session"});
      return serialize(session_->on_loss_report(*r));
    }
    if (std::holds_alternative<StatsRequestMsg>(msg)) {
      if (!session_) return serialize(ErrorMsg{"no active session"});
      return serialize(session_->stats());
    }
    if (std::holds_alternative<ByeMsg>(msg)) {
      finished_ = true;
      close();
      return serialize(ByeMsg{});
    }
    return serialize(ErrorMsg{"unexpected message type"});
  } catch (const Error& e) {
    return serialize(ErrorMsg{e.what()});
  }
}

}  // namespace dst
