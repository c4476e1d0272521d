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

// dst: dataset statistics, collage dataset construction, the feedback
// service and policy simulation.

#include <atomic>
#include <csignal>
#include <iostream>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "dst/commands.hpp"
#include "dst/log.hpp"
#include "dst/transport.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

void install_signal_handlers() {
  struct sigaction sa{};
  sa.sa_handler = on_signal;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
  std::signal(SIGPIPE, SIG_IGN);
}

}  // namespace

int main(int argc, char** argv) {
  dst::init_logging();
  dst::CliConfig cfg;
  std::string socket, dataset, images, out, scratch;

  CLI::App app{"dst: feedback-driven collage data preparation"};
  app.require_subcommand(1);
  auto add_common = [&](CLI::App* c) {
    c->add_option("--dataset", dataset, "COCO-format annotation file");
    c->add_option("--out", out, "output directory");
    c->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    c->add_option("--k", cfg.k, "collage components (1, 4 or 9)")->capture_default_str();
    c->add_flag("--tiny-filter", cfg.tiny_filter, "drop shrunk boxes under 100 px^2");
    c->add_option("--jobs", cfg.jobs, "worker threads")->capture_default_str();
  };

  CLI::App* stats = app.add_subcommand("stats", "per-scale instance share and image coverage");
  stats->add_option("--dataset", dataset, "COCO-format annotation file")->required();
  stats->add_option("--out", out, "write stats.csv here");

  CLI::App* build = app.add_subcommand("build-collage", "write a collage dataset");
  add_common(build);
  build->add_option("--images", images, "source image directory");

  CLI::App* serve = app.add_subcommand("serve", "run the feedback service");
  serve->add_option("--dataset", dataset, "dataset used when a hello names none");
  serve->add_option("--out", out, "trace CSV directory");
  serve->add_option("--socket", socket, "unix socket path (stdio when omitted)");
  serve->add_option("--images", images, "source images for --scratch");
  serve->add_option("--scratch", scratch, "compose collage plans into this directory");

  CLI::App* sim = app.add_subcommand("simulate", "compare data policies on the surrogate");
  add_common(sim);
  sim->add_option("--tau", cfg.tau, "collage threshold")->capture_default_str();
  sim->add_option("--batch-size", cfg.batch_size, "images or collages per iteration")
      ->capture_default_str();
  sim->add_option("--iters", cfg.iters, "iterations per run")->capture_default_str();
  sim->add_option("--seeds", cfg.seeds, "runs per policy, seeds seed..seed+n-1")
      ->capture_default_str();
  sim->add_option("--policies,--strategy", cfg.policies,
                  "comma-separated policies (default: all)")
      ->delimiter(',');
  sim->add_option("--synthetic", cfg.synthetic,
                  "preset when no --dataset: small_starved or coco_like")
      ->capture_default_str();
  sim->add_option("--plot", cfg.plot, "svg or none")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dst::kExitInput;
  }
  cfg.dataset = dataset;
  cfg.images = images;
  cfg.out = out;
  cfg.socket = socket;
  cfg.scratch = scratch;

  try {
    cfg.validate();
    if (*stats) return dst::cmd_stats(cfg, std::cout);
    if (*build) return dst::cmd_build_collage(cfg, std::cout);
    if (*serve) {
      install_signal_handlers();
      return dst::cmd_serve(cfg, g_stop);
    }
    if (*sim) return dst::cmd_simulate(cfg, std::cout);
  } catch (const dst::BindError& e) {
    spdlog::error("{}", e.what());
    return dst::kExitRuntime;
  } catch (const dst::InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return dst::kExitInput;
  } catch (const dst::ParseError& e) {
    spdlog::error("{}", e.what());
    return dst::kExitInput;
  } catch (const dst::IoError& e) {
    spdlog::error("{}", e.what());
    return dst::kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return dst::kExitRuntime;
  }
  return dst::kExitOk;
}
