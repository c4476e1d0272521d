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

#include "dst/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include <unistd.h>

#include <spdlog/spdlog.h>

#include "dst/collage.hpp"
#include "dst/image_io.hpp"
#include "dst/rng.hpp"
#include "dst/svg.hpp"
#include "dst/synthetic.hpp"
#include "dst/transport.hpp"

namespace dst {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == '/' || c == ' ') c = '_';
  }
  return s;
}

}  // namespace

void CliConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau out of range");
  grid_side(k);
  if (batch_size < 1) throw InvalidArgument("--batch-size must be >= 1");
  if (iters < 1) throw InvalidArgument("--iters must be >= 1");
  if (jobs < 1) throw InvalidArgument("--jobs must be >= 1");
  if (seeds < 1) throw InvalidArgument("--seeds must be >= 1");
  if (plot != "svg" && plot != "none") throw InvalidArgument("--plot must be svg or none");
}

int cmd_stats(const CliConfig& cfg, std::ostream& out) {
  if (cfg.dataset.empty()) throw InvalidArgument("--dataset is required");
  const Dataset ds = load_annotations(cfg.dataset);
  const ScaleStats st = dataset_scale_stats(ds);
  out << "images " << st.images << ", instances " << st.instances;
  if (ds.dropped_degenerate() > 0) {
    out << " (" << ds.dropped_degenerate() << " degenerate boxes dropped)";
  }
  out << "\n";
  out << "scale   instances  share    image_coverage\n";
  for (ScaleClass c : kAllScales) {
    const std::size_t i = index(c);
    char line[128];
    const std::string name(to_string(c));
    std::snprintf(line, sizeof line, "%-7s %-10zu %-8s %s\n", name.c_str(),
                  st.instance_count[i], percent(st.instance_share[i]).c_str(),
                  percent(st.image_coverage[i]).c_str());
    out << line;
  }
  out << "COCO 2017 train reference: small share above 41%; coverage small 52%, "
         "medium 71%, large 83%\n";
  if (!cfg.out.empty()) {
    std::ofstream f = open_out(cfg.out / "stats.csv");
    f << "scale,instances,instance_share,image_coverage\n";
    for (ScaleClass c : kAllScales) {
      const std::size_t i = index(c);
      f << to_string(c) << ',' << st.instance_count[i] << ','
        << format_real(st.instance_share[i]) << ','
        << format_real(st.image_coverage[i]) << '\n';
    }
  }
  return kExitOk;
}

BuildSummary build_collage_dataset(const CliConfig& cfg) {
  if (cfg.dataset.empty()) throw InvalidArgument("--dataset is required");
  if (cfg.images.empty()) throw InvalidArgument("--images is required");
  if (cfg.out.empty()) throw InvalidArgument("--out is required");
  const Dataset ds = load_annotations(cfg.dataset);
  if (ds.empty()) throw InvalidArgument("empty dataset");
  const std::size_t k = static_cast<std::size_t>(cfg.k);
  grid_side(cfg.k);

  std::vector<ImageId> order = ds.image_ids();
  Rng rng(mix_seed(cfg.seed, 0));
  rng.shuffle(std::span<ImageId>(order));
  const std::size_t groups = order.size() / k;

  BuildSummary sum;
  sum.leftover_images = order.size() - groups * k;
  if (sum.leftover_images > 0) {
    spdlog::info("{} images left over after grouping by {}", sum.leftover_images, k);
  }
  std::filesystem::create_directories(cfg.out / "images");

  std::vector<std::optional<ImageRecord>> records(groups);
  std::vector<std::size_t> tiny(groups, 0);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t g = next++; g < groups; g = next++) {
      char name[64];
      std::snprintf(name, sizeof name, "collage_%06zu.png", g + 1);
      const std::span<const ImageId> group(order.data() + g * k, k);
      try {
        ComposedCollage c = compose_from_files(
            ds, group, cfg.k, cfg.images, cfg.tiny_filter,
            ImageId{static_cast<std::int64_t>(g + 1)}, name);
        write_png(cfg.out / "images" / name, c.result.pixels);
        tiny[g] = c.result.dropped_tiny;
        records[g] = std::move(c.record);
      } catch (const IoError& e) {
        spdlog::warn("skipping group {}: {}", g + 1, e.what());
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < std::min<int>(cfg.jobs, static_cast<int>(std::max<std::size_t>(groups, 1))); ++i) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<ImageRecord> images;
  std::map<ImageId, std::vector<ImageId>> provenance;
  std::int64_t next_ann = 1;
  for (std::size_t g = 0; g < groups; ++g) {
    if (!records[g]) {
      ++sum.skipped_groups;
      continue;
    }
    ImageRecord rec = std::move(*records[g]);
    for (InstanceAnnotation& a : rec.annotations) a.id = AnnotationId{next_ann++};
    sum.annotations += rec.annotations.size();
    sum.dropped_tiny += tiny[g];
    provenance[rec.id] = std::vector<ImageId>(order.begin() + g * k,
                                              order.begin() + (g + 1) * k);
    images.push_back(std::move(rec));
  }
  sum.collages = images.size();
  write_annotations(cfg.out / "annotations.json",
                    Dataset(std::move(images), ds.categories()), provenance);
  return sum;
}

int cmd_build_collage(const CliConfig& cfg, std::ostream& out) {
  const BuildSummary s = build_collage_dataset(cfg);
  out << "collages " << s.collages << ", annotations " << s.annotations
      << ", dropped_tiny " << s.dropped_tiny << ", skipped_groups "
      << s.skipped_groups << ", leftover_images " << s.leftover_images << "\n";
  spdlog::info("dropped_tiny total {}", s.dropped_tiny);
  return kExitOk;
}

int cmd_serve(const CliConfig& cfg, const std::atomic<bool>& stop) {
  ServiceOptions opts;
  opts.default_dataset = cfg.dataset;
  opts.out_dir = cfg.out;
  opts.images_dir = cfg.images;
  opts.scratch_dir = cfg.scratch;
  if (!opts.scratch_dir.empty() && opts.images_dir.empty()) {
    throw InvalidArgument("--scratch needs --images");
  }
  ServiceEngine engine(opts);
  // Fail fast on a bad dataset rather than at the first hello.
  if (!cfg.dataset.empty()) {
    const auto ds = engine.cache().get(cfg.dataset);
    if (ds->empty()) throw InvalidArgument("empty dataset");
  }
  if (cfg.socket.empty()) {
    serve_stream(engine, STDIN_FILENO, STDOUT_FILENO, stop);
  } else {
    UnixSocketServer server(cfg.socket);
    server.run(engine, stop);
  }
  spdlog::info("service stopped");
  return kExitOk;
}

std::vector<std::string> default_policies() {
  return {"all_regular", "all_collage", "random",     "input_ratio",
          "cls_loss",    "reg_loss",    "joint_loss", "resampling"};
}

int cmd_simulate(const CliConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw InvalidArgument("--out is required");
  Dataset ds;
  if (!cfg.dataset.empty()) {
    ds = load_annotations(cfg.dataset);
  } else if (cfg.synthetic == "small_starved") {
    ds = make_synthetic_dataset(SyntheticSpec::small_starved());
  } else if (cfg.synthetic == "coco_like") {
    ds = make_synthetic_dataset(SyntheticSpec::coco_like());
  } else {
    throw InvalidArgument("unknown synthetic preset '" + cfg.synthetic + "'");
  }
  if (ds.empty()) throw InvalidArgument("empty dataset");

  std::vector<SimPolicy> policies;
  for (const std::string& p :
       cfg.policies.empty() ? default_policies() : cfg.policies) {
    policies.push_back(SimPolicy::parse(p));
  }
  SimConfig sc;
  sc.iters = cfg.iters;
  sc.batch_size = cfg.batch_size;
  sc.k = cfg.k;
  sc.tau = cfg.tau;
  sc.tiny_filter = cfg.tiny_filter;
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.seeds; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));

  const std::vector<SimReport> reports = run_simulations(ds, policies, sc, seeds, cfg.jobs);
  const std::vector<PolicySummary> summary = summarize(reports);

  for (const SimReport& r : reports) {
    std::ofstream f = open_out(cfg.out / "traces" /
                               (file_safe(r.policy) + "_seed" + std::to_string(r.seed) + ".csv"));
    write_sim_trace_csv(f, r);
  }
  {
    std::ofstream f = open_out(cfg.out / "runs.csv");
    write_sim_runs_csv(f, reports);
  }
  {
    std::ofstream f = open_out(cfg.out / "summary.csv");
    write_sim_summary_csv(f, summary);
  }
  if (cfg.plot == "svg") {
    for (const SimReport& r : reports) {
      if (r.seed != seeds.front()) continue;
      std::vector<double> xs;
      SvgSeries s{"small", "#d62728", {}}, m{"medium", "#2ca02c", {}},
          l{"large", "#1f77b4", {}};
      std::vector<double> rs;
      for (const SimStep& st : r.trace) {
        xs.push_back(static_cast<double>(st.iter));
        s.ys.push_back(st.share[0]);
        m.ys.push_back(st.share[1]);
        l.ys.push_back(st.share[2]);
        if (st.r_s) rs.push_back(*st.r_s);
      }
      const std::string stem = file_safe(r.policy);
      std::ofstream f1 = open_out(cfg.out / "plots" / ("shares_" + stem + ".svg"));
      write_line_plot_svg(f1, "loss share by scale, " + r.policy, xs, {s, m, l}, 0.0, 1.0);
      std::ofstream f2 = open_out(cfg.out / "plots" / ("rs_hist_" + stem + ".svg"));
      write_histogram_svg(f2, "small-object loss proportion, " + r.policy, rs, 20,
                          0.0, 1.0, cfg.tau);
    }
  }
  out << "policy        runs  balance  mean_r_s  low_frac  collage_frac\n";
  for (const PolicySummary& p : summary) {
    char line[160];
    std::snprintf(line, sizeof line, "%-13s %-5zu %-8s %-9s %-9s %s\n",
                  p.policy.c_str(), p.runs, fixed(p.balance, 4).c_str(),
                  fixed(p.mean_r_s, 4).c_str(), fixed(p.low_fraction, 4).c_str(),
                  fixed(p.collage_fraction, 4).c_str());
    out << line;
  }
  return kExitOk;
}

}  // namespace dst
