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

#include "dst/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <mutex>
#include <unordered_map>

#include "dst/collage.hpp"
#include "dst/scheduler.hpp"

namespace dst {

namespace {

using Counts = PerScale<std::int64_t>;

struct CountTables {
  std::unordered_map<ImageId, Counts> regular;
  std::unordered_map<ImageId, Counts> collage;
  std::unordered_map<ImageId, std::uint64_t> tiny;
};

CountTables build_count_tables(const Dataset& ds, int k, bool tiny_filter) {
  CountTables t;
  const CellAssignment cell{ImageId{}, grid_side(k), 0, 0, 0, 0};
  for (const ImageRecord& img : ds.images()) {
    std::vector<InstanceAnnotation> annos;
    for (const InstanceAnnotation& a : img.annotations) {
      if (!a.iscrowd) annos.push_back(a);
    }
    Counts reg{};
    for (const InstanceAnnotation& a : annos) ++reg[index(classify_scale(a.box))];
    std::vector<InstanceAnnotation> shrunk = transform_annotations(annos, cell);
    std::uint64_t dropped = 0;
    if (tiny_filter) {
      TinyFilterResult f = filter_tiny(std::move(shrunk));
      shrunk = std::move(f.kept);
      dropped = f.dropped;
    }
    Counts col{};
    for (const InstanceAnnotation& a : shrunk) ++col[index(classify_scale(a.box))];
    t.regular.emplace(img.id, reg);
    t.collage.emplace(img.id, col);
    t.tiny.emplace(img.id, dropped);
  }
  return t;
}

void apply_resampling(PerScale<double>& v) {
  const std::size_t s = index(ScaleClass::kSmall);
  if (v[s] > 0.0) {
    v[s] = std::max(
        v[s], 0.5 * (v[index(ScaleClass::kMedium)] + v[index(ScaleClass::kLarge)]));
  }
}

}  // namespace

void SurrogateParams::validate() const {
  for (double b : base_loss) {
    if (!(b > 0.0) || !std::isfinite(b)) throw InvalidArgument("base loss must be positive");
  }
  if (!(decay > 0.0) || !std::isfinite(decay)) throw InvalidArgument("decay must be positive");
  if (!(noise >= 0.0 && noise < 1.0)) throw InvalidArgument("noise must be in [0, 1)");
}

SurrogateModel::SurrogateModel(SurrogateParams params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  params_.validate();
}

PerScale<double> SurrogateModel::loss_levels() const {
  PerScale<double> out{};
  for (std::size_t s = 0; s < kNumScales; ++s) {
    out[s] = params_.base_loss[s] *
             std::exp(-params_.decay * static_cast<double>(exposure_[s]));
  }
  return out;
}

LossReport SurrogateModel::report(std::int64_t iter, const Counts& counts) {
  const PerScale<double> level = loss_levels();
  LossReport r;
  r.iter = iter;
  for (std::size_t s = 0; s < kNumScales; ++s) {
    const double mass = static_cast<double>(counts[s]) * level[s];
    r.reg[s] = mass * (1.0 + rng_.uniform(-params_.noise, params_.noise));
    r.cls[s] = mass * (1.0 + rng_.uniform(-params_.noise, params_.noise));
  }
  return r;
}

void SurrogateModel::expose(const Counts& counts) {
  for (std::size_t s = 0; s < kNumScales; ++s) exposure_[s] += counts[s];
}

SimPolicy SimPolicy::parse(std::string_view name) {
  if (name == "resampling") {
    return SimPolicy{"resampling", Strategy{StrategyKind::kAllRegular, 0.5}, true};
  }
  Strategy s = Strategy::parse(name);
  return SimPolicy{s.name(), s, false};
}

SimReport run_simulation(const Dataset& ds, const SimPolicy& policy,
                         const SimConfig& cfg) {
  if (cfg.iters < 1) throw InvalidArgument("iters must be >= 1");
  if (cfg.balance_window < 1) throw InvalidArgument("balance window must be >= 1");
  const CountTables tables = build_count_tables(ds, cfg.k, cfg.tiny_filter);

  ControllerConfig ccfg{cfg.tau, policy.strategy, cfg.k, mix_seed(cfg.seed, 2)};
  FeedbackController controller(ccfg);
  BatchSampler sampler(ds.image_ids(), mix_seed(cfg.seed, 0));
  SurrogateModel model(cfg.surrogate, mix_seed(cfg.seed, 1));
  const Strategy reference{StrategyKind::kRegLoss, 0.5};

  SimReport rep;
  rep.policy = policy.label;
  rep.seed = cfg.seed;
  rep.trace.reserve(cfg.iters);

  std::vector<PerScale<double>> window(cfg.balance_window, PerScale<double>{});
  PerScale<double> window_sum{};
  double balance_sum = 0.0;
  double rs_sum = 0.0;
  std::size_t rs_defined = 0;
  std::size_t rs_low = 0;
  std::size_t collages = 0;

  Decision decision{0, Mode::kRegular, std::nullopt};
  for (int t = 0; t < cfg.iters; ++t) {
    const BatchPlan plan = sampler.next_batch(decision, cfg.batch_size, cfg.k);
    const bool collage = plan.mode == Mode::kCollage;
    const auto& table = collage ? tables.collage : tables.regular;
    Counts counts{};
    for (const auto& group : plan.groups) {
      for (ImageId id : group) {
        const Counts& c = table.at(id);
        for (std::size_t s = 0; s < kNumScales; ++s) counts[s] += c[s];
        if (collage) rep.tiny_dropped += tables.tiny.at(id);
      }
    }

    LossReport report = model.report(t, counts);
    if (policy.resampling) {
      apply_resampling(report.reg);
      apply_resampling(report.cls);
    }
    model.expose(counts);
    const BatchComposition composition{t, counts};
    const std::optional<double> r_s = compute_ratio(report, composition, reference);

    SimStep step;
    step.iter = t;
    step.mode = plan.mode;
    step.r_s = r_s;
    step.counts = counts;
    step.exposure = model.exposure();
    PerScale<double>& slot = window[static_cast<std::size_t>(t) % cfg.balance_window];
    for (std::size_t s = 0; s < kNumScales; ++s) {
      step.loss[s] = report.cls[s] + report.reg[s];
      window_sum[s] += step.loss[s] - slot[s];
      slot[s] = step.loss[s];
    }
    // Re-summing the window avoids drift from the running difference.
    if (t % 4096 == 4095) {
      window_sum = {};
      for (const auto& w : window) {
        for (std::size_t s = 0; s < kNumScales; ++s) window_sum[s] += w[s];
      }
    }
    const double total = window_sum[0] + window_sum[1] + window_sum[2];
    if (total > 0.0) {
      double min_share = 1.0;
      for (std::size_t s = 0; s < kNumScales; ++s) {
        step.share[s] = std::max(0.0, window_sum[s]) / total;
        min_share = std::min(min_share, step.share[s]);
      }
      balance_sum += min_share * 3.0;
    }
    if (r_s) {
      rs_sum += *r_s;
      ++rs_defined;
      if (*r_s <= cfg.tau) ++rs_low;
    }
    if (collage) ++collages;

    decision = controller.observe(report, composition);
    rep.trace.push_back(step);
  }
  rep.balance = balance_sum / cfg.iters;
  rep.mean_r_s = rs_defined ? rs_sum / static_cast<double>(rs_defined) : 0.0;
  rep.low_fraction =
      rs_defined ? static_cast<double>(rs_low) / static_cast<double>(rs_defined) : 0.0;
  rep.collage_fraction = static_cast<double>(collages) / cfg.iters;
  rep.images_consumed = sampler.consumed();
  return rep;
}

std::vector<SimReport> run_simulations(const Dataset& ds,
                                       const std::vector<SimPolicy>& policies,
                                       const SimConfig& cfg,
                                       const std::vector<std::uint64_t>& seeds,
                                       int jobs) {
  const std::size_t n = policies.size() * seeds.size();
  std::vector<SimReport> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        SimConfig c = cfg;
        c.seed = seeds[i % seeds.size()];
        out[i] = run_simulation(ds, policies[i / seeds.size()], c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<PolicySummary> summarize(const std::vector<SimReport>& reports) {
  std::vector<std::string> order;
  for (const SimReport& r : reports) {
    if (std::find(order.begin(), order.end(), r.policy) == order.end()) {
      order.push_back(r.policy);
    }
  }
  std::vector<PolicySummary> out;
  for (const std::string& p : order) {
    std::vector<double> bal, rs, low, col, img;
    for (const SimReport& r : reports) {
      if (r.policy != p) continue;
      bal.push_back(r.balance);
      rs.push_back(r.mean_r_s);
      low.push_back(r.low_fraction);
      col.push_back(r.collage_fraction);
      img.push_back(static_cast<double>(r.images_consumed));
    }
    out.push_back(PolicySummary{p, bal.size(), median(bal), median(rs),
                                median(low), median(col), median(img)});
  }
  return out;
}

void write_sim_trace_csv(std::ostream& out, const SimReport& report) {
  out << "iter,mode,r_s,count_s,count_m,count_l,exposure_s,exposure_m,"
         "exposure_l,loss_s,loss_m,loss_l,share_s,share_m,share_l\n";
  for (const SimStep& s : report.trace) {
    out << s.iter << ',' << to_string(s.mode) << ','
        << (s.r_s ? format_real(*s.r_s) : std::string());
    for (auto v : s.counts) out << ',' << v;
    for (auto v : s.exposure) out << ',' << v;
    for (auto v : s.loss) out << ',' << format_real(v);
    for (auto v : s.share) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_sim_runs_csv(std::ostream& out, const std::vector<SimReport>& reports) {
  out << "policy,seed,balance,mean_r_s,low_fraction,collage_fraction,"
         "images_consumed,tiny_dropped\n";
  for (const SimReport& r : reports) {
    out << r.policy << ',' << r.seed << ',' << format_real(r.balance) << ','
        << format_real(r.mean_r_s) << ',' << format_real(r.low_fraction) << ','
        << format_real(r.collage_fraction) << ',' << r.images_consumed << ','
        << r.tiny_dropped << '\n';
  }
}

void write_sim_summary_csv(std::ostream& out,
                           const std::vector<PolicySummary>& summary) {
  out << "policy,runs,median_balance,median_mean_r_s,median_low_fraction,"
         "median_collage_fraction,median_images_consumed\n";
  for (const PolicySummary& p : summary) {
    out << p.policy << ',' << p.runs << ',' << format_real(p.balance) << ','
        << format_real(p.mean_r_s) << ',' << format_real(p.low_fraction) << ','
        << format_real(p.collage_fraction) << ',' << format_real(p.images_consumed)
        << '\n';
  }
}

}  // namespace dst
