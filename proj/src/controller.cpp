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

#include "dst/controller.hpp"

#include <charconv>
#include <cmath>

namespace dst {

namespace {

struct NamedKind {
  std::string_view name;
  StrategyKind kind;
};

constexpr NamedKind kStrategyNames[] = {
    {"all_regular", StrategyKind::kAllRegular},
    {"all_collage", StrategyKind::kAllCollage},
    {"random", StrategyKind::kRandom},
    {"input_ratio", StrategyKind::kInputRatio},
    {"cls_loss", StrategyKind::kClsLoss},
    {"reg_loss", StrategyKind::kRegLoss},
    {"joint_loss", StrategyKind::kJointLoss},
};

std::optional<double> proportion(double small, double total) {
  if (!(total > 0.0)) return std::nullopt;
  return small / total;
}

void check_losses(const PerScale<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) {
      throw InvalidArgument(std::string(what) +
                            " loss values must be finite and non-negative");
    }
  }
}

}  // namespace

Strategy Strategy::parse(std::string_view name) {
  Strategy s;
  std::string_view base = name;
  std::optional<double> p;
  if (auto colon = name.find(':'); colon != std::string_view::npos) {
    base = name.substr(0, colon);
    const std::string_view arg = name.substr(colon + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), v);
    if (ec != std::errc() || ptr != arg.data() + arg.size()) {
      throw InvalidArgument("bad strategy argument in '" + std::string(name) + "'");
    }
    p = v;
  }
  for (const NamedKind& nk : kStrategyNames) {
    if (nk.name == base) {
      s.kind = nk.kind;
      if (p) {
        if (s.kind != StrategyKind::kRandom) {
          throw InvalidArgument("only random takes an argument: '" +
                                std::string(name) + "'");
        }
        s.random_p = *p;
      }
      return s;
    }
  }
  throw InvalidArgument("unknown strategy '" + std::string(name) + "'");
}

std::string Strategy::name() const {
  for (const NamedKind& nk : kStrategyNames) {
    if (nk.kind == kind) {
      if (kind == StrategyKind::kRandom && random_p != 0.5) {
        return std::string(nk.name) + ":" + format_real(random_p);
      }
      return std::string(nk.name);
    }
  }
  return "?";
}

bool Strategy::is_feedback() const {
  return kind == StrategyKind::kInputRatio || is_loss_feedback();
}

bool Strategy::is_loss_feedback() const {
  return kind == StrategyKind::kClsLoss || kind == StrategyKind::kRegLoss ||
         kind == StrategyKind::kJointLoss;
}

void ControllerConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau out of range");
  if (k != 1 && k != 4 && k != 9) {
    throw InvalidArgument("k must be a perfect square in {1,4,9}");
  }
  if (strategy.kind == StrategyKind::kRandom &&
      !(strategy.random_p >= 0.0 && strategy.random_p <= 1.0)) {
    throw InvalidArgument("random probability out of range");
  }
}

std::optional<double> compute_ratio(const LossReport& report,
                                    const BatchComposition& composition,
                                    const Strategy& strategy) {
  if (report.iter != composition.iter) {
    throw InvalidArgument("loss report and batch composition differ in iter");
  }
  check_losses(report.cls, "cls");
  check_losses(report.reg, "reg");
  for (std::int64_t n : composition.instance_counts) {
    if (n < 0) throw InvalidArgument("instance counts must be non-negative");
  }
  const auto sum = [](const PerScale<double>& v) { return v[0] + v[1] + v[2]; };
  const std::size_t s = index(ScaleClass::kSmall);
  switch (strategy.kind) {
    case StrategyKind::kRegLoss:
      return proportion(report.reg[s], sum(report.reg));
    case StrategyKind::kClsLoss:
      return proportion(report.cls[s], sum(report.cls));
    case StrategyKind::kJointLoss:
      return proportion(report.cls[s] + report.reg[s],
                        sum(report.cls) + sum(report.reg));
    case StrategyKind::kInputRatio: {
      const auto& n = composition.instance_counts;
      return proportion(static_cast<double>(n[s]),
                        static_cast<double>(n[0] + n[1] + n[2]));
    }
    case StrategyKind::kAllRegular:
    case StrategyKind::kAllCollage:
    case StrategyKind::kRandom:
      break;
  }
  return std::nullopt;
}

Decision decide(const ControllerConfig& cfg, std::int64_t next_iter,
                std::optional<double> ratio, Rng& rng) {
  Decision d{next_iter, Mode::kRegular, ratio};
  switch (cfg.strategy.kind) {
    case StrategyKind::kAllRegular:
      break;
    case StrategyKind::kAllCollage:
      d.mode = Mode::kCollage;
      break;
    case StrategyKind::kRandom:
      d.mode = rng.bernoulli(cfg.strategy.random_p) ? Mode::kCollage
                                                    : Mode::kRegular;
      break;
    default:
      if (ratio && *ratio <= cfg.tau) d.mode = Mode::kCollage;
      break;
  }
  return d;
}

FeedbackController::FeedbackController(ControllerConfig cfg,
                                       std::size_t trace_capacity)
    : cfg_(cfg), rng_(cfg.rng_seed), capacity_(trace_capacity) {
  cfg_.validate();
}

Decision FeedbackController::observe(const LossReport& report,
                                     const BatchComposition& composition) {
  if (last_iter_ && report.iter <= *last_iter_) {
    throw InvalidArgument("out-of-order iteration " + std::to_string(report.iter) +
                          " after " + std::to_string(*last_iter_));
  }
  const std::optional<double> ratio =
      compute_ratio(report, composition, cfg_.strategy);
  Decision d = decide(cfg_, report.iter + 1, ratio, rng_);
  last_iter_ = report.iter;
  ++observations_;
  trace_.push_back(TraceEntry{report.iter, ratio, d.mode});
  if (capacity_ > 0 && trace_.size() > capacity_) trace_.pop_front();
  return d;
}

void FeedbackController::write_trace_csv(std::ostream& out) const {
  out << "iter,r_s,mode,strategy,tau\n";
  const std::string strategy = cfg_.strategy.name();
  const std::string tau = format_real(cfg_.tau);
  for (const TraceEntry& e : trace_) {
    out << e.iter << ',' << (e.r_s ? format_real(*e.r_s) : std::string()) << ','
        << to_string(e.mode) << ',' << strategy << ',' << tau << '\n';
  }
}

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace dst
