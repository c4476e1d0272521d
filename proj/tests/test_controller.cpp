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

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dst/controller.hpp"

namespace dst {
namespace {

LossReport reg_report(std::int64_t iter, double s, double m, double l) {
  LossReport r;
  r.iter = iter;
  r.reg = {s, m, l};
  r.cls = {s, m, l};
  return r;
}

BatchComposition counts(std::int64_t iter, std::int64_t s = 1, std::int64_t m = 1,
                        std::int64_t l = 1) {
  return BatchComposition{iter, {s, m, l}};
}

Strategy strat(std::string_view name) { return Strategy::parse(name); }

ControllerConfig config(std::string_view strategy, double tau = 0.1) {
  ControllerConfig c;
  c.tau = tau;
  c.strategy = strat(strategy);
  return c;
}

TEST_CASE("ratio under each strategy") {
  LossReport r;
  r.reg = {0.2, 0.8, 1.0};
  r.cls = {0.1, 0.4, 0.5};
  CHECK(*compute_ratio(r, counts(0), strat("reg_loss")) == doctest::Approx(0.1));
  CHECK(*compute_ratio(r, counts(0), strat("cls_loss")) == doctest::Approx(0.1));
  LossReport j;
  j.cls = {0.1, 0.4, 0.5};
  j.reg = {0.1, 0.4, 0.5};
  CHECK(*compute_ratio(j, counts(0), strat("joint_loss")) == doctest::Approx(0.1));
  CHECK(*compute_ratio(r, counts(0, 2, 3, 5), strat("input_ratio")) == doctest::Approx(0.2));
  CHECK(!compute_ratio(r, counts(0), strat("all_regular")));
  CHECK(!compute_ratio(r, counts(0), strat("all_collage")));
  CHECK(!compute_ratio(r, counts(0), strat("random")));
}

TEST_CASE("joint ratio weighs both tasks") {
  LossReport r;
  r.cls = {1.0, 1.0, 0.0};
  r.reg = {0.0, 1.0, 1.0};
  // (1 + 0) / (2 + 2)
  CHECK(*compute_ratio(r, counts(0), strat("joint_loss")) == 0.25);
}

TEST_CASE("zero denominator is undefined") {
  CHECK(!compute_ratio(reg_report(0, 0, 0, 0), counts(0), strat("reg_loss")));
  CHECK(!compute_ratio(reg_report(0, 1, 1, 1), counts(0, 0, 0, 0), strat("input_ratio")));
}

TEST_CASE("invalid reports are rejected") {
  CHECK_THROWS_AS(compute_ratio(reg_report(0, -0.1, 1, 1), counts(0), strat("reg_loss")),
                  InvalidArgument);
  CHECK_THROWS_AS(compute_ratio(reg_report(0, std::nan(""), 1, 1), counts(0), strat("reg_loss")),
                  InvalidArgument);
  CHECK_THROWS_AS(compute_ratio(reg_report(0, std::numeric_limits<double>::infinity(), 1, 1),
                                counts(0), strat("reg_loss")),
                  InvalidArgument);
  CHECK_THROWS_AS(compute_ratio(reg_report(0, 1, 1, 1), counts(1), strat("reg_loss")),
                  InvalidArgument);
  CHECK_THROWS_AS(compute_ratio(reg_report(0, 1, 1, 1), counts(0, -1, 1, 1), strat("input_ratio")),
                  InvalidArgument);
}

TEST_CASE("threshold decisions") {
  Rng rng(1);
  const ControllerConfig c = config("reg_loss");
  CHECK(decide(c, 1, 0.08, rng).mode == Mode::kCollage);
  CHECK(decide(c, 1, 0.10, rng).mode == Mode::kCollage);
  CHECK(decide(c, 1, 0.25, rng).mode == Mode::kRegular);
  CHECK(decide(c, 1, std::nullopt, rng).mode == Mode::kRegular);
  CHECK(decide(c, 7, 0.0, rng).iter == 7);
}

TEST_CASE("golden threshold table") {
  const double eps_above = std::nextafter(0.1, 1.0);
  const double rs[] = {0.0, 0.05, 0.1, eps_above, 0.25, 1.0};
  const Mode want[] = {Mode::kCollage, Mode::kCollage, Mode::kCollage,
                       Mode::kRegular, Mode::kRegular, Mode::kRegular};
  Rng rng(0);
  for (int i = 0; i < 6; ++i) {
    CHECK(decide(config("reg_loss"), 1, rs[i], rng).mode == want[i]);
  }
}

TEST_CASE("static strategies ignore feedback") {
  FeedbackController reg(config("all_regular"));
  FeedbackController col(config("all_collage"));
  for (int t = 0; t < 20; ++t) {
    CHECK(reg.observe(reg_report(t, 0, 1, 1), counts(t)).mode == Mode::kRegular);
    CHECK(col.observe(reg_report(t, 1, 0, 0), counts(t)).mode == Mode::kCollage);
  }
}

TEST_CASE("first observation decides the next iteration") {
  FeedbackController c(config("reg_loss"));
  const Decision d = c.observe(reg_report(0, 0.05, 0.5, 0.45), counts(0));
  CHECK(d.iter == 1);
  CHECK(d.mode == Mode::kCollage);
  CHECK(*d.r_s == doctest::Approx(0.05));
}

TEST_CASE("alternating feedback gives an alternating trace") {
  FeedbackController c(config("reg_loss"));
  for (int t = 0; t < 100; ++t) {
    const double s = t % 2 == 0 ? 0.05 : 0.5;
    c.observe(reg_report(t, s, (1.0 - s) / 2, (1.0 - s) / 2), counts(t));
  }
  REQUIRE(c.trace().size() == 100);
  for (int t = 0; t < 100; ++t) {
    // Replay: r_s <= 0.1 selects collage for t + 1.
    const double s = t % 2 == 0 ? 0.05 : 0.5;
    const Mode want = s <= 0.1 ? Mode::kCollage : Mode::kRegular;
    CHECK(c.trace()[t].iter == t);
    CHECK(c.trace()[t].mode == want);
  }
}

TEST_CASE("out-of-order observations leave state unchanged") {
  FeedbackController c(config("reg_loss"));
  c.observe(reg_report(0, 1, 1, 1), counts(0));
  c.observe(reg_report(1, 1, 1, 1), counts(1));
  CHECK_THROWS_WITH_AS(c.observe(reg_report(1, 1, 1, 1), counts(1)),
                       doctest::Contains("out-of-order"), InvalidArgument);
  CHECK_THROWS_AS(c.observe(reg_report(0, 1, 1, 1), counts(0)), InvalidArgument);
  CHECK_THROWS_AS(c.observe(reg_report(2, -1, 1, 1), counts(2)), InvalidArgument);
  CHECK(c.observations() == 2);
  CHECK(c.trace().size() == 2);
  CHECK(*c.last_iter() == 1);
  CHECK(c.observe(reg_report(5, 1, 1, 1), counts(5)).iter == 6);
}

TEST_CASE("random strategy is seeded and hits its probability") {
  auto run = [](std::uint64_t seed, double p) {
    ControllerConfig c = config("random");
    c.strategy.random_p = p;
    c.rng_seed = seed;
    FeedbackController fc(c);
    std::vector<Mode> modes;
    for (int t = 0; t < 20000; ++t) modes.push_back(fc.observe(reg_report(t, 1, 1, 1), counts(t)).mode);
    return modes;
  };
  CHECK(run(3, 0.5) == run(3, 0.5));
  CHECK(run(3, 0.5) != run(4, 0.5));
  const auto m = run(11, 0.3);
  const double frac = std::count(m.begin(), m.end(), Mode::kCollage) / 20000.0;
  // Binomial sd is about 0.0032.
  CHECK(frac == doctest::Approx(0.3).epsilon(0.05));
  for (Mode x : run(1, 0.0)) CHECK(x == Mode::kRegular);
  for (Mode x : run(1, 1.0)) CHECK(x == Mode::kCollage);
}

TEST_CASE("ratios are invariant to loss scale") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 2.0), c(1e-3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    LossReport r;
    r.cls = {u(gen), u(gen), u(gen)};
    r.reg = {u(gen), u(gen), u(gen)};
    const double k = c(gen);
    LossReport s = r;
    for (auto& v : s.cls) v *= k;
    for (auto& v : s.reg) v *= k;
    for (const char* name : {"reg_loss", "cls_loss", "joint_loss"}) {
      const double a = *compute_ratio(r, counts(0), strat(name));
      const double b = *compute_ratio(s, counts(0), strat(name));
      CHECK(std::fabs(a - b) <= 1e-12);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      Rng rng(0);
      // Away from the threshold the decision must agree.
      if (std::fabs(a - 0.1) > 1e-9) {
        CHECK(decide(config(name), 1, a, rng).mode == decide(config(name), 1, b, rng).mode);
      }
    }
  }
}

TEST_CASE("decision is monotone in r_s") {
  Rng rng(0);
  for (double tau : {0.0, 0.05, 0.1, 0.5, 1.0}) {
    bool seen_regular = false;
    for (int i = 0; i <= 1000; ++i) {
      const Mode m = decide(config("reg_loss", tau), 1, i / 1000.0, rng).mode;
      if (m == Mode::kRegular) seen_regular = true;
      if (seen_regular) CHECK(m == Mode::kRegular);
    }
  }
}

TEST_CASE("same observations give the same decisions") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LossReport> reports;
  for (int t = 0; t < 500; ++t) reports.push_back(reg_report(t, 0.3 * u(gen), u(gen), u(gen)));
  for (const char* name : {"reg_loss", "random"}) {
    FeedbackController a(config(name)), b(config(name));
    for (const auto& r : reports) {
      CHECK(a.observe(r, counts(r.iter)).mode == b.observe(r, counts(r.iter)).mode);
    }
  }
}

TEST_CASE("trace csv") {
  FeedbackController c(config("reg_loss"));
  c.observe(reg_report(0, 0.25, 0.5, 0.25), counts(0));
  c.observe(reg_report(1, 0, 0, 0), counts(1));
  c.observe(reg_report(2, 0.1, 0.45, 0.45), counts(2));
  std::ostringstream os;
  c.write_trace_csv(os);
  CHECK(os.str() ==
        "iter,r_s,mode,strategy,tau\n"
        "0,0.25,regular,reg_loss,0.1\n"
        "1,,regular,reg_loss,0.1\n"
        "2,0.1,collage,reg_loss,0.1\n");
}

TEST_CASE("bounded trace keeps the newest entries") {
  FeedbackController c(config("reg_loss"), 3);
  for (int t = 0; t < 10; ++t) c.observe(reg_report(t, 1, 1, 1), counts(t));
  REQUIRE(c.trace().size() == 3);
  CHECK(c.trace().front().iter == 7);
  CHECK(c.observations() == 10);
}

TEST_CASE("strategy names") {
  for (const char* n : {"all_regular", "all_collage", "random", "input_ratio",
                        "cls_loss", "reg_loss", "joint_loss"}) {
    CHECK(strat(n).name() == n);
  }
  CHECK(strat("random:0.25").random_p == 0.25);
  CHECK(strat("random:0.25").name() == "random:0.25");
  CHECK(strat("reg_loss").is_loss_feedback());
  CHECK(strat("input_ratio").is_feedback());
  CHECK(!strat("input_ratio").is_loss_feedback());
  CHECK(!strat("random").is_feedback());
  CHECK_THROWS_AS(strat("reg_loss:0.3"), InvalidArgument);
  CHECK_THROWS_AS(strat("random:x"), InvalidArgument);
  CHECK_THROWS_AS(strat("focal"), InvalidArgument);
}

TEST_CASE("config validation") {
  ControllerConfig c;
  CHECK(c.tau == 0.1);
  CHECK(c.k == 4);
  CHECK(c.strategy.kind == StrategyKind::kRegLoss);
  c.validate();
  c.tau = 1.5;
  CHECK_THROWS_WITH_AS(c.validate(), "tau out of range", InvalidArgument);
  c.tau = -0.01;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.tau = 0.1;
  c.k = 5;
  CHECK_THROWS_WITH_AS(c.validate(), "k must be a perfect square in {1,4,9}", InvalidArgument);
  c.k = 9;
  c.strategy = strat("random:1.5");
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

}  // namespace
}  // namespace dst
