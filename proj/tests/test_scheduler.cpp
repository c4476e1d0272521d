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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "dst/rng.hpp"
#include "dst/scheduler.hpp"

namespace dst {
namespace {

std::vector<ImageId> ids(int n) {
  std::vector<ImageId> out;
  for (int i = 1; i <= n; ++i) out.push_back(ImageId{i});
  return out;
}

Decision regular(std::int64_t iter) { return Decision{iter, Mode::kRegular, std::nullopt}; }
Decision collage(std::int64_t iter) { return Decision{iter, Mode::kCollage, std::nullopt}; }

TEST_CASE("plan shapes") {
  BatchSampler s(ids(20), 1);
  const BatchPlan r = s.next_batch(regular(0), 2, 4);
  CHECK(r.iter == 0);
  CHECK(r.mode == Mode::kRegular);
  REQUIRE(r.groups.size() == 2);
  for (const auto& g : r.groups) CHECK(g.size() == 1);
  const BatchPlan c = s.next_batch(collage(1), 2, 4);
  CHECK(c.iter == 1);
  CHECK(c.k == 4);
  REQUIRE(c.groups.size() == 2);
  for (const auto& g : c.groups) {
    CHECK(g.size() == 4);
    CHECK(std::set<ImageId>(g.begin(), g.end()).size() == 4);
  }
  CHECK(s.consumed() == 10);
}

TEST_CASE("ten images, regular collage regular, replayed") {
  const std::uint64_t seed = 77;
  BatchSampler s(ids(10), seed);
  const BatchPlan a = s.next_batch(regular(0), 2, 4);
  const BatchPlan b = s.next_batch(collage(1), 2, 4);
  const BatchPlan c = s.next_batch(regular(2), 2, 4);

  // Oracle: the stream is the concatenation of successive shuffles drawn
  // from one generator seeded like the sampler.
  Rng rng(seed);
  std::vector<ImageId> p1 = ids(10), p2 = ids(10);
  rng.shuffle(std::span<ImageId>(p1));
  rng.shuffle(std::span<ImageId>(p2));

  CHECK(a.groups == std::vector<std::vector<ImageId>>{{p1[0]}, {p1[1]}});
  CHECK(b.groups == std::vector<std::vector<ImageId>>{{p1[2], p1[3], p1[4], p1[5]},
                                                      {p1[6], p1[7], p1[8], p1[9]}});
  CHECK(c.groups == std::vector<std::vector<ImageId>>{{p2[0]}, {p2[1]}});
  CHECK(s.epoch() == 1);
  CHECK(s.consumed() == 12);
  CHECK(s.cursor() == 2);
}

TEST_CASE("groups stay distinct across a pass boundary") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    BatchSampler s(ids(5), seed);
    for (int t = 0; t < 20; ++t) {
      const BatchPlan p = s.next_batch(collage(t), 1, 4);
      const auto& g = p.groups[0];
      CHECK(std::set<ImageId>(g.begin(), g.end()).size() == 4);
    }
  }
  BatchSampler nine(ids(9), 3);
  for (int t = 0; t < 50; ++t) {
    const BatchPlan p = nine.next_batch(collage(t), 1, 9);
    const auto& g = p.groups[0];
    CHECK(std::set<ImageId>(g.begin(), g.end()).size() == 9);
  }
}

TEST_CASE("random decision streams keep every invariant") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(9, 40)(gen);
    const int b = std::uniform_int_distribution<int>(1, 2)(gen);
    const int k = std::array{1, 4, 9}[gen() % 3];
    if (n < b * k) continue;
    BatchSampler s(ids(n), gen());
    std::uint64_t expect = 0;
    std::vector<ImageId> stream;
    for (int t = 0; t < 60; ++t) {
      const bool col = gen() % 2 == 0;
      const BatchPlan p = s.next_batch(col ? collage(t) : regular(t), b, k);
      expect += static_cast<std::uint64_t>(b) * (col ? k : 1);
      CHECK(p.groups.size() == static_cast<std::size_t>(b));
      for (const auto& g : p.groups) {
        CHECK(g.size() == static_cast<std::size_t>(col ? k : 1));
        CHECK(std::set<ImageId>(g.begin(), g.end()).size() == g.size());
        stream.insert(stream.end(), g.begin(), g.end());
      }
    }
    CHECK(s.consumed() == expect);
    // Each full pass of n ids is a permutation.
    for (std::size_t start = 0; start + n <= stream.size(); start += n) {
      std::set<ImageId> pass(stream.begin() + start, stream.begin() + start + n);
      CHECK(pass.size() == static_cast<std::size_t>(n));
    }
  }
}

TEST_CASE("same seed and decisions give the same plans") {
  BatchSampler a(ids(30), 9), b(ids(30), 9), c(ids(30), 10);
  bool differs = false;
  for (int t = 0; t < 40; ++t) {
    const Decision d = t % 3 == 0 ? collage(t) : regular(t);
    const BatchPlan pa = a.next_batch(d, 2, 4);
    CHECK(pa == b.next_batch(d, 2, 4));
    differs |= !(pa == c.next_batch(d, 2, 4));
  }
  CHECK(differs);
}

TEST_CASE("sampler errors") {
  BatchSampler s(ids(7), 1);
  CHECK_THROWS_AS(s.next_batch(regular(0), 0, 4), InvalidArgument);
  CHECK_THROWS_AS(s.next_batch(regular(0), 1, 5), InvalidArgument);
  CHECK_THROWS_AS(s.next_batch(collage(0), 2, 4), InvalidArgument);
  CHECK_NOTHROW(s.next_batch(regular(0), 7, 4));
  CHECK_THROWS_AS(BatchSampler({}, 1), InvalidArgument);
}

TEST_CASE("rng helpers") {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(5, 3) == mix_seed(5, 3));
  double sum = 0;
  for (int i = 0; i < 20000; ++i) sum += static_cast<double>(r.poisson(2.5));
  CHECK(sum / 20000 == doctest::Approx(2.5).epsilon(0.03));
}

}  // namespace
}  // namespace dst
