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

#include <csignal>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "service_fixture.hpp"
#include "test_util.hpp"

namespace dst {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

pid_t spawn(const std::vector<std::string>& args, int in_fd, const fs::path& out,
            const fs::path& err) {
  const pid_t pid = ::fork();
  if (pid == 0) {
    ::dup2(in_fd, 0);
    const int o = ::open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int e = ::open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    ::dup2(o, 1);
    ::dup2(e, 2);
    std::vector<char*> argv;
    std::string bin = DST_BINARY;
    argv.push_back(bin.data());
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    ::execv(bin.c_str(), argv.data());
    ::_exit(127);
  }
  return pid;
}

int wait_code(pid_t pid) {
  int status = 0;
  ::waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

Run run(const testing::TempDir& tmp, const std::vector<std::string>& args,
        const std::string& input = {}) {
  testing::write_file(tmp / "stdin.txt", input);
  const int in = ::open((tmp / "stdin.txt").c_str(), O_RDONLY);
  const pid_t pid = spawn(args, in, tmp / "stdout.txt", tmp / "stderr.txt");
  ::close(in);
  Run r;
  r.code = wait_code(pid);
  r.out = testing::read_file(tmp / "stdout.txt");
  r.err = testing::read_file(tmp / "stderr.txt");
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const std::string kFixtures = DST_FIXTURES;

TEST_CASE("stats prints the table and writes the csv") {
  testing::TempDir tmp;
  const Run r = run(tmp, {"stats", "--dataset", kFixtures + "/stats_two_images.json",
                          "--out", (tmp / "o").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("images 2, instances 3") != std::string::npos);
  CHECK(r.out.find("33.33%") != std::string::npos);
  CHECK(r.out.find("COCO 2017 train reference") != std::string::npos);
  // Shares are 1/3 each; coverage is 1/2 each.
  std::string expect = "scale,instances,instance_share,image_coverage\n";
  const char* third = "0.3333333333333333";
  for (const char* s : {"small", "medium", "large"}) {
    expect += std::string(s) + ",1," + third + ",0.5\n";
  }
  CHECK(testing::read_file(tmp / "o" / "stats.csv") == expect);
}

TEST_CASE("input errors exit with 2") {
  testing::TempDir tmp;
  testing::write_file(tmp / "empty.json", R"({"images":[],"annotations":[],"categories":[]})");
  testing::write_file(tmp / "bad.json", R"({"images":[)");
  Run r = run(tmp, {"build-collage", "--dataset", (tmp / "empty.json").string(), "--images",
                    tmp.path().string(), "--out", (tmp / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("empty dataset") != std::string::npos);
  CHECK(run(tmp, {"stats", "--dataset", (tmp / "bad.json").string()}).code == 2);
  CHECK(run(tmp, {"stats", "--dataset", (tmp / "missing.json").string()}).code == 2);
  CHECK(run(tmp, {"stats"}).code == 2);
  CHECK(run(tmp, {"frobnicate"}).code == 2);
  CHECK(run(tmp, {"simulate", "--out", (tmp / "s").string(), "--k", "5"}).code == 2);
  CHECK(run(tmp, {"simulate", "--out", (tmp / "s").string(), "--tau", "2"}).code == 2);
  CHECK(run(tmp, {"simulate", "--out", (tmp / "s").string(), "--policies", "nope"}).code == 2);
  CHECK(run(tmp, {"serve", "--dataset", (tmp / "bad.json").string()}).code == 2);
  CHECK(run(tmp, {"serve", "--dataset", (tmp / "empty.json").string()}).code == 2);
}

TEST_CASE("build-collage conserves annotations") {
  testing::TempDir tmp;
  const auto ds = testing::write_dataset(tmp.path(), 9, true);
  const Run r = run(tmp, {"build-collage", "--dataset", ds.string(), "--images",
                          (tmp / "images").string(), "--out", (tmp / "o").string(), "--k",
                          "4", "--seed", "5", "--jobs", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "collages 2, annotations 16, dropped_tiny 0, skipped_groups 0, leftover_images 1\n");
  const auto doc = nlohmann::json::parse(testing::read_file(tmp / "o" / "annotations.json"));
  REQUIRE(doc["images"].size() == 2);
  std::set<std::int64_t> used;
  for (const auto& img : doc["images"]) {
    CHECK(img["width"] == 64);
    CHECK(img["height"] == 48);
    REQUIRE(img["source_ids"].size() == 4);
    for (const auto& s : img["source_ids"]) used.insert(s.get<std::int64_t>());
    CHECK(fs::exists(tmp / "o" / "images" / img["file_name"].get<std::string>()));
  }
  CHECK(used.size() == 8);
  // Every source box shrinks by a factor of 4 in area.
  std::multiset<double> areas;
  for (const auto& a : doc["annotations"]) areas.insert(a["area"].get<double>());
  CHECK(areas.count(120.0 / 4) == 8);
  CHECK(areas.count(1200.0 / 4) == 8);
}

TEST_CASE("build-collage tiny filter and skipped groups") {
  testing::TempDir tmp;
  const auto ds = testing::write_dataset(tmp.path(), 8, true);
  // The 10x12 boxes shrink to 30 px^2 and go; the 40x30 ones keep 300 px^2.
  Run r = run(tmp, {"build-collage", "--dataset", ds.string(), "--images",
                    (tmp / "images").string(), "--out", (tmp / "o").string(), "--tiny-filter"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "collages 2, annotations 8, dropped_tiny 8, skipped_groups 0, leftover_images 0\n");
  fs::remove(tmp / "images" / "img_3.png");
  r = run(tmp, {"build-collage", "--dataset", ds.string(), "--images",
                (tmp / "images").string(), "--out", (tmp / "p").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "collages 1, annotations 8, dropped_tiny 0, skipped_groups 1, leftover_images 0\n");
}

TEST_CASE("build-collage with k=1 re-encodes identically") {
  testing::TempDir tmp;
  const auto ds = testing::write_dataset(tmp.path(), 3, true, 37, 21);
  const Run r = run(tmp, {"build-collage", "--dataset", ds.string(), "--images",
                          (tmp / "images").string(), "--out", (tmp / "o").string(), "--k", "1"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(testing::read_file(tmp / "o" / "annotations.json"));
  REQUIRE(doc["images"].size() == 3);
  for (const auto& img : doc["images"]) {
    const auto src = img["source_ids"][0].get<std::int64_t>();
    CHECK(testing::read_file(tmp / "o" / "images" / img["file_name"].get<std::string>()) ==
          testing::read_file(tmp / "images" / ("img_" + std::to_string(src) + ".png")));
  }
}

TEST_CASE("build-collage keeps the source canvas size") {
  testing::TempDir tmp;
  const auto ds = testing::write_dataset(tmp.path(), 4, true, 1216, 800);
  const Run r = run(tmp, {"build-collage", "--dataset", ds.string(), "--images",
                          (tmp / "images").string(), "--out", (tmp / "o").string()});
  REQUIRE(r.code == 0);
  const ImageBuffer img = read_image(tmp / "o" / "images" / "collage_000001.png");
  CHECK(img.width() == 1216);
  CHECK(img.height() == 800);
}

TEST_CASE("serve over stdio") {
  testing::TempDir tmp;
  const auto ds = testing::write_dataset(tmp.path(), 12, false);
  std::string script = serialize(testing::make_hello(ds.string())) + "\n";
  for (int t = 0; t < 5; ++t) script += testing::loss_line(t, 0.0625, 0.5, 0.4375) + "\n";
  script += serialize(ByeMsg{}) + "\n";
  const Run r = run(tmp, {"serve", "--out", (tmp / "o").string()}, script);
  REQUIRE(r.code == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 7);
  for (int i = 0; i < 6; ++i) {
    const auto p = std::get<PlanMsg>(parse_message(ls[static_cast<std::size_t>(i)]));
    CHECK(p.plan.iter == i);
    CHECK(p.plan.mode == (i == 0 ? Mode::kRegular : Mode::kCollage));
  }
  CHECK(ls[6] == serialize(ByeMsg{}));
  CHECK(lines_of(testing::read_file(tmp / "o" / "trace_session_1.csv")).size() == 6);
}

TEST_CASE("SIGINT flushes the trace") {
  testing::TempDir tmp;
  const auto ds = testing::write_dataset(tmp.path(), 12, false);
  int in[2];
  REQUIRE(::pipe(in) == 0);
  const pid_t pid = spawn({"serve", "--out", (tmp / "o").string()}, in[0], tmp / "out.txt",
                          tmp / "err.txt");
  ::close(in[0]);
  std::string script = serialize(testing::make_hello(ds.string())) + "\n" +
                       testing::loss_line(0, 0.5, 0.25, 0.25) + "\n" +
                       testing::loss_line(1, 0.0625, 0.5, 0.4375) + "\n";
  REQUIRE(::write(in[1], script.data(), script.size()) == static_cast<ssize_t>(script.size()));
  for (int i = 0; i < 200 && lines_of(testing::read_file(tmp / "out.txt")).size() < 3; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::kill(pid, SIGINT);
  const int code = wait_code(pid);
  ::close(in[1]);
  CHECK(code == 0);
  CHECK(testing::read_file(tmp / "o" / "trace_session_1.csv") ==
        "iter,r_s,mode,strategy,tau\n"
        "0,0.5,regular,reg_loss,0.1\n"
        "1,0.0625,collage,reg_loss,0.1\n");
}

TEST_CASE("serve bind failure exits with 3") {
  testing::TempDir tmp;
  const Run r = run(tmp, {"serve", "--socket", "/nonexistent-dir/dst.sock"});
  CHECK(r.code == 3);
}

TEST_CASE("simulate writes reproducible outputs") {
  testing::TempDir tmp;
  auto sim = [&](const std::string& dir, const std::string& iters) {
    return run(tmp, {"simulate", "--out", (tmp / dir).string(), "--iters", iters, "--seeds",
                     "2", "--policies", "reg_loss,random:0.25", "--seed", "3"});
  };
  Run r = sim("a", "1");
  REQUIRE(r.code == 0);
  CHECK(lines_of(testing::read_file(tmp / "a" / "traces" / "reg_loss_seed3.csv")).size() == 2);
  CHECK(fs::exists(tmp / "a" / "traces" / "random_0.25_seed4.csv"));
  CHECK(fs::exists(tmp / "a" / "plots" / "shares_reg_loss.svg"));
  CHECK(fs::exists(tmp / "a" / "plots" / "rs_hist_random_0.25.svg"));
  REQUIRE(sim("b", "300").code == 0);
  REQUIRE(sim("c", "300").code == 0);
  for (const char* f : {"runs.csv", "summary.csv", "traces/reg_loss_seed4.csv"}) {
    CHECK(testing::read_file(tmp / "b" / f) == testing::read_file(tmp / "c" / f));
  }
  CHECK(lines_of(testing::read_file(tmp / "b" / "summary.csv")).size() == 3);
}

}  // namespace
}  // namespace dst
