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

#include "dst/protocol.hpp"

#include <cmath>

#include "json.hpp"

namespace dst {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr const char* kScaleKeys[kNumScales] = {"s", "m", "l"};

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ProtocolError(std::string("missing field '") + key + "'");
  return *it;
}

std::int64_t get_int(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number_integer()) {
    throw ProtocolError(std::string("field '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

double get_real(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number()) {
    throw ProtocolError(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

template <typename T>
PerScale<T> get_scales(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_object()) {
    throw ProtocolError(std::string("field '") + key + "' must be an object");
  }
  PerScale<T> out{};
  for (std::size_t s = 0; s < kNumScales; ++s) {
    if constexpr (std::is_integral_v<T>) {
      out[s] = get_int(v, kScaleKeys[s]);
    } else {
      out[s] = get_real(v, kScaleKeys[s]);
    }
  }
  return out;
}

template <typename T>
ojson scales_json(const PerScale<T>& v) {
  ojson o = ojson::object();
  for (std::size_t s = 0; s < kNumScales; ++s) o[kScaleKeys[s]] = v[s];
  return o;
}

HelloMsg parse_hello(const json& j) {
  HelloMsg h;
  const json& ds = field(j, "dataset");
  if (!ds.is_string()) throw ProtocolError("field 'dataset' must be a string");
  h.dataset = ds.get<std::string>();
  const std::int64_t b = get_int(j, "batch_size");
  const std::int64_t k = get_int(j, "k");
  if (b < 1 || b > (1 << 20)) throw ProtocolError("batch_size must be >= 1");
  if (k < 0 || k > 1024) throw ProtocolError("k must be a perfect square in {1,4,9}");
  h.batch_size = static_cast<int>(b);
  h.k = static_cast<int>(k);
  h.tau = get_real(j, "tau");
  const json& st = field(j, "strategy");
  if (!st.is_string()) throw ProtocolError("field 'strategy' must be a string");
  h.strategy = st.get<std::string>();
  const json& seed = field(j, "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ProtocolError("field 'seed' must be a non-negative integer");
  }
  h.seed = seed.get<std::uint64_t>();
  const json& tf = field(j, "tiny_filter");
  if (!tf.is_boolean()) throw ProtocolError("field 'tiny_filter' must be a boolean");
  h.tiny_filter = tf.get<bool>();
  if (j.contains("random_p")) h.random_p = get_real(j, "random_p");
  return h;
}

LossReportMsg parse_loss_report(const json& j) {
  LossReportMsg m;
  m.report.iter = get_int(j, "iter");
  m.report.cls = get_scales<double>(j, "cls");
  m.report.reg = get_scales<double>(j, "reg");
  m.composition.iter = m.report.iter;
  m.composition.instance_counts = get_scales<std::int64_t>(j, "counts");
  return m;
}

PlanMsg parse_plan(const json& j) {
  PlanMsg m;
  m.plan.iter = get_int(j, "iter");
  const json& mode = field(j, "mode");
  if (!mode.is_string()) throw ProtocolError("field 'mode' must be a string");
  try {
    m.plan.mode = parse_mode(mode.get<std::string>());
  } catch (const Error& e) {
    throw ProtocolError(e.what());
  }
  m.plan.k = static_cast<int>(get_int(j, "k"));
  const json& groups = field(j, "groups");
  if (!groups.is_array()) throw ProtocolError("field 'groups' must be an array");
  for (const json& g : groups) {
    if (!g.is_array()) throw ProtocolError("each group must be an array");
    std::vector<ImageId> ids;
    for (const json& id : g) {
      if (!id.is_number_integer()) throw ProtocolError("image ids must be integers");
      ids.push_back(ImageId{id.get<std::int64_t>()});
    }
    m.plan.groups.push_back(std::move(ids));
  }
  m.plan.batch_size = static_cast<int>(m.plan.groups.size());
  if (j.contains("files")) {
    for (const json& f : field(j, "files")) {
      if (!f.is_string()) throw ProtocolError("files must be strings");
      m.files.push_back(f.get<std::string>());
    }
  }
  return m;
}

StatsMsg parse_stats(const json& j) {
  StatsMsg s;
  s.next_iter = get_int(j, "next_iter");
  s.observations = static_cast<std::uint64_t>(get_int(j, "observations"));
  s.collage_plans = static_cast<std::uint64_t>(get_int(j, "collage_plans"));
  s.images_consumed = static_cast<std::uint64_t>(get_int(j, "images_consumed"));
  s.epoch = static_cast<std::uint64_t>(get_int(j, "epoch"));
  const json& r = field(j, "last_r_s");
  if (!r.is_null()) s.last_r_s = get_real(j, "last_r_s");
  return s;
}

}  // namespace

Message parse_message(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ProtocolError("malformed JSON");
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  const json& type = field(j, "type");
  if (!type.is_string()) throw ProtocolError("field 'type' must be a string");
  const std::string t = type.get<std::string>();
  if (t == "hello") return parse_hello(j);
  if (t == "loss_report") return parse_loss_report(j);
  if (t == "plan") return parse_plan(j);
  if (t == "stats_request") return StatsRequestMsg{};
  if (t == "stats") return parse_stats(j);
  if (t == "error") {
    const json& r = field(j, "reason");
    if (!r.is_string()) throw ProtocolError("field 'reason' must be a string");
    return ErrorMsg{r.get<std::string>()};
  }
  if (t == "bye") return ByeMsg{};
  throw ProtocolError("unknown message type '" + t + "'");
}

std::string serialize(const Message& msg) {
  ojson j = ojson::object();
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HelloMsg>) {
          j["type"] = "hello";
          j["dataset"] = m.dataset;
          j["batch_size"] = m.batch_size;
          j["k"] = m.k;
          j["tau"] = m.tau;
          j["strategy"] = m.strategy;
          j["seed"] = m.seed;
          j["tiny_filter"] = m.tiny_filter;
          if (m.random_p) j["random_p"] = *m.random_p;
        } else if constexpr (std::is_same_v<T, LossReportMsg>) {
          j["type"] = "loss_report";
          j["iter"] = m.report.iter;
          j["cls"] = scales_json(m.report.cls);
          j["reg"] = scales_json(m.report.reg);
          j["counts"] = scales_json(m.composition.instance_counts);
        } else if constexpr (std::is_same_v<T, PlanMsg>) {
          j["type"] = "plan";
          j["iter"] = m.plan.iter;
          j["mode"] = to_string(m.plan.mode);
          j["k"] = m.plan.k;
          ojson groups = ojson::array();
          for (const auto& g : m.plan.groups) {
            ojson ids = ojson::array();
            for (ImageId id : g) ids.push_back(raw(id));
            groups.push_back(std::move(ids));
          }
          j["groups"] = std::move(groups);
          if (!m.files.empty()) j["files"] = m.files;
        } else if constexpr (std::is_same_v<T, StatsRequestMsg>) {
          j["type"] = "stats_request";
        } else if constexpr (std::is_same_v<T, StatsMsg>) {
          j["type"] = "stats";
          j["next_iter"] = m.next_iter;
          j["observations"] = m.observations;
          j["collage_plans"] = m.collage_plans;
          j["images_consumed"] = m.images_consumed;
          j["epoch"] = m.epoch;
          if (m.last_r_s) {
            j["last_r_s"] = *m.last_r_s;
          } else {
            j["last_r_s"] = nullptr;
          }
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          j["type"] = "error";
          j["reason"] = m.reason;
        } else {
          j["type"] = "bye";
        }
      },
      msg);
  return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

}  // namespace dst
