// Copyright 2026 The hmgame Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hmgame/experiment_config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace hmgame {
namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("unknown field '" + key + "' in " + where);
    }
  }
}

Vector VectorFromJson(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), values.size());
}

json VectorToJson(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Matrix MatrixFromJson(const json& j, Dims dims) {
  Matrix m(dims.d_m, dims.d_h);
  if (!j.is_array() || static_cast<int>(j.size()) != dims.d_m) {
    throw std::invalid_argument("base_gain must have d_m rows");
  }
  for (int r = 0; r < dims.d_m; ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != dims.d_h) {
      throw std::invalid_argument("base_gain rows must have d_h entries");
    }
    for (int c = 0; c < dims.d_h; ++c) m(r, c) = row[c];
  }
  return m;
}

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

const char* SchemeName(InitScheme s) {
  switch (s) {
    case InitScheme::kCircle8:
      return "circle8";
    case InitScheme::kBall:
      return "ball";
    case InitScheme::kSphere:
      return "sphere";
    case InitScheme::kFixed:
      return "fixed";
  }
  return "?";
}

InitScheme ParseScheme(const std::string& s) {
  if (s == "circle8") return InitScheme::kCircle8;
  if (s == "ball") return InitScheme::kBall;
  if (s == "sphere") return InitScheme::kSphere;
  if (s == "fixed") return InitScheme::kFixed;
  throw std::invalid_argument("unknown init scheme '" + s + "'");
}

}  // namespace

double DisplayScaling::Radius(double cost) const {
  return std::min(r_max, r_min + gain * cost);
}

ExperimentConfig ExperimentConfig::Defaults(Dims dims) {
  ExperimentConfig c;
  c.learner = LearnerConfig::Defaults(dims);
  c.trial_seconds = DefaultTrialSeconds(dims);
  c.init.scheme = (dims == Dims(1, 1)) ? InitScheme::kCircle8 : InitScheme::kBall;
  return c;
}

ExperimentConfig ExperimentConfig::FromJson(const json& j) {
  RejectUnknownKeys(j,
                    {"schema_version", "experiment_id", "dims", "iterations",
                     "delta", "alpha", "base_gain", "averaged_update",
                     "trial_seconds", "sample_rate_hz",
                     "reduce_window_seconds", "init", "seed",
                     "mirror_attention_checks", "display",
                     "validation_tolerance", "countdown_seconds"},
                    "experiment config");
  if (j.value("schema_version", -1) != kConfigSchemaVersion) {
    throw std::invalid_argument("experiment config schema_version must be " +
                                std::to_string(kConfigSchemaVersion));
  }
  const Dims dims = Dims::Parse(j.at("dims").get<std::string>());
  ExperimentConfig c = Defaults(dims);
  c.experiment_id = j.value("experiment_id", c.experiment_id);
  c.learner.iterations = j.value("iterations", c.learner.iterations);
  c.learner.delta = j.value("delta", c.learner.delta);
  c.learner.alpha = j.value("alpha", c.learner.alpha);
  if (j.contains("base_gain")) {
    c.learner.base_gain = MatrixFromJson(j.at("base_gain"), dims);
  }
  c.learner.averaged_update =
      j.value("averaged_update", c.learner.averaged_update);
  c.trial_seconds = j.value("trial_seconds", c.trial_seconds);
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.reduce_window_seconds =
      j.value("reduce_window_seconds", c.reduce_window_seconds);
  c.seed = j.value("seed", c.seed);
  c.mirror_attention_checks =
      j.value("mirror_attention_checks", c.mirror_attention_checks);
  c.validation_tolerance =
      j.value("validation_tolerance", c.validation_tolerance);
  c.countdown_seconds = j.value("countdown_seconds", c.countdown_seconds);
  if (j.contains("init")) {
    const json& ji = j.at("init");
    RejectUnknownKeys(ji, {"scheme", "radius", "index", "h_hat", "m_hat"},
                      "init");
    c.init.scheme = ParseScheme(ji.at("scheme").get<std::string>());
    c.init.radius = ji.value("radius", c.init.radius);
    if (ji.contains("index") && !ji.at("index").is_null()) {
      c.init.index = ji.at("index").get<int>();
    }
    if (ji.contains("h_hat")) c.init.h_hat = VectorFromJson(ji.at("h_hat"));
    if (ji.contains("m_hat")) c.init.m_hat = VectorFromJson(ji.at("m_hat"));
  }
  if (j.contains("display")) {
    const json& jd = j.at("display");
    RejectUnknownKeys(jd, {"r_min", "gain", "r_max"}, "display");
    c.display.r_min = jd.value("r_min", c.display.r_min);
    c.display.gain = jd.value("gain", c.display.gain);
    c.display.r_max = jd.value("r_max", c.display.r_max);
  }
  c.Validate();
  return c;
}

json ExperimentConfig::ToJson() const {
  json init_json = {{"scheme", SchemeName(init.scheme)},
                    {"radius", init.radius}};
  if (init.index) init_json["index"] = *init.index;
  if (init.scheme == InitScheme::kFixed) {
    init_json["h_hat"] = VectorToJson(init.h_hat);
    init_json["m_hat"] = VectorToJson(init.m_hat);
  }
  return {{"schema_version", kConfigSchemaVersion},
          {"experiment_id", experiment_id},
          {"dims", learner.dims.ToString()},
          {"iterations", learner.iterations},
          {"delta", learner.delta},
          {"alpha", learner.alpha},
          {"base_gain", MatrixToJson(learner.base_gain)},
          {"averaged_update", learner.averaged_update},
          {"trial_seconds", trial_seconds},
          {"sample_rate_hz", sample_rate_hz},
          {"reduce_window_seconds", reduce_window_seconds},
          {"init", init_json},
          {"seed", seed},
          {"mirror_attention_checks", mirror_attention_checks},
          {"display",
           {{"r_min", display.r_min},
            {"gain", display.gain},
            {"r_max", display.r_max}}},
          {"validation_tolerance", validation_tolerance},
          {"countdown_seconds", countdown_seconds}};
}

void ExperimentConfig::Validate() const {
  learner.Validate();
  if (!(sample_rate_hz > 0.0)) {
    throw std::invalid_argument("sample_rate_hz must be positive");
  }
  if (!(reduce_window_seconds > 0.0) || trial_seconds < reduce_window_seconds) {
    throw std::invalid_argument(
        "trial_seconds must be at least reduce_window_seconds");
  }
  if (!(validation_tolerance >= 0.0)) {
    throw std::invalid_argument("validation_tolerance must be non-negative");
  }
  if (!(display.r_min <= display.r_max) || !(display.gain >= 0.0)) {
    throw std::invalid_argument("display scaling needs r_min <= r_max, gain >= 0");
  }
  const Dims dims = learner.dims;
  switch (init.scheme) {
    case InitScheme::kCircle8:
      if (!(dims == Dims(1, 1))) {
        throw std::invalid_argument("circle8 initialization is 1x1 only");
      }
      if (init.index && (*init.index < 0 || *init.index >= 8)) {
        throw std::invalid_argument("circle8 index must be in [0, 8)");
      }
      break;
    case InitScheme::kFixed:
      if (init.h_hat.size() != dims.d_h || init.m_hat.size() != dims.d_m) {
        throw std::invalid_argument("fixed init must give h_hat and m_hat");
      }
      break;
    default:
      break;
  }
  if (!(init.radius >= 0.0)) {
    throw std::invalid_argument("init radius must be non-negative");
  }
}

Estimate ExperimentConfig::InitialEstimate(int session_ordinal,
                                           uint64_t session_seed) const {
  switch (init.scheme) {
    case InitScheme::kCircle8:
      return InitCirclePoint(init.radius,
                             init.index.value_or(session_ordinal % 8));
    case InitScheme::kBall:
      return InitRandomBall(learner.dims, init.radius, session_seed);
    case InitScheme::kSphere:
      return InitRandomSphere(learner.dims, init.radius, session_seed);
    case InitScheme::kFixed:
      return {init.h_hat, init.m_hat};
  }
  throw std::logic_error("unhandled init scheme");
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return ExperimentConfig::FromJson(j);
}

}  // namespace hmgame
