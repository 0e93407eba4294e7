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

#include "hmgame/session_service.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "hmgame/stats.h"

namespace hmgame {

using nlohmann::json;

namespace {

// Schema violations end the session.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Content problems in an upload only reject the trial.
class TraceRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::map<std::string, std::set<std::string>>& ClientSchemas() {
  static const auto* schemas = new std::map<std::string, std::set<std::string>>{
      {"join", {"type", "session_id", "seq", "experiment_id", "participant"}},
      {"trial_ready", {"type", "session_id", "seq"}},
      {"trace_upload",
       {"type", "session_id", "seq", "trial_index", "samples", "reduced"}},
  };
  return *schemas;
}

void CheckKeys(const json& j, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!j.is_object()) throw ProtocolError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ProtocolError("unknown field '" + key + "' in " + where);
    }
  }
}

json VectorJson(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector ReadVector(const json& j, int size, const std::string& what) {
  if (!j.is_array()) throw ProtocolError(what + " must be an array");
  if (static_cast<int>(j.size()) != size) {
    throw TraceRejected(what + " must have " + std::to_string(size) +
                        " entries");
  }
  Vector v(size);
  for (int i = 0; i < size; ++i) {
    if (!j[i].is_number()) throw ProtocolError(what + " must hold numbers");
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) throw TraceRejected(what + " is not finite");
  return v;
}

double MaxAbsDiff(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string ToString(SessionStatus status) {
  switch (status) {
    case SessionStatus::kActive:
      return "active";
    case SessionStatus::kCompleted:
      return "completed";
    case SessionStatus::kScreenedOut:
      return "screened_out";
    case SessionStatus::kTerminated:
      return "terminated";
  }
  return "unknown";
}

uint64_t SessionSeed(uint64_t experiment_seed, const std::string& label) {
  // FNV-1a over the label, mixed with the experiment seed.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(experiment_seed ^ SplitMix64(h));
}

class ExperimentSession {
 public:
  ExperimentSession(const ExperimentConfig& config, std::string id,
                    uint64_t seed, const Estimate& init,
                    std::filesystem::path out_dir)
      : config_(config),
        id_(std::move(id)),
        out_dir_(std::move(out_dir)),
        cost_(config.learner.dims),
        plan_(SessionPlan(config.learner.dims, config.learner.iterations)),
        rng_(seed) {
    const Dims dims = config_.learner.dims;
    state_ = {0, init.h_hat, init.m_hat};
    iterates_.push_back(state_);
    log_.dims = dims;
    session_offset_ = kTranslationOffset * RandomSigns(dims.d_h, rng_);
  }

  std::mutex mu;

  std::vector<json> Start() {
    const Dims dims = config_.learner.dims;
    json reply = Make("session_config");
    reply["dims"] = dims.ToString();
    reply["iterations"] = config_.learner.iterations;
    reply["plan_length"] = plan_.size();
    reply["durations"] = {{"trial_seconds", config_.trial_seconds},
                          {"sample_rate_hz", config_.sample_rate_hz},
                          {"reduce_window_seconds",
                           config_.reduce_window_seconds}};
    reply["screen_map"] = {{"extent", 2.0},
                           {"translation_offset", kTranslationOffset}};
    reply["display_scaling"] = {{"r_min", config_.display.r_min},
                                {"gain", config_.display.gain},
                                {"r_max", config_.display.r_max}};
    return {reply};
  }

  std::vector<json> Handle(const json& message) {
    if (status_ != SessionStatus::kActive) {
      return {MakeError("session is " + ToString(status_))};
    }
    try {
      const int seq = message.at("seq").get<int>();
      if (seq != next_client_seq_) {
        throw ProtocolError("expected seq " + std::to_string(next_client_seq_) +
                            ", got " + std::to_string(seq));
      }
      ++next_client_seq_;
      const std::string type = message.at("type").get<std::string>();
      if (type == "trial_ready") {
        CheckKeys(message, ClientSchemas().at(type), type);
        if (phase_ != Phase::kAwaitReady) {
          throw ProtocolError("trial_ready while a trial is running");
        }
        return {BeginTrial()};
      }
      if (type == "trace_upload") {
        if (phase_ != Phase::kAwaitTrace) {
          throw ProtocolError("trace_upload without a running trial");
        }
        return OnTrace(message);
      }
      throw ProtocolError("unexpected message '" + type + "'");
    } catch (const ProtocolError& e) {
      return Terminate(e.what());
    } catch (const json::exception& e) {
      return Terminate(std::string("malformed message: ") + e.what());
    }
  }

  std::vector<json> Terminate(const std::string& why) {
    status_ = SessionStatus::kTerminated;
    error_ = why;
    return {MakeError(why)};
  }

  SessionSnapshot Snapshot() const {
    return {id_, status_, iterates_, log_, error_};
  }

 private:
  enum class Phase { kAwaitReady, kAwaitTrace };

  json Make(const char* type) {
    return {{"type", type}, {"session_id", id_}, {"seq", next_server_seq_++}};
  }

  json MakeError(const std::string& why) {
    json e = Make("error");
    e["message"] = why;
    return e;
  }

  json BeginTrial() {
    const Dims dims = config_.learner.dims;
    const PlannedTrial& planned = plan_[step_];
    if (planned.kind.is_main()) {
      current_ = TrialSpec{};
      current_.policy =
          TrialPolicy(config_.learner, state_, planned.kind.perturbation);
      current_.screen = {RandomSigns(dims.d_h, rng_), session_offset_};
      current_.kind = planned.kind;
    } else {
      current_ = MakeAttentionCheckSpec(dims, config_.trial_seconds,
                                        config_.mirror_attention_checks, rng_);
    }
    current_.duration_seconds = config_.trial_seconds;
    current_.sample_rate_hz = config_.sample_rate_hz;
    current_.reduce_window_seconds = config_.reduce_window_seconds;
    current_index_ = next_trial_index_++;
    phase_ = Phase::kAwaitTrace;

    json start = Make("trial_start");
    start["trial_index"] = current_index_;
    start["kind"] = current_.kind.ToString();
    start["policy"] = {{"gain", MatrixJson(current_.policy.gain)},
                       {"h_hat", VectorJson(current_.policy.h_hat)},
                       {"m_hat", VectorJson(current_.policy.m_hat)}};
    start["mirror_signs"] = VectorJson(current_.screen.mirror_signs);
    start["offset"] = VectorJson(current_.screen.offset);
    start["countdown"] = config_.countdown_seconds;
    start["duration_seconds"] = current_.duration_seconds;
    start["sample_count"] = current_.SampleCount();
    return start;
  }

  TrialRecord Recompute(const json& message) {
    const Dims dims = config_.learner.dims;
    CheckKeys(message, ClientSchemas().at("trace_upload"), "trace_upload");
    if (message.at("trial_index").get<int>() != current_index_) {
      throw ProtocolError("trace for trial " +
                          std::to_string(message.at("trial_index").get<int>()) +
                          ", expected " + std::to_string(current_index_));
    }
    const json& samples = message.at("samples");
    if (!samples.is_array()) throw ProtocolError("samples must be an array");
    const int expected = current_.SampleCount();
    if (static_cast<int>(samples.size()) != expected) {
      throw TraceRejected("expected " + std::to_string(expected) +
                          " samples, got " + std::to_string(samples.size()));
    }
    std::vector<double> times;
    std::vector<Vector> raw;
    times.reserve(expected);
    raw.reserve(expected);
    for (const json& s : samples) {
      CheckKeys(s, {"t", "h_raw", "m", "cost"}, "sample");
      const double t = s.at("t").get<double>();
      if (!std::isfinite(t) || (!times.empty() && t < times.back())) {
        throw TraceRejected("sample times must be finite and non-decreasing");
      }
      times.push_back(t);
      raw.push_back(ReadVector(s.at("h_raw"), dims.d_h, "h_raw"));
    }
    TrialRecord record = RecordTrial(current_, cost_, times, raw);

    const double tol = config_.validation_tolerance;
    for (size_t i = 0; i < samples.size(); ++i) {
      const json& s = samples[i];
      if (s.contains("m") &&
          MaxAbsDiff(ReadVector(s.at("m"), dims.d_m, "m"),
                     record.samples[i].m) > tol) {
        throw TraceRejected("machine action mismatch at sample " +
                            std::to_string(i));
      }
      if (s.contains("cost") &&
          std::abs(s.at("cost").get<double>() - record.samples[i].cost) > tol) {
        throw TraceRejected("cost mismatch at sample " + std::to_string(i));
      }
    }
    if (message.contains("reduced")) {
      const json& r = message.at("reduced");
      CheckKeys(r, {"h", "m"}, "reduced");
      if (MaxAbsDiff(ReadVector(r.at("h"), dims.d_h, "reduced.h"),
                     record.reduced.h) > tol ||
          MaxAbsDiff(ReadVector(r.at("m"), dims.d_m, "reduced.m"),
                     record.reduced.m) > tol) {
        throw TraceRejected("reduced actions disagree with the trace");
      }
    }
    return record;
  }

  std::vector<json> OnTrace(const json& message) {
    TrialRecord record;
    try {
      record = Recompute(message);
    } catch (const std::exception& e) {
      if (dynamic_cast<const ProtocolError*>(&e) ||
          dynamic_cast<const json::exception*>(&e)) {
        throw;
      }
      phase_ = Phase::kAwaitReady;
      json result = Make("trial_result");
      result["trial_index"] = current_index_;
      result["accepted"] = false;
      result["reason"] = e.what();
      return {result};
    }
    const PlannedTrial planned = plan_[step_];
    log_.AppendTrial(planned.iteration, current_index_, current_.kind, record,
                     state_.h_hat, state_.m_hat, cost_);
    phase_ = Phase::kAwaitReady;

    std::vector<json> replies;
    if (!planned.kind.is_main()) {
      const AttentionOutcome outcome = ScoreAttentionCheck(check_, record.reduced);
      json result = Make("attention_result");
      result["trial_index"] = current_index_;
      result["outcome"] = ToString(outcome);
      result["attempts_left"] = check_.attempts_left();
      replies.push_back(result);
      if (outcome == AttentionOutcome::kScreenedOut) {
        replies.push_back(Finish(SessionStatus::kScreenedOut));
        return replies;
      }
      if (outcome == AttentionOutcome::kRetry) return replies;
      check_ = AttentionCheckState{};
    } else {
      json result = Make("trial_result");
      result["trial_index"] = current_index_;
      result["accepted"] = true;
      result["reduced"] = {{"h", VectorJson(record.reduced.h)},
                           {"m", VectorJson(record.reduced.m)}};
      replies.push_back(result);
      if (planned.kind.tag == TrialKindTag::kUnperturbed) {
        h_unperturbed_ = record.reduced.h;
        m_perturbed_.clear();
      } else {
        m_perturbed_.push_back(record.reduced.m);
      }
      if (static_cast<int>(m_perturbed_.size()) ==
          config_.learner.dims.NumPerturbations()) {
        state_ = LearnerUpdate(state_, config_.learner, h_unperturbed_,
                               m_perturbed_);
        iterates_.push_back(state_);
        m_perturbed_.clear();
      }
    }
    if (++step_ == plan_.size()) {
      replies.push_back(Finish(SessionStatus::kCompleted));
    }
    return replies;
  }

  json Finish(SessionStatus status) {
    status_ = status;
    if (!out_dir_.empty()) {
      std::filesystem::create_directories(out_dir_ / "iterates");
      WriteLogFile(log_, out_dir_ / (id_ + ".csv"));
      IterateTable table{config_.learner.dims,
                         {IteratesFromStates(iterates_, id_)}};
      std::ofstream out(out_dir_ / "iterates" / (id_ + ".csv"));
      WriteIterateCsv(table, out);
    }
    json done = Make("session_complete");
    done["summary"] = {{"status", ToString(status)},
                       {"trials", next_trial_index_},
                       {"iterations", state_.k}};
    return done;
  }

  const ExperimentConfig config_;
  const std::string id_;
  const std::filesystem::path out_dir_;
  const QuadraticCost cost_;
  const std::vector<PlannedTrial> plan_;
  std::mt19937_64 rng_;
  Vector session_offset_;

  LearnerState state_;
  std::vector<LearnerState> iterates_;
  SessionLog log_;
  Vector h_unperturbed_;
  std::vector<Vector> m_perturbed_;
  AttentionCheckState check_;

  SessionStatus status_ = SessionStatus::kActive;
  std::string error_;
  Phase phase_ = Phase::kAwaitReady;
  size_t step_ = 0;
  TrialSpec current_;
  int current_index_ = -1;
  int next_trial_index_ = 0;
  int next_client_seq_ = 1;
  int next_server_seq_ = 0;
};

SessionService::SessionService(ExperimentConfig config,
                               std::filesystem::path out_dir)
    : config_(std::move(config)), out_dir_(std::move(out_dir)) {
  config_.Validate();
}

SessionService::~SessionService() = default;

std::vector<json> SessionService::HandleText(const std::string& text) {
  json message;
  try {
    message = json::parse(text);
  } catch (const json::exception& e) {
    return {{{"type", "error"},
             {"session_id", ""},
             {"seq", 0},
             {"message", std::string("invalid JSON: ") + e.what()}}};
  }
  return Handle(message);
}

std::vector<json> SessionService::Handle(const json& message) {
  auto reject = [](const std::string& why) {
    return std::vector<json>{{{"type", "error"},
                              {"session_id", ""},
                              {"seq", 0},
                              {"message", why}}};
  };
  std::string type;
  std::string session_id;
  try {
    if (!message.is_object()) return reject("message must be a JSON object");
    type = message.at("type").get<std::string>();
    auto schema = ClientSchemas().find(type);
    if (schema == ClientSchemas().end()) {
      return reject("unknown message type '" + type + "'");
    }
    if (type == "join") CheckKeys(message, schema->second, type);
    message.at("seq").get<int>();
    session_id = message.at("session_id").get<std::string>();
  } catch (const std::exception& e) {
    return reject(e.what());
  }
  if (type == "join") return Join(message);

  std::shared_ptr<ExperimentSession> session;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
      return reject("unknown session '" + session_id + "'");
    }
    session = it->second;
  }
  std::lock_guard<std::mutex> lock(session->mu);
  return session->Handle(message);
}

std::vector<json> SessionService::Join(const json& message) {
  auto reject = [](const std::string& why) {
    return std::vector<json>{{{"type", "error"},
                              {"session_id", ""},
                              {"seq", 0},
                              {"message", why}}};
  };
  if (message.at("seq").get<int>() != 0) return reject("join must have seq 0");
  if (!message.at("session_id").get<std::string>().empty()) {
    return reject("join must have an empty session_id");
  }
  const std::string experiment = message.at("experiment_id").get<std::string>();
  if (experiment != config_.experiment_id) {
    return reject("unknown experiment '" + experiment + "'");
  }
  std::optional<std::string> participant;
  if (message.contains("participant")) {
    participant = message.at("participant").get<std::string>();
  }

  std::shared_ptr<ExperimentSession> session;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const int ordinal = next_ordinal_++;
    const std::string label =
        participant ? "participant:" + *participant
                    : "ordinal:" + std::to_string(ordinal);
    const uint64_t seed = SessionSeed(config_.seed, label);
    // Without a participant label, circle points are dealt in join order.
    const int init_slot = participant ? static_cast<int>(seed % 8) : ordinal;
    char id[32];
    std::snprintf(id, sizeof(id), "s%04d", ordinal);
    session = std::make_shared<ExperimentSession>(
        config_, id, seed, config_.InitialEstimate(init_slot, seed), out_dir_);
    sessions_[id] = session;
  }
  std::lock_guard<std::mutex> lock(session->mu);
  return session->Start();
}

std::optional<SessionSnapshot> SessionService::Snapshot(
    const std::string& session_id) const {
  std::shared_ptr<ExperimentSession> session;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    session = it->second;
  }
  std::lock_guard<std::mutex> lock(session->mu);
  return session->Snapshot();
}

std::vector<std::string> SessionService::SessionIds() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, session] : sessions_) ids.push_back(id);
  return ids;
}

}  // namespace hmgame
