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

#ifndef HMGAME_SESSION_SERVICE_H_
#define HMGAME_SESSION_SERVICE_H_

// Server side of the live experiment, independent of the transport.
//
// Every message is a JSON object with "type", "session_id" and "seq". Client
// sequence numbers start at 0 with "join" and increase by one; server
// messages carry their own counter. Client messages:
//
//   join          {experiment_id, participant?}
//   trial_ready   {}
//   trace_upload  {trial_index, samples: [{t, h_raw, m?, cost?}],
//                  reduced?: {h, m}}
//
// Server messages:
//
//   session_config   {dims, iterations, plan_length, durations, screen_map,
//                     display_scaling}
//   trial_start      {trial_index, kind, policy: {gain, h_hat, m_hat},
//                     mirror_signs, offset, countdown, duration_seconds,
//                     sample_count}
//   trial_result     {trial_index, accepted, reason?, reduced?}
//   attention_result {trial_index, outcome, attempts_left}
//   session_complete {summary: {status, trials, iterations}}
//   error            {message}
//
// The server recomputes m[t] and the cost from h_raw with its own copy of the
// trial policy; client-reported values that disagree by more than the
// configured tolerance get the trial rejected and replayed. Out-of-order,
// wrong-phase or malformed messages terminate the session.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hmgame/experiment_config.h"
#include "hmgame/learner.h"
#include "hmgame/session_log.h"

namespace hmgame {

enum class SessionStatus { kActive, kCompleted, kScreenedOut, kTerminated };

std::string ToString(SessionStatus status);

struct SessionSnapshot {
  std::string session_id;
  SessionStatus status = SessionStatus::kActive;
  std::vector<LearnerState> iterates;
  SessionLog log;
  std::string error;
};

class ExperimentSession;

class SessionService {
 public:
  // Completed sessions are written to `out_dir` as <id>.csv (session log) and
  // iterates/<id>.csv (iterate table) when it is non-empty.
  explicit SessionService(ExperimentConfig config,
                          std::filesystem::path out_dir = {});
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  // Handles one client message and returns the replies in order. Safe to
  // call concurrently; messages of one session are serialized.
  std::vector<nlohmann::json> Handle(const nlohmann::json& message);
  // Parses `text` first; malformed JSON yields an error reply.
  std::vector<nlohmann::json> HandleText(const std::string& text);

  std::optional<SessionSnapshot> Snapshot(const std::string& session_id) const;
  std::vector<std::string> SessionIds() const;

  const ExperimentConfig& config() const { return config_; }

 private:
  std::vector<nlohmann::json> Join(const nlohmann::json& message);

  ExperimentConfig config_;
  std::filesystem::path out_dir_;
  mutable std::mutex mu_;
  int next_ordinal_ = 0;
  std::map<std::string, std::shared_ptr<ExperimentSession>> sessions_;
};

// Per-session seed derived from the experiment seed and the participant
// label (or join ordinal).
uint64_t SessionSeed(uint64_t experiment_seed, const std::string& label);

}  // namespace hmgame

#endif  // HMGAME_SESSION_SERVICE_H_
