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

#ifndef HMGAME_SESSION_LOG_H_
#define HMGAME_SESSION_LOG_H_

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmgame/core_game.h"
#include "hmgame/protocol.h"

namespace hmgame {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// One 60 Hz sample of a session, including the machine's estimate in effect.
struct LogRow {
  int iteration = 0;
  int trial_index = 0;
  TrialKind trial_kind;
  int sample = 0;
  double t = 0.0;
  std::vector<double> h;
  std::vector<double> m;
  double cost = 0.0;
  std::vector<double> h_hat;
  std::vector<double> m_hat;
  double cost_at_estimate = 0.0;

  friend bool operator==(const LogRow&, const LogRow&) = default;
};

struct SessionLog {
  Dims dims;
  std::vector<LogRow> rows;

  // Appends one row per sample of `record`.
  void AppendTrial(int iteration, int trial_index, const TrialKind& kind,
                   const TrialRecord& record, const Vector& h_hat,
                   const Vector& m_hat, const QuadraticCost& cost);

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

// iteration,trial_index,trial_kind,sample,t,h_1..,m_1..,cost,hhat_1..,
// mhat_1..,cost_at_estimate
std::string LogHeader(Dims dims);

// Reals are written with 17 significant digits, so ReadLog(WriteLog(x)) == x.
void WriteLog(const SessionLog& log, std::ostream& out);
SessionLog ReadLog(std::istream& in);

void WriteLogFile(const SessionLog& log, const std::filesystem::path& path);
SessionLog ReadLogFile(const std::filesystem::path& path);

// Dims encoded by a session-log header line; throws ParseError(1, ...) if
// the line is not one.
Dims DimsFromLogHeader(const std::string& header);

// Shared CSV helpers.
std::string FormatReal(double value);
std::vector<std::string> SplitCsvLine(const std::string& line);

}  // namespace hmgame

#endif  // HMGAME_SESSION_LOG_H_
