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

#ifndef HMGAME_STATS_H_
#define HMGAME_STATS_H_

// Convergence statistics over many sessions: per-iteration L1 errors of the
// machine's estimates, their percentiles, median estimate trajectories and
// cost quartiles.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hmgame/core_game.h"
#include "hmgame/learner.h"
#include "hmgame/session_log.h"

namespace hmgame {

// Percentile p in [0, 100] with linear interpolation between closest ranks:
// rank = p/100 * (n - 1), value = x[lo] + (rank - lo) * (x[lo + 1] - x[lo]).
// Throws std::invalid_argument on empty input.
double Percentile(std::span<const double> values, double p);
double Median(std::span<const double> values);

inline constexpr std::array<double, 5> kBoxPercentiles = {5, 25, 50, 75, 95};
inline constexpr std::array<double, 3> kQuartiles = {25, 50, 75};

// One session's estimates indexed by iteration k = 0, 1, ...
struct SessionIterates {
  std::string session;
  std::vector<Estimate> estimates;
};

struct IterateTable {
  Dims dims;
  std::vector<SessionIterates> sessions;
};

// Takes the estimate in effect at each iteration k from the first row logged
// with that k; stops at the first missing k.
SessionIterates IteratesFromLog(const SessionLog& log, std::string session);
SessionIterates IteratesFromStates(std::span<const LearnerState> states,
                                   std::string session);

double HError(const Estimate& e);
double MError(const Estimate& e);
double TotalError(const Estimate& e);
double CostAtEstimate(const Estimate& e);

// session,k,hhat_1..,mhat_1..,h_error,m_error,total_error,cost_at_estimate
void WriteIterateCsv(const IterateTable& table, std::ostream& out);
IterateTable ReadIterateCsv(std::istream& in);

// A session log or iterate CSV file, or every *.csv in a directory (sorted by
// name). Unparseable files are skipped with a warning on `warnings`. Throws
// std::invalid_argument when nothing usable is found or dims disagree.
IterateTable LoadIterates(const std::filesystem::path& path,
                          std::ostream* warnings = nullptr);

struct PercentileRow {
  int k = 0;
  int n = 0;
  std::vector<double> values;
};

struct MedianEstimateRow {
  int group = 0;
  std::string init;  // initial estimate, ';'-separated
  int k = 0;
  int n = 0;
  Vector h_hat;
  Vector m_hat;
};

struct IterationStats {
  Dims dims;
  std::vector<PercentileRow> h_error;      // kBoxPercentiles
  std::vector<PercentileRow> m_error;      // kBoxPercentiles
  std::vector<PercentileRow> total_error;  // kBoxPercentiles
  std::vector<PercentileRow> cost;         // kQuartiles
  std::vector<MedianEstimateRow> median_estimates;  // per init group
  std::vector<PercentileRow> median_all;   // all sessions, stacked estimate
};

IterationStats ComputeIterationStats(const IterateTable& table);

// h_error_percentiles.csv, m_error_percentiles.csv,
// total_error_percentiles.csv, cost_quartiles.csv, median_estimates.csv.
// Returns the written paths.
std::vector<std::filesystem::path> WriteStatsCsvs(
    const IterationStats& stats, const std::filesystem::path& out_dir);

struct CompareResult {
  Dims dims;
  // k, then per stacked-estimate component and total error: sim, exp, gap.
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  double max_abs_gap = 0.0;
};

// Joins per-iteration medians on k (iterations present in both).
CompareResult CompareMedians(const IterateTable& sim, const IterateTable& exp);
void WriteCompareCsv(const CompareResult& result, std::ostream& out);

}  // namespace hmgame

#endif  // HMGAME_STATS_H_
