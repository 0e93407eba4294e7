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

#include "hmgame/stats.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace hmgame {
namespace {

namespace fs = std::filesystem;

std::string JoinReals(const Vector& v, char sep) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += sep;
    out += FormatReal(v[i]);
  }
  return out;
}

std::string ColumnList(const char* prefix, int n) {
  std::string out;
  for (int i = 1; i <= n; ++i) {
    out += ',';
    out += prefix;
    out += std::to_string(i);
  }
  return out;
}

std::string IterateHeader(Dims dims) {
  return "session,k" + ColumnList("hhat_", dims.d_h) +
         ColumnList("mhat_", dims.d_m) +
         ",h_error,m_error,total_error,cost_at_estimate";
}

double ParseField(const std::string& s, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "bad number '" + s + "'");
  }
  return v;
}

std::string FirstLine(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

IterateTable LoadFile(const fs::path& path) {
  const std::string header = FirstLine(path);
  if (header.rfind("session,k", 0) == 0) {
    std::ifstream in(path);
    return ReadIterateCsv(in);
  }
  SessionLog log = ReadLogFile(path);
  IterateTable table;
  table.dims = log.dims;
  table.sessions.push_back(IteratesFromLog(log, path.stem().string()));
  return table;
}

// Rows of per-iteration percentiles of f(estimate) over all sessions that
// reached iteration k.
template <class F>
std::vector<PercentileRow> PercentileRows(const IterateTable& table,
                                          std::span<const double> ps, F f) {
  size_t max_k = 0;
  for (const auto& s : table.sessions) {
    max_k = std::max(max_k, s.estimates.size());
  }
  std::vector<PercentileRow> rows;
  for (size_t k = 0; k < max_k; ++k) {
    std::vector<double> values;
    for (const auto& s : table.sessions) {
      if (k < s.estimates.size()) values.push_back(f(s.estimates[k]));
    }
    PercentileRow row{static_cast<int>(k), static_cast<int>(values.size()), {}};
    for (double p : ps) row.values.push_back(Percentile(values, p));
    rows.push_back(std::move(row));
  }
  return rows;
}

void WritePercentileCsv(const fs::path& path, const char* label,
                        std::span<const double> ps,
                        const std::vector<PercentileRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "k,n";
  for (double p : ps) out << ',' << label << static_cast<int>(p);
  out << '\n';
  for (const auto& r : rows) {
    out << r.k << ',' << r.n;
    for (double v : r.values) out << ',' << FormatReal(v);
    out << '\n';
  }
}

// Per-iteration median of each stacked-estimate component and of the total
// error.
std::map<int, std::vector<double>> MedianProfile(const IterateTable& table) {
  const int width = table.dims.StateSize();
  std::vector<double> ps = {50};
  std::map<int, std::vector<double>> out;
  for (int c = 0; c <= width; ++c) {
    auto rows = PercentileRows(table, ps, [&](const Estimate& e) {
      return c < width ? e.Stacked()[c] : TotalError(e);
    });
    for (const auto& r : rows) out[r.k].push_back(r.values[0]);
  }
  return out;
}

}  // namespace

double Percentile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of no values");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw std::invalid_argument("percentile must be in [0, 100]");
  }
  std::vector<double> v(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(rank));
  std::nth_element(v.begin(), v.begin() + lo, v.end());
  const double lower = v[lo];
  if (lo + 1 >= v.size()) return lower;
  const double upper = *std::min_element(v.begin() + lo + 1, v.end());
  return lower + (rank - static_cast<double>(lo)) * (upper - lower);
}

double Median(std::span<const double> values) { return Percentile(values, 50); }

SessionIterates IteratesFromLog(const SessionLog& log, std::string session) {
  SessionIterates out{std::move(session), {}};
  std::map<int, Estimate> by_k;
  for (const LogRow& r : log.rows) {
    if (by_k.count(r.iteration)) continue;
    by_k[r.iteration] = {
        Eigen::Map<const Vector>(r.h_hat.data(), r.h_hat.size()),
        Eigen::Map<const Vector>(r.m_hat.data(), r.m_hat.size())};
  }
  for (int k = 0; by_k.count(k); ++k) out.estimates.push_back(by_k[k]);
  return out;
}

SessionIterates IteratesFromStates(std::span<const LearnerState> states,
                                   std::string session) {
  SessionIterates out{std::move(session), {}};
  for (const LearnerState& s : states) out.estimates.push_back(s.estimate());
  return out;
}

double HError(const Estimate& e) { return e.h_hat.lpNorm<1>(); }
double MError(const Estimate& e) { return e.m_hat.lpNorm<1>(); }
double TotalError(const Estimate& e) { return HError(e) + MError(e); }
double CostAtEstimate(const Estimate& e) {
  return 0.5 * e.h_hat.squaredNorm() + 0.5 * e.m_hat.squaredNorm();
}

void WriteIterateCsv(const IterateTable& table, std::ostream& out) {
  out << IterateHeader(table.dims) << '\n';
  for (const auto& s : table.sessions) {
    for (size_t k = 0; k < s.estimates.size(); ++k) {
      const Estimate& e = s.estimates[k];
      out << s.session << ',' << k << ',' << JoinReals(e.h_hat, ',') << ','
          << JoinReals(e.m_hat, ',') << ',' << FormatReal(HError(e)) << ','
          << FormatReal(MError(e)) << ',' << FormatReal(TotalError(e)) << ','
          << FormatReal(CostAtEstimate(e)) << '\n';
    }
  }
}

IterateTable ReadIterateCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int d_h = 0;
  int d_m = 0;
  for (const std::string& f : SplitCsvLine(line)) {
    if (f.rfind("hhat_", 0) == 0) ++d_h;
    if (f.rfind("mhat_", 0) == 0) ++d_m;
  }
  if (d_h < 1 || d_m < 1 || line != IterateHeader(Dims(d_h, d_m))) {
    throw ParseError(1, "not an iterate table header");
  }
  IterateTable table;
  table.dims = Dims(d_h, d_m);
  const size_t arity = 2 + d_h + d_m + 4;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != arity) {
      throw ParseError(line_no, "expected " + std::to_string(arity) +
                                    " fields, got " + std::to_string(f.size()));
    }
    if (table.sessions.empty() || table.sessions.back().session != f[0]) {
      table.sessions.push_back({f[0], {}});
    }
    auto& s = table.sessions.back();
    if (ParseField(f[1], line_no) != static_cast<double>(s.estimates.size())) {
      throw ParseError(line_no, "iterations of a session must be 0, 1, ...");
    }
    Estimate e{Vector(d_h), Vector(d_m)};
    for (int i = 0; i < d_h; ++i) e.h_hat[i] = ParseField(f[2 + i], line_no);
    for (int i = 0; i < d_m; ++i) {
      e.m_hat[i] = ParseField(f[2 + d_h + i], line_no);
    }
    s.estimates.push_back(std::move(e));
  }
  return table;
}

IterateTable LoadIterates(const fs::path& path, std::ostream* warnings) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw std::invalid_argument("no such file or directory: " + path.string());
  }

  IterateTable merged;
  bool have_dims = false;
  for (const fs::path& file : files) {
    IterateTable part;
    try {
      part = LoadFile(file);
    } catch (const std::exception& e) {
      if (warnings != nullptr) {
        *warnings << "warning: skipping " << file.string() << ": " << e.what()
                  << '\n';
      }
      continue;
    }
    if (!have_dims) {
      merged.dims = part.dims;
      have_dims = true;
    } else if (!(part.dims == merged.dims)) {
      throw std::invalid_argument("mixed dims: " + file.string() + " is " +
                                  part.dims.ToString() + ", expected " +
                                  merged.dims.ToString());
    }
    for (auto& s : part.sessions) {
      if (s.estimates.empty()) {
        if (warnings != nullptr) {
          *warnings << "warning: " << file.string() << " has no iterations\n";
        }
        continue;
      }
      merged.sessions.push_back(std::move(s));
    }
  }
  if (merged.sessions.empty()) {
    throw std::invalid_argument("no usable session data under " +
                                path.string());
  }
  return merged;
}

IterationStats ComputeIterationStats(const IterateTable& table) {
  IterationStats stats;
  stats.dims = table.dims;
  stats.h_error = PercentileRows(table, kBoxPercentiles, HError);
  stats.m_error = PercentileRows(table, kBoxPercentiles, MError);
  stats.total_error = PercentileRows(table, kBoxPercentiles, TotalError);
  stats.cost = PercentileRows(table, kQuartiles, CostAtEstimate);

  std::map<std::string, IterateTable> groups;
  for (const auto& s : table.sessions) {
    const std::string key = JoinReals(s.estimates.front().Stacked(), ';');
    auto& g = groups[key];
    g.dims = table.dims;
    g.sessions.push_back(s);
  }
  int group_index = 0;
  const int width = table.dims.StateSize();
  for (const auto& [key, group] : groups) {
    const auto profile = MedianProfile(group);
    const auto counts =
        PercentileRows(group, std::array<double, 1>{50}, TotalError);
    for (const auto& [k, medians] : profile) {
      Vector stacked(width);
      for (int c = 0; c < width; ++c) stacked[c] = medians[c];
      Estimate e = Estimate::FromStacked(table.dims, stacked);
      stats.median_estimates.push_back(
          {group_index, key, k, counts[k].n, e.h_hat, e.m_hat});
    }
    ++group_index;
  }
  for (const auto& [k, medians] : MedianProfile(table)) {
    stats.median_all.push_back(
        {k, stats.total_error[k].n,
         std::vector<double>(medians.begin(), medians.begin() + width)});
  }
  return stats;
}

std::vector<fs::path> WriteStatsCsvs(const IterationStats& stats,
                                     const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> paths = {out_dir / "h_error_percentiles.csv",
                                 out_dir / "m_error_percentiles.csv",
                                 out_dir / "total_error_percentiles.csv",
                                 out_dir / "cost_quartiles.csv",
                                 out_dir / "median_estimates.csv"};
  WritePercentileCsv(paths[0], "p", kBoxPercentiles, stats.h_error);
  WritePercentileCsv(paths[1], "p", kBoxPercentiles, stats.m_error);
  WritePercentileCsv(paths[2], "p", kBoxPercentiles, stats.total_error);
  WritePercentileCsv(paths[3], "q", kQuartiles, stats.cost);

  std::ofstream out(paths[4]);
  if (!out) throw std::runtime_error("cannot write " + paths[4].string());
  out << "group,init,k,n" << ColumnList("hhat_", stats.dims.d_h)
      << ColumnList("mhat_", stats.dims.d_m) << '\n';
  for (const auto& r : stats.median_estimates) {
    out << r.group << ',' << r.init << ',' << r.k << ',' << r.n << ','
        << JoinReals(r.h_hat, ',') << ',' << JoinReals(r.m_hat, ',') << '\n';
  }
  for (const auto& r : stats.median_all) {
    out << "all,," << r.k << ',' << r.n;
    for (double v : r.values) out << ',' << FormatReal(v);
    out << '\n';
  }
  return paths;
}

CompareResult CompareMedians(const IterateTable& sim, const IterateTable& exp) {
  if (!(sim.dims == exp.dims)) {
    throw std::invalid_argument("cannot compare " + sim.dims.ToString() +
                                " with " + exp.dims.ToString());
  }
  CompareResult result;
  result.dims = sim.dims;
  result.header.push_back("k");
  std::vector<std::string> names;
  for (int i = 1; i <= sim.dims.d_h; ++i) {
    names.push_back("hhat_" + std::to_string(i));
  }
  for (int i = 1; i <= sim.dims.d_m; ++i) {
    names.push_back("mhat_" + std::to_string(i));
  }
  names.push_back("total_error");
  for (const auto& n : names) {
    result.header.push_back("sim_" + n);
    result.header.push_back("exp_" + n);
    result.header.push_back("gap_" + n);
  }
  const auto sim_profile = MedianProfile(sim);
  const auto exp_profile = MedianProfile(exp);
  for (const auto& [k, sim_medians] : sim_profile) {
    auto it = exp_profile.find(k);
    if (it == exp_profile.end()) continue;
    std::vector<double> row = {static_cast<double>(k)};
    for (size_t c = 0; c < sim_medians.size(); ++c) {
      const double gap = std::abs(sim_medians[c] - it->second[c]);
      row.push_back(sim_medians[c]);
      row.push_back(it->second[c]);
      row.push_back(gap);
      result.max_abs_gap = std::max(result.max_abs_gap, gap);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

void WriteCompareCsv(const CompareResult& result, std::ostream& out) {
  for (size_t i = 0; i < result.header.size(); ++i) {
    out << (i ? "," : "") << result.header[i];
  }
  out << '\n';
  for (const auto& row : result.rows) {
    out << static_cast<int>(row[0]);
    for (size_t i = 1; i < row.size(); ++i) out << ',' << FormatReal(row[i]);
    out << '\n';
  }
}

}  // namespace hmgame
