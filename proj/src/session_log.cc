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

#include "hmgame/session_log.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hmgame {
namespace {

std::vector<double> ToStd(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double ParseReal(const std::string& field, int line) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line, "bad real '" + field + "'");
  }
  return value;
}

int ParseInt(const std::string& field, int line) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line, "bad integer '" + field + "'");
  }
  return value;
}

void AppendColumns(std::string& out, const char* prefix, int n) {
  for (int i = 1; i <= n; ++i) {
    out += ',';
    out += prefix;
    out += std::to_string(i);
  }
}

void WriteReals(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) out << ',' << FormatReal(v);
}

}  // namespace

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      line_(line) {}

std::string FormatReal(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

void SessionLog::AppendTrial(int iteration, int trial_index,
                             const TrialKind& kind, const TrialRecord& record,
                             const Vector& h_hat, const Vector& m_hat,
                             const QuadraticCost& cost) {
  const double cost_at_estimate = cost(h_hat, m_hat);
  const std::vector<double> h_hat_std = ToStd(h_hat);
  const std::vector<double> m_hat_std = ToStd(m_hat);
  for (size_t i = 0; i < record.samples.size(); ++i) {
    const TrialSample& s = record.samples[i];
    rows.push_back({iteration, trial_index, kind, static_cast<int>(i), s.t,
                    ToStd(s.h), ToStd(s.m), s.cost, h_hat_std, m_hat_std,
                    cost_at_estimate});
  }
}

std::string LogHeader(Dims dims) {
  std::string out = "iteration,trial_index,trial_kind,sample,t";
  AppendColumns(out, "h_", dims.d_h);
  AppendColumns(out, "m_", dims.d_m);
  out += ",cost";
  AppendColumns(out, "hhat_", dims.d_h);
  AppendColumns(out, "mhat_", dims.d_m);
  out += ",cost_at_estimate";
  return out;
}

Dims DimsFromLogHeader(const std::string& header) {
  std::string line = header;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int d_h = 0;
  int d_m = 0;
  for (const std::string& f : SplitCsvLine(line)) {
    if (f.rfind("h_", 0) == 0) ++d_h;
    if (f.rfind("m_", 0) == 0) ++d_m;
  }
  if (d_h < 1 || d_m < 1 || line != LogHeader(Dims(d_h, d_m))) {
    throw ParseError(1, "not a session-log header");
  }
  return Dims(d_h, d_m);
}

void WriteLog(const SessionLog& log, std::ostream& out) {
  out << LogHeader(log.dims) << '\n';
  for (const LogRow& r : log.rows) {
    out << r.iteration << ',' << r.trial_index << ',' << r.trial_kind.ToString()
        << ',' << r.sample << ',' << FormatReal(r.t);
    WriteReals(out, r.h);
    WriteReals(out, r.m);
    out << ',' << FormatReal(r.cost);
    WriteReals(out, r.h_hat);
    WriteReals(out, r.m_hat);
    out << ',' << FormatReal(r.cost_at_estimate) << '\n';
  }
}

SessionLog ReadLog(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  SessionLog log;
  log.dims = DimsFromLogHeader(line);
  const int d_h = log.dims.d_h;
  const int d_m = log.dims.d_m;
  const size_t arity = 5 + 2 * (d_h + d_m) + 2;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != arity) {
      throw ParseError(line_no, "expected " + std::to_string(arity) +
                                    " fields, got " + std::to_string(f.size()));
    }
    LogRow r;
    r.iteration = ParseInt(f[0], line_no);
    r.trial_index = ParseInt(f[1], line_no);
    try {
      r.trial_kind = TrialKind::Parse(f[2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    r.sample = ParseInt(f[3], line_no);
    r.t = ParseReal(f[4], line_no);
    size_t c = 5;
    auto take = [&](int n) {
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = ParseReal(f[c++], line_no);
      return v;
    };
    r.h = take(d_h);
    r.m = take(d_m);
    r.cost = ParseReal(f[c++], line_no);
    r.h_hat = take(d_h);
    r.m_hat = take(d_m);
    r.cost_at_estimate = ParseReal(f[c++], line_no);
    log.rows.push_back(std::move(r));
  }
  return log;
}

void WriteLogFile(const SessionLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  WriteLog(log, out);
}

SessionLog ReadLogFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return ReadLog(in);
}

}  // namespace hmgame
