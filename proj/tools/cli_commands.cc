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

#include "cli_commands.h"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "hmgame/closed_loop.h"
#include "hmgame/experiment_config.h"
#include "hmgame/learner.h"
#include "hmgame/session_log.h"
#include "hmgame/session_service.h"
#include "hmgame/stats.h"
#include "websocket_server.h"

namespace hmgame {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> values;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in '" + text + "'");
    }
  }
  return values;
}

// Row-major d_m x d_h gain from a comma list; empty means zero.
Matrix ParseGain(const std::string& text, Dims dims) {
  if (text.empty()) return Matrix::Zero(dims.d_m, dims.d_h);
  const auto v = ParseList(text);
  if (static_cast<int>(v.size()) != dims.NumPerturbations()) {
    throw UsageError("--gain needs " + std::to_string(dims.NumPerturbations()) +
                     " entries (row-major " + std::to_string(dims.d_m) + "x" +
                     std::to_string(dims.d_h) + ")");
  }
  Matrix gain(dims.d_m, dims.d_h);
  for (int r = 0; r < dims.d_m; ++r) {
    for (int c = 0; c < dims.d_h; ++c) gain(r, c) = v[r * dims.d_h + c];
  }
  return gain;
}

Dims ParseDimsOption(const std::string& text) {
  try {
    return Dims::Parse(text);
  } catch (const ShapeError& e) {
    throw UsageError(e.what());
  }
}

struct LearnerFlags {
  std::string dims = "1x1";
  int iterations = 10;
  double delta = 1.0;
  double alpha = 1.0;
  std::string gain;
  bool averaged = false;

  void Register(CLI::App* app) {
    app->add_option("--dims", dims, "Action dimensions d_h x d_m")
        ->capture_default_str();
    app->add_option("--iterations,-K", iterations, "Learner iterations")
        ->capture_default_str();
    app->add_option("--delta", delta, "Perturbation magnitude")
        ->capture_default_str();
    app->add_option("--alpha", alpha, "Step size")->capture_default_str();
    app->add_option("--gain", gain,
                    "Base gain L0, comma-separated row-major (default 0)");
    app->add_flag("--averaged", averaged,
                  "Divide the summed perturbation innovation by d_h*d_m");
  }

  LearnerConfig Build() const {
    LearnerConfig config = LearnerConfig::Defaults(ParseDimsOption(dims));
    config.iterations = iterations;
    config.delta = delta;
    config.alpha = alpha;
    config.base_gain = ParseGain(gain, config.dims);
    config.averaged_update = averaged;
    try {
      config.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return config;
  }
};

void PrintMatrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "  [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? ", " : "") << std::setw(10) << m(r, c) + 0.0;  // prints -0 as 0
    }
    out << "]\n";
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  LearnerFlags learner;
  std::string inits;
  double init_ball = -1.0;
  double radius = 0.65;
  std::string init_point;
  int sessions = 0;
  std::string human = "exact";
  double sigma = 0.05;
  double rate = 5.0;
  uint64_t seed = 0;
  bool no_checks = false;
  bool no_traces = false;
  double trial_seconds = 0.0;
  std::string out;
};

int Simulate(const SimulateFlags& f, std::ostream& out) {
  const LearnerConfig config = f.learner.Build();
  const Dims dims = config.dims;

  std::string scheme = f.inits;
  double radius = f.radius;
  if (f.init_ball >= 0.0) {
    scheme = "ball";
    radius = f.init_ball;
  }
  if (scheme.empty()) scheme = (dims == Dims(1, 1)) ? "circle8" : "ball";
  if (!f.init_point.empty()) scheme = "fixed";
  if (scheme == "circle8" && !(dims == Dims(1, 1))) {
    throw UsageError("circle8 initialization is 1x1 only");
  }
  if (scheme != "circle8" && scheme != "ball" && scheme != "sphere" &&
      scheme != "fixed") {
    throw UsageError("unknown --inits '" + scheme + "'");
  }
  const int sessions =
      f.sessions > 0 ? f.sessions : (scheme == "circle8" ? 8 : 20);

  Estimate fixed;
  if (scheme == "fixed") {
    const auto v = ParseList(f.init_point);
    if (static_cast<int>(v.size()) != dims.StateSize()) {
      throw UsageError("--init needs " + std::to_string(dims.StateSize()) +
                       " values (h_hat then m_hat)");
    }
    fixed = Estimate::FromStacked(
        dims, Eigen::Map<const Vector>(v.data(), v.size()));
  }
  if (f.human != "exact" && f.human != "noisy" && f.human != "flow") {
    throw UsageError("--human must be exact, noisy or flow");
  }

  const fs::path out_dir(f.out);
  const fs::path log_dir = out_dir / "logs";
  fs::create_directories(out_dir);
  if (!f.no_traces) fs::create_directories(log_dir);

  IterateTable table;
  table.dims = dims;
  double worst_final = 0.0;
  for (int i = 0; i < sessions; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "session_%04d", i);
    const uint64_t session_seed = SessionSeed(f.seed, name);
    const uint64_t human_seed = SessionSeed(session_seed, "human");

    Estimate init;
    if (scheme == "circle8") {
      init = InitCirclePoint(radius, i % 8);
    } else if (scheme == "ball") {
      init = InitRandomBall(dims, radius, session_seed);
    } else if (scheme == "sphere") {
      init = InitRandomSphere(dims, radius, session_seed);
    } else {
      init = fixed;
    }

    HumanModel human = ExactBestResponse{};
    if (f.human == "noisy") human = NoisyBestResponse{f.sigma, human_seed};
    if (f.human == "flow") human = GradientFlow{f.rate, f.sigma, human_seed};

    SimulationOptions options;
    options.seed = session_seed;
    options.attention_checks = !f.no_checks;
    options.record_traces = !f.no_traces;
    options.trial_seconds = f.trial_seconds;

    SimulatedSession session =
        RunSimulatedSession(config, init, human, options);
    if (!f.no_traces) {
      WriteLogFile(session.log, log_dir / (std::string(name) + ".csv"));
    }
    table.sessions.push_back(IteratesFromStates(session.iterates, name));
    worst_final =
        std::max(worst_final, TotalError(session.iterates.back().estimate()));
    if (session.screened_out) {
      out << name << ": screened out by attention checks\n";
    }
  }
  {
    std::ofstream csv(out_dir / "iterates.csv");
    WriteIterateCsv(table, csv);
  }
  out << "simulated " << sessions << " " << dims.ToString() << " sessions ("
      << f.human << ", inits " << scheme << ") -> " << out_dir.string()
      << "\n";
  out << "max total L1 error at final iteration: " << std::setprecision(6)
      << worst_final << "\n";
  return 0;
}

// ----------------------------------------------------------- analyze-system

struct AnalyzeFlags {
  LearnerFlags learner;
  std::string x0;
  std::string iterates_out;
  bool json = false;
};

int AnalyzeSystem(const AnalyzeFlags& f, std::ostream& out) {
  const LearnerConfig config = f.learner.Build();
  const ClosedLoopSystem system = TransitionMatrix(config);
  const StabilityReport report = Stability(system);
  const Matrix& a = system.transition;

  // Smallest j <= n with A^j = 0 (entrywise 1e-12), if any.
  int nilpotent_order = 0;
  Matrix power = a;
  const Matrix square = a * a;
  for (int j = 1; j <= a.rows(); ++j) {
    if (power.cwiseAbs().maxCoeff() <= 1e-12) {
      nilpotent_order = j;
      break;
    }
    power = power * a;
  }

  if (f.json) {
    nlohmann::json j;
    j["dims"] = config.dims.ToString();
    j["transition"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      std::vector<double> row(a.cols());
      for (Eigen::Index c = 0; c < a.cols(); ++c) row[c] = a(r, c);
      j["transition"].push_back(row);
    }
    j["eigenvalues"] = nlohmann::json::array();
    for (const auto& l : report.eigenvalues) {
      j["eigenvalues"].push_back({l.real(), l.imag()});
    }
    j["spectral_radius"] = report.spectral_radius;
    j["converges"] = report.converges;
    j["max_abs_a_squared"] = square.cwiseAbs().maxCoeff();
    j["nilpotent_order"] = nilpotent_order;
    out << j.dump(2) << "\n";
  } else {
    out << std::setprecision(12);
    out << "dims " << config.dims.ToString() << ", delta " << config.delta
        << ", alpha " << config.alpha
        << (config.averaged_update ? " (averaged)" : "") << "\n";
    out << "transition matrix:\n";
    PrintMatrix(out, a);
    out << "eigenvalues:\n";
    for (const auto& l : report.eigenvalues) {
      out << "  " << l.real() << (l.imag() < 0 ? " - " : " + ")
          << std::abs(l.imag()) << "i\n";
    }
    out << "spectral radius: " << report.spectral_radius << "\n";
    out << "converges: " << (report.converges ? "yes" : "no") << "\n";
    out << "max |A^2|: " << square.cwiseAbs().maxCoeff()
        << (square.cwiseAbs().maxCoeff() <= 1e-12 ? " (A^2 = 0)" : "")
        << "\n";
    if (nilpotent_order > 0) {
      out << "nilpotent: A^" << nilpotent_order
          << " = 0, exact convergence in " << nilpotent_order
          << " iterations\n";
    }
  }

  if (!f.iterates_out.empty()) {
    if (f.x0.empty()) throw UsageError("--iterates-out needs --x0");
    const auto v = ParseList(f.x0);
    if (static_cast<int>(v.size()) != config.dims.StateSize()) {
      throw UsageError("--x0 needs " + std::to_string(config.dims.StateSize()) +
                       " values");
    }
    const auto xs = Iterate(
        system, Eigen::Map<const Vector>(v.data(), v.size()), config.iterations);
    SessionIterates s{"closed_loop", {}};
    for (const Vector& x : xs) {
      s.estimates.push_back(Estimate::FromStacked(config.dims, x));
    }
    IterateTable table{config.dims, {s}};
    std::ofstream csv(f.iterates_out);
    if (!csv) throw UsageError("cannot write " + f.iterates_out);
    WriteIterateCsv(table, csv);
  }
  return 0;
}

// -------------------------------------------------------------- stats

int Stats(const std::string& input, const std::string& out_flag,
          std::ostream& out, std::ostream& err) {
  IterateTable table;
  try {
    table = LoadIterates(input, &err);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path out_dir =
      out_flag.empty() ? fs::path(input) / "stats" : fs::path(out_flag);
  const IterationStats stats = ComputeIterationStats(table);
  for (const auto& path : WriteStatsCsvs(stats, out_dir)) {
    out << "wrote " << path.string() << "\n";
  }
  const PercentileRow& last = stats.total_error.back();
  out << std::setprecision(6) << table.sessions.size() << " sessions; total L1 "
      << "error at k=" << last.k << ": median " << last.values[2] << ", p95 "
      << last.values[4] << "\n";
  return 0;
}

// -------------------------------------------------------------- compare

int Compare(const std::string& sim, const std::string& exp,
            const std::string& out_file, std::ostream& out,
            std::ostream& err) {
  IterateTable a;
  IterateTable b;
  try {
    a = LoadIterates(sim, &err);
    b = LoadIterates(exp, &err);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const CompareResult result = CompareMedians(a, b);
  if (out_file.empty()) {
    WriteCompareCsv(result, out);
  } else {
    std::ofstream csv(out_file);
    if (!csv) throw UsageError("cannot write " + out_file);
    WriteCompareCsv(result, csv);
  }
  out << "max abs median gap: " << FormatReal(result.max_abs_gap) << "\n";
  return 0;
}

// -------------------------------------------------------------- serve

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop = true; }

int Serve(const std::string& config_path, const std::string& listen,
          const std::string& out_dir, int threads, std::ostream& out) {
  ExperimentConfig config;
  try {
    config = config_path.empty() ? ExperimentConfig::Defaults(Dims(1, 1))
                                 : LoadExperimentConfig(config_path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw UsageError("--listen must be host:port");
  }
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("bad port in --listen");
  }
  if (port < 0 || port > 65535) throw UsageError("bad port in --listen");

  SessionService service(config, out_dir);
  WebSocketServer server(service);
  const unsigned short bound =
      server.Start(host, static_cast<unsigned short>(port), threads);
  out << "serving experiment '" << config.experiment_id << "' ("
      << config.learner.dims.ToString() << ") on ws://" << host << ":" << bound
      << ", logs -> " << (out_dir.empty() ? "(memory)" : out_dir) << std::endl;
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.Stop();
  out << "stopped" << std::endl;
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Human-machine game learner: simulation, analysis and live "
               "experiment service"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Batch-run simulated sessions");
  sim.learner.Register(simulate);
  simulate->add_option("--inits", sim.inits, "circle8, ball, sphere or fixed");
  simulate->add_option("--init-ball", sim.init_ball,
                       "Shorthand for --inits ball --radius R");
  simulate->add_option("--radius", sim.radius, "Initialization radius")
      ->capture_default_str();
  simulate->add_option("--init", sim.init_point,
                       "Fixed initial estimate h_hat..,m_hat.. (comma list)");
  simulate->add_option("--sessions", sim.sessions,
                       "Number of sessions (default 8 for circle8, else 20)");
  simulate->add_option("--human", sim.human, "exact, noisy or flow")
      ->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "Human noise std-dev")
      ->capture_default_str();
  simulate->add_option("--rate", sim.rate, "Gradient-flow rate (1/s)")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  simulate->add_flag("--no-checks", sim.no_checks, "Skip attention checks");
  simulate->add_flag("--no-traces", sim.no_traces,
                     "Write only the iterate table, no 60 Hz logs");
  simulate->add_option("--trial-seconds", sim.trial_seconds,
                       "Trial duration (default 10 s for d_h=1, else 25 s)");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  AnalyzeFlags analyze;
  auto* analyze_cmd = app.add_subcommand(
      "analyze-system", "Closed-loop transition matrix and stability");
  analyze.learner.Register(analyze_cmd);
  analyze_cmd->add_option("--x0", analyze.x0,
                          "Initial estimate h_hat..,m_hat.. for --iterates-out");
  analyze_cmd->add_option("--iterates-out", analyze.iterates_out,
                          "Write closed-loop iterates as an iterate CSV");
  analyze_cmd->add_flag("--json", analyze.json, "Print the report as JSON");

  std::string stats_in;
  std::string stats_out;
  auto* stats_cmd =
      app.add_subcommand("stats", "Per-iteration percentile tables from logs");
  stats_cmd->add_option("logs", stats_in, "Log directory or file")->required();
  stats_cmd->add_option("--out", stats_out,
                        "Output directory (default <logs>/stats)");

  std::string cmp_sim;
  std::string cmp_exp;
  std::string cmp_out;
  auto* compare_cmd = app.add_subcommand(
      "compare", "Side-by-side per-iteration medians of two data sets");
  compare_cmd->add_option("sim", cmp_sim, "Simulated logs or iterate CSV")
      ->required();
  compare_cmd->add_option("exp", cmp_exp, "Recorded logs or iterate CSV")
      ->required();
  compare_cmd->add_option("--out", cmp_out, "Write the table here");

  std::string serve_config;
  std::string serve_listen = "127.0.0.1:8765";
  std::string serve_out;
  int serve_threads = 2;
  auto* serve_cmd =
      app.add_subcommand("serve", "Run the live experiment WebSocket service");
  serve_cmd->add_option("--config", serve_config, "Experiment config JSON");
  serve_cmd->add_option("--listen", serve_listen, "host:port")
      ->capture_default_str();
  serve_cmd->add_option("--out", serve_out, "Directory for session logs");
  serve_cmd->add_option("--threads", serve_threads, "I/O threads")
      ->capture_default_str();

  std::vector<const char*> argv = {"hmgame"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // --help exits cleanly; every other parse failure is a usage error.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return Simulate(sim, out);
    if (*analyze_cmd) return AnalyzeSystem(analyze, out);
    if (*stats_cmd) return Stats(stats_in, stats_out, out, err);
    if (*compare_cmd) return Compare(cmp_sim, cmp_exp, cmp_out, out, err);
    if (*serve_cmd) {
      return Serve(serve_config, serve_listen, serve_out, serve_threads, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hmgame
