// Copyright 2026 The qmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: `qmimo <command> [flags]`.
//
// Flags override values from an optional JSON config file (--config) whose
// keys are the flag names with dashes replaced by underscores.

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qmimo/channels.hpp"
#include "qmimo/errors.hpp"
#include "qmimo/experiments.hpp"
#include "qmimo/format.hpp"
#include "qmimo/mimo.hpp"
#include "qmimo/verify.hpp"

namespace qmimo::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kUsage = 2;       // unknown flag or config key, malformed value
inline constexpr int kOutOfRange = 3;  // value outside its admissible range
inline constexpr int kMissing = 4;     // required parameter absent
inline constexpr int kCapacity = 5;    // exact engine cannot hold the request
inline constexpr int kIo = 6;          // unreadable config or unwritable output
inline constexpr int kInternal = 7;
}  // namespace exit_code

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

enum class Command { kFidelity, kSimulate, kRegion, kDmt, kVerify };
enum class Mode { kMux, kDiv, kGeneral };

struct RunConfig {
  Command command = Command::kFidelity;
  std::optional<Mode> mode;
  std::optional<Engine> engine;
  std::optional<double> eta;
  std::optional<double> eps;
  std::optional<double> lambda;
  std::optional<std::size_t> m;
  std::optional<std::size_t> x;
  std::optional<double> eta0;
  std::optional<double> decay;
  std::optional<std::vector<double>> eta_schedule;
  std::optional<std::size_t> n_samples;
  std::uint64_t seed = 42;
  std::optional<std::string> out;
  std::optional<std::string> rows;  // region: per-point CSV
  unsigned threads = 0;
  std::size_t points_per_axis = 200;
  bool allow_any_schedule = false;
  bool csi_swap = false;
  bool timing = false;
};

namespace detail {

inline const std::map<std::string, Command>& command_names() {
  static const std::map<std::string, Command> names = {{"fidelity", Command::kFidelity},
                                                       {"simulate", Command::kSimulate},
                                                       {"region", Command::kRegion},
                                                       {"dmt", Command::kDmt},
                                                       {"verify", Command::kVerify}};
  return names;
}

inline Mode parse_mode(const std::string& s) {
  if (s == "mux") return Mode::kMux;
  if (s == "div") return Mode::kDiv;
  if (s == "general") return Mode::kGeneral;
  throw CliError(exit_code::kOutOfRange, "mode: expected mux, div or general, got '" + s + "'");
}

inline Engine parse_engine(const std::string& s) {
  if (s == "analytic") return Engine::kAnalytic;
  if (s == "density") return Engine::kDensity;
  if (s == "trajectory") return Engine::kTrajectory;
  throw CliError(exit_code::kOutOfRange, "engine: expected analytic, density or trajectory, got '" + s + "'");
}

inline std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> values;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(parse_double(item));
    } catch (const std::invalid_argument&) {
      throw CliError(exit_code::kUsage, "eta_schedule: '" + item + "' is not a number");
    }
  }
  return values;
}

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kMux:
      return "mux";
    case Mode::kDiv:
      return "div";
    case Mode::kGeneral:
      return "general";
  }
  return "";
}

/// Copies keys from a JSON config object into fields the command line left unset.
inline void merge_config_file(const std::string& path, RunConfig& cfg, const std::map<std::string, bool>& given) {
  std::ifstream in(path);
  if (!in) throw CliError(exit_code::kIo, "config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CliError(exit_code::kUsage, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw CliError(exit_code::kUsage, "config: top level must be a JSON object");

  auto unset = [&](const std::string& key) {
    auto it = given.find(key);
    return it == given.end() || !it->second;
  };
  try {
    for (const auto& [key, value] : j.items()) {
      if (!unset(key)) continue;
      if (key == "mode") {
        cfg.mode = parse_mode(value.get<std::string>());
      } else if (key == "engine") {
        cfg.engine = parse_engine(value.get<std::string>());
      } else if (key == "eta") {
        cfg.eta = value.get<double>();
      } else if (key == "eps") {
        cfg.eps = value.get<double>();
      } else if (key == "lambda") {
        cfg.lambda = value.get<double>();
      } else if (key == "m") {
        cfg.m = value.get<std::size_t>();
      } else if (key == "x") {
        cfg.x = value.get<std::size_t>();
      } else if (key == "eta0") {
        cfg.eta0 = value.get<double>();
      } else if (key == "decay") {
        cfg.decay = value.get<double>();
      } else if (key == "eta_schedule") {
        cfg.eta_schedule = value.get<std::vector<double>>();
      } else if (key == "n_samples") {
        cfg.n_samples = value.get<std::size_t>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "out") {
        cfg.out = value.get<std::string>();
      } else if (key == "rows") {
        cfg.rows = value.get<std::string>();
      } else if (key == "threads") {
        cfg.threads = value.get<unsigned>();
      } else if (key == "points_per_axis") {
        cfg.points_per_axis = value.get<std::size_t>();
      } else if (key == "allow_any_schedule") {
        cfg.allow_any_schedule = value.get<bool>();
      } else if (key == "csi_swap") {
        cfg.csi_swap = value.get<bool>();
      } else if (key == "timing") {
        cfg.timing = value.get<bool>();
      } else {
        throw CliError(exit_code::kUsage, "config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw CliError(exit_code::kUsage, "config: bad value type (" + std::string(e.what()) + ")");
  }
}

inline void require(bool present, const std::string& field, const std::string& why) {
  if (!present) throw CliError(exit_code::kMissing, field + ": required " + why);
}

inline void in_unit(const std::optional<double>& v, const std::string& field) {
  if (v && !(*v >= 0.0 && *v <= 1.0)) {
    throw CliError(exit_code::kOutOfRange, field + ": must lie in [0, 1], got " + format_double(*v));
  }
}

/// Required-parameter and range checks for a merged config.
inline void validate(const RunConfig& c) {
  in_unit(c.eta, "eta");
  in_unit(c.eps, "eps");
  in_unit(c.lambda, "lambda");
  in_unit(c.eta0, "eta0");
  if (c.decay && !(*c.decay > 0.0)) throw CliError(exit_code::kOutOfRange, "decay: must be positive");
  if (c.m && *c.m > kMaxLayers) {
    throw CliError(exit_code::kOutOfRange, "m: at most " + std::to_string(kMaxLayers));
  }
  if (c.m && c.x && *c.x > *c.m) throw CliError(exit_code::kOutOfRange, "x: must satisfy x <= m");
  if (c.n_samples && *c.n_samples == 0) throw CliError(exit_code::kOutOfRange, "n_samples: must be positive");
  if (c.points_per_axis < 2) throw CliError(exit_code::kOutOfRange, "points_per_axis: must be at least 2");
  if (c.eta_schedule) {
    for (double v : *c.eta_schedule) in_unit(v, "eta_schedule");
  }

  switch (c.command) {
    case Command::kFidelity:
    case Command::kSimulate: {
      require(c.mode.has_value(), "mode", "for this command");
      require(c.eps.has_value(), "eps", "for this command");
      require(c.lambda.has_value(), "lambda", "for this command");
      if (*c.mode == Mode::kMux) require(c.eta.has_value(), "eta", "for mode mux");
      if (*c.mode == Mode::kGeneral) {
        require(c.m.has_value(), "m", "for mode general");
        require(c.x.has_value(), "x", "for mode general");
        if (*c.m > 0 && !c.eta_schedule) {
          require(c.eta0.has_value(), "eta0", "for mode general (or give --eta-schedule)");
          require(c.decay.has_value(), "decay", "for mode general (or give --eta-schedule)");
        }
      }
      const Engine engine = c.engine.value_or(c.command == Command::kFidelity ? Engine::kAnalytic : Engine::kDensity);
      if (c.command == Command::kFidelity && engine != Engine::kAnalytic) {
        throw CliError(exit_code::kOutOfRange, "engine: fidelity is closed-form only; use simulate");
      }
      if (*c.mode != Mode::kGeneral && engine == Engine::kTrajectory) {
        throw CliError(exit_code::kOutOfRange, "engine: trajectory supports mode general only");
      }
      break;
    }
    case Command::kDmt:
      require(c.m.has_value(), "m", "for dmt");
      require(c.eps.has_value(), "eps", "for dmt");
      require(c.lambda.has_value(), "lambda", "for dmt");
      require(c.eta0.has_value(), "eta0", "for dmt");
      require(c.decay.has_value(), "decay", "for dmt");
      if (*c.m == 0) throw CliError(exit_code::kOutOfRange, "m: must be at least 1 for dmt");
      break;
    case Command::kRegion:
    case Command::kVerify:
      break;
  }
}

inline MimoConfig mimo_config(const RunConfig& c) {
  MimoConfig cfg;
  cfg.m = *c.m;
  cfg.x = *c.x;
  cfg.eta_schedule = c.eta_schedule ? *c.eta_schedule : geometric_schedule(cfg.m, c.eta0.value_or(0.0), c.decay.value_or(1.0));
  cfg.eps = *c.eps;
  cfg.lambda = *c.lambda;
  cfg.allow_any_schedule = c.allow_any_schedule;
  return cfg;
}

inline void write_report(std::ostream& os, Mode mode, const FidelityReport& r) {
  os << "mode,engine,f11,f12,X,stderr,n_samples\n";
  write_csv_row(os, {mode_name(mode), std::string(to_string(r.engine)), format_double(r.f11), format_optional(r.f12),
                     format_optional(r.x_factor), format_optional(r.std_error), format_optional(r.n_samples)});
}

}  // namespace detail

/// Parses command-line tokens (program name excluded) into a validated config.
/// Throws CliError carrying the exit code on any problem.
inline RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Diversity and multiplexing over noisy quantum MIMO channels", "qmimo"};
  app.set_help_flag();  // help is handled by the entry point
  RunConfig cfg;
  std::string command;
  std::optional<std::string> mode, engine, schedule, config_path, out, rows;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> points;
  bool allow_any = false, csi_swap = false, timing = false;

  app.add_option("command", command, "fidelity | simulate | region | dmt | verify");
  app.add_option("--mode", mode);
  app.add_option("--engine", engine);
  app.add_option("--eta", cfg.eta);
  app.add_option("--eps", cfg.eps);
  app.add_option("--lambda", cfg.lambda);
  app.add_option("--m", cfg.m);
  app.add_option("--x", cfg.x);
  app.add_option("--eta0", cfg.eta0);
  app.add_option("--decay", cfg.decay);
  app.add_option("--eta-schedule", schedule);
  app.add_option("--n-samples", cfg.n_samples);
  app.add_option("--seed", seed);
  app.add_option("--out", out);
  app.add_option("--rows", rows);
  app.add_option("--config", config_path);
  app.add_option("--threads", threads);
  app.add_option("--points-per-axis", points);
  app.add_flag("--allow-any-schedule", allow_any);
  app.add_flag("--csi-swap", csi_swap);
  app.add_flag("--timing", timing);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ExtrasError& e) {
    throw CliError(exit_code::kUsage, std::string("unknown argument: ") + e.what());
  } catch (const CLI::ParseError& e) {
    throw CliError(exit_code::kUsage, e.what());
  }

  if (command.empty()) throw CliError(exit_code::kMissing, "command: required (fidelity, simulate, region, dmt, verify)");
  const auto it = detail::command_names().find(command);
  if (it == detail::command_names().end()) throw CliError(exit_code::kUsage, "command: unknown '" + command + "'");
  cfg.command = it->second;

  if (mode) cfg.mode = detail::parse_mode(*mode);
  if (engine) cfg.engine = detail::parse_engine(*engine);
  if (schedule) cfg.eta_schedule = detail::parse_schedule(*schedule);
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (points) cfg.points_per_axis = *points;
  cfg.out = out;
  cfg.rows = rows;
  cfg.allow_any_schedule = allow_any;
  cfg.csi_swap = csi_swap;
  cfg.timing = timing;

  if (config_path) {
    auto given = [&](const char* flag) { return app.get_option(flag)->count() > 0; };
    const std::map<std::string, bool> on_cli = {
        {"mode", given("--mode")},
        {"engine", given("--engine")},
        {"eta", given("--eta")},
        {"eps", given("--eps")},
        {"lambda", given("--lambda")},
        {"m", given("--m")},
        {"x", given("--x")},
        {"eta0", given("--eta0")},
        {"decay", given("--decay")},
        {"eta_schedule", given("--eta-schedule")},
        {"n_samples", given("--n-samples")},
        {"seed", given("--seed")},
        {"out", given("--out")},
        {"rows", given("--rows")},
        {"threads", given("--threads")},
        {"points_per_axis", given("--points-per-axis")},
        {"allow_any_schedule", allow_any},
        {"csi_swap", csi_swap},
        {"timing", timing},
    };
    detail::merge_config_file(*config_path, cfg, on_cli);
  }

  detail::validate(cfg);
  return cfg;
}

namespace detail {

inline int run_fidelity(const RunConfig& c, std::ostream& os) {
  const Mode mode = *c.mode;
  switch (mode) {
    case Mode::kMux:
      write_report(os, mode, analytic_mux_fidelity({*c.eta, *c.eps, *c.lambda}, c.csi_swap));
      break;
    case Mode::kDiv:
      write_report(os, mode, analytic_div_fidelity({c.eta.value_or(0.0), *c.eps, *c.lambda}));
      break;
    case Mode::kGeneral:
      write_report(os, mode, analytic_general_fidelity(mimo_config(c)));
      break;
  }
  return exit_code::kOk;
}

// Rng streams: 0 draws the input state, 1 the second transmitter's Haar
// inputs, 2 the trajectories.
inline int run_simulate(const RunConfig& c, std::ostream& os) {
  const Mode mode = *c.mode;
  const Engine engine = c.engine.value_or(Engine::kDensity);
  Rng input_rng(c.seed, 0);
  const PureState psi0 = haar_state(2, input_rng);
  const ChannelParams p{c.eta.value_or(0.0), *c.eps, *c.lambda};
  FidelityReport r;
  if (mode == Mode::kMux) {
    if (engine == Engine::kAnalytic) {
      r = analytic_mux_fidelity(p, c.csi_swap);
    } else if (c.n_samples) {
      Rng rng(c.seed, 1);
      r = simulate_2x2_mux(psi0, p, *c.n_samples, rng);
    } else {
      r = simulate_2x2_mux_deterministic(psi0, p);
    }
  } else if (mode == Mode::kDiv) {
    r = engine == Engine::kAnalytic ? analytic_div_fidelity(p) : simulate_2x2_div(psi0, p).report;
  } else {
    const MimoConfig cfg = mimo_config(c);
    switch (engine) {
      case Engine::kAnalytic:
        r = analytic_general_fidelity(cfg);
        break;
      case Engine::kDensity:
        r = simulate_general_density(cfg, psi0);
        break;
      case Engine::kTrajectory:
        r = trajectory_estimate(cfg, c.n_samples.value_or(100000), Rng(c.seed, 2), {c.threads});
        break;
    }
  }
  write_report(os, mode, r);
  return exit_code::kOk;
}

inline int run_region(const RunConfig& c, std::ostream& os) {
  GridSpec grid;
  grid.points_per_axis = c.points_per_axis;
  const auto start = std::chrono::steady_clock::now();
  RegionResult result;
  if (c.rows) {
    std::ofstream rows(*c.rows);
    if (!rows) throw CliError(exit_code::kIo, "rows: cannot write '" + *c.rows + "'");
    write_region_header(rows);
    result = region_scan(grid, [&](const RegionRow& r) { write_region_row(rows, r); });
  } else {
    result = region_scan(grid, {}, c.threads);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json summary;
  summary["fraction"] = result.fraction;
  summary["grid_points"] = result.grid_points;
  // Wall time is opt-in so repeated runs stay byte-identical.
  summary["runtime_seconds"] = c.timing ? nlohmann::json(seconds) : nlohmann::json(nullptr);
  os << summary.dump() << '\n';
  return exit_code::kOk;
}

inline int run_dmt(const RunConfig& c, std::ostream& os) {
  std::vector<DmtPoint> all;
  for (std::size_t m = 1; m <= *c.m; ++m) {
    auto curve = dmt_sweep(m, *c.eps, *c.lambda, *c.eta0, *c.decay, c.allow_any_schedule);
    all.insert(all.end(), curve.begin(), curve.end());
  }
  write_dmt_csv(os, all);
  return exit_code::kOk;
}

inline int run_verify(const RunConfig& c, std::ostream& os) {
  VerifyOptions opts;
  opts.seed = c.seed;
  opts.base = ChannelParams{c.eta.value_or(0.2), c.eps.value_or(0.2), c.lambda.value_or(0.2)};
  opts.n_mux = c.n_samples.value_or(200);
  opts.threads = c.threads;
  std::vector<McVerifyRow> sweep;
  opts.sweep_rows = &sweep;
  const auto results = run_self_checks(opts);
  print_check_table(os, results);
  if (c.out) {
    std::ofstream csv(*c.out);
    if (!csv) throw CliError(exit_code::kIo, "out: cannot write '" + *c.out + "'");
    write_mc_verify_csv(csv, sweep);
  }
  const bool all_passed =
      std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
  return all_passed ? exit_code::kOk : exit_code::kVerifyFailed;
}

}  // namespace detail

/// Dispatches a parsed config. Output goes to `--out` when given (except for
/// verify, where --out names the sweep CSV and the table goes to `os`).
inline int run(const RunConfig& c, std::ostream& os) {
  try {
    std::ofstream file;
    std::ostream* target = &os;
    if (c.out && c.command != Command::kVerify) {
      file.open(*c.out);
      if (!file) throw CliError(exit_code::kIo, "out: cannot write '" + *c.out + "'");
      target = &file;
    }
    switch (c.command) {
      case Command::kFidelity:
        return detail::run_fidelity(c, *target);
      case Command::kSimulate:
        return detail::run_simulate(c, *target);
      case Command::kRegion:
        return detail::run_region(c, *target);
      case Command::kDmt:
        return detail::run_dmt(c, *target);
      case Command::kVerify:
        return detail::run_verify(c, *target);
    }
  } catch (const CapacityError& e) {
    throw CliError(exit_code::kCapacity, std::string(e.what()));
  } catch (const ParameterError& e) {
    throw CliError(exit_code::kOutOfRange, e.what());
  }
  return exit_code::kOk;
}

inline constexpr const char* kUsage =
    "usage: qmimo <fidelity|simulate|region|dmt|verify> [flags]\n"
    "  --mode mux|div|general  --engine analytic|density|trajectory\n"
    "  --eta --eps --lambda  --m --x --eta0 --decay --eta-schedule v0,v1,...\n"
    "  --n-samples --seed --threads --points-per-axis --out --rows --config file.json\n"
    "  --allow-any-schedule --csi-swap --timing\n";

/// Full entry point: parse, run, report errors on `err` as one line.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && (args.front() == "--help" || args.front() == "-h" || args.front() == "help")) {
    out << kUsage;
    return exit_code::kOk;
  }
  try {
    return run(parse_args(args), out);
  } catch (const CliError& e) {
    err << "qmimo: " << e.what() << '\n';
    if (e.code() == exit_code::kUsage) err << kUsage;
    return e.code();
  } catch (const std::exception& e) {
    err << "qmimo: internal error: " << e.what() << '\n';
    return exit_code::kInternal;
  }
}

}  // namespace qmimo::cli
