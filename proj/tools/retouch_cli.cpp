// Copyright 2026 The retouch Authors
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

// retouch: teach, speed up, copy, retouch, and export motion data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "retouch/engine/runs.hpp"
#include "retouch/engine/scenario.hpp"
#include "retouch/engine/session.hpp"
#include "retouch/errors.hpp"
#include "retouch/tape.hpp"

namespace fs = std::filesystem;
using namespace retouch;
using namespace retouch::engine;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

/// Raised for bad paths and inconsistent options; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioOpts {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  bool noise = false;

  void add_to(CLI::App* app) {
    app->add_option("--scenario", path, "Scenario file (default: $RETOUCH_SCENARIO_DIR/tube.scn)");
    app->add_option("--seed", seed, "Override the scenario seed");
    app->add_option("--alpha", alpha, "Override the internal-division ratio")->check(CLI::Range(0.0, 1.0));
    app->add_flag("--noise", noise, "Enable seeded angle quantization");
  }
};

fs::path resolve_scenario(const std::string& given) {
  const char* dir = std::getenv("RETOUCH_SCENARIO_DIR");
  if (given.empty()) {
    if (dir) return fs::path(dir) / "tube.scn";
    return {};
  }
  fs::path p(given);
  if (fs::exists(p)) return p;
  if (dir && p.is_relative() && fs::exists(fs::path(dir) / p)) return fs::path(dir) / p;
  throw UsageError("scenario file not found: " + given);
}

Scenario load_effective(const ScenarioOpts& o) {
  const fs::path path = resolve_scenario(o.path);
  Scenario sc;
  if (path.empty()) {
    sc = default_scenario();
  } else {
    if (!fs::exists(path)) throw UsageError("scenario file not found: " + path.string());
    sc = load_scenario(path);
  }
  if (o.seed) sc.seed = *o.seed;
  if (o.alpha) sc.gains.alpha = *o.alpha;
  if (o.noise) sc.sensor_noise = true;
  sc.validate();
  return sc;
}

tape::Tape load_tape_arg(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("tape file not found: " + path);
  return tape::load_tape(fs::path(path));
}

/// Full effective configuration, so every run can be reproduced from it.
void echo_config(const std::string& command, const Scenario& sc) {
  std::ostringstream text;
  write_scenario(sc, text);
  std::cerr << "# command: " << command << '\n';
  std::istringstream lines(text.str());
  for (std::string line; std::getline(lines, line);) std::cerr << "# " << line << '\n';
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

void print_report(const std::string& label, const SuccessReport& r) {
  std::cout << label << ": " << (r.success ? "success" : "failure") << " (" << to_string(r.reason)
            << ") depth=" << tape::format_double(r.final_depth)
            << " max_lateral_force=" << tape::format_double(r.max_lateral_force)
            << " tube=" << model::to_string(r.final_location) << '\n';
}

std::string log_column(const std::string& what, int joint, const std::string& robot) {
  std::string prefix;
  if (robot == "leader") prefix = "L_";
  else if (robot == "follower") prefix = "F_";
  else prefix = "E_";
  return prefix + (what == "angle" ? "q" : "tauhat") + std::to_string(joint);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion copying and Motion ReTouch pipeline"};
  app.require_subcommand(1);
  const std::string cmdline = command_line(argc, argv);

  // teach
  auto* teach = app.add_subcommand("teach", "Record a tape under bilateral control");
  ScenarioOpts teach_sc;
  std::string teach_out, teach_log;
  teach_sc.add_to(teach);
  teach->add_option("--out", teach_out, "Tape to write")->required();
  teach->add_option("--log", teach_log, "RunLog CSV to write");

  // speedup
  auto* speedup = app.add_subcommand("speedup", "Keep every k-th sample, scale velocity commands");
  std::string sp_in, sp_out;
  int sp_factor = 3;
  speedup->add_option("--in", sp_in, "Input tape")->required();
  speedup->add_option("--factor", sp_factor, "Speed-up factor")->check(CLI::PositiveNumber);
  speedup->add_option("--out", sp_out, "Output tape")->required();

  // copy
  auto* copy = app.add_subcommand("copy", "Replay a tape with motion copying");
  ScenarioOpts copy_sc;
  std::string copy_tape, copy_log_dir;
  int trials = 1;
  copy_sc.add_to(copy);
  copy->add_option("--tape", copy_tape, "Tape to replay")->required();
  copy->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  copy->add_option("--log-dir", copy_log_dir, "Write trial_NN.csv logs here");

  // retouch
  auto* rt = app.add_subcommand("retouch", "Edit a tape with an editor robot");
  ScenarioOpts rt_sc;
  std::string rt_tape, rt_int, rt_out, rt_log, rt_address = "127.0.0.1";
  bool rt_live = false, rt_paused = false, rt_fast = false;
  unsigned short rt_port = 8080;
  rt_sc.add_to(rt);
  rt->add_option("--tape", rt_tape, "Tape to retouch")->required();
  auto* opt_int = rt->add_option("--intervention", rt_int, "Scripted intervention file");
  auto* opt_live = rt->add_flag("--live", rt_live, "Serve a live session");
  opt_int->excludes(opt_live);
  rt->add_option("--port", rt_port, "Live session port")->needs(opt_live);
  rt->add_option("--address", rt_address, "Live session bind address")->needs(opt_live);
  rt->add_flag("--paused", rt_paused, "Start the live session paused")->needs(opt_live);
  rt->add_flag("--no-realtime", rt_fast, "Do not pace the live session at wall-clock rate")->needs(opt_live);
  rt->add_option("--out", rt_out, "Retouched tape to write")->required();
  rt->add_option("--log", rt_log, "RunLog CSV to write");

  // export
  auto* ex = app.add_subcommand("export", "Export a per-joint trace from one or more logs");
  std::vector<std::string> ex_logs;
  std::string ex_what = "torque", ex_out, ex_robot = "follower";
  int ex_joint = 4;
  ex->add_option("--log", ex_logs, "RunLog CSV; several give the per-step mean")->required();
  ex->add_option("--what", ex_what, "angle or torque")->check(CLI::IsMember({"angle", "torque"}));
  ex->add_option("--joint", ex_joint, "Joint 1..8")->check(CLI::Range(1, 8));
  ex->add_option("--robot", ex_robot, "leader, follower or editor")
      ->check(CLI::IsMember({"leader", "follower", "editor"}));
  ex->add_option("--out", ex_out, "Two-column t,value file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (teach->parsed()) {
      const Scenario sc = load_effective(teach_sc);
      echo_config(cmdline, sc);
      const TeachResult r = run_teach(sc);
      tape::save_tape(r.tape, fs::path(teach_out));
      if (!teach_log.empty()) export_log(r.log, fs::path(teach_log));
      std::cout << "tape: " << teach_out << " (" << r.tape.size() << " samples, "
                << tape::format_double(r.tape.duration()) << " s)\n";
      print_report("teach", r.report);
      return kOk;
    }

    if (speedup->parsed()) {
      const tape::Tape in = load_tape_arg(sp_in);
      const tape::Tape out = tape::speed_up(in, sp_factor);
      tape::save_tape(out, fs::path(sp_out));
      std::cout << "speedup x" << sp_factor << ": " << in.size() << " -> " << out.size()
                << " samples, " << tape::format_double(out.duration()) << " s\n";
      return kOk;
    }

    if (copy->parsed()) {
      const Scenario sc = load_effective(copy_sc);
      const tape::Tape tp = load_tape_arg(copy_tape);
      echo_config(cmdline, sc);
      if (!copy_log_dir.empty()) fs::create_directories(copy_log_dir);
      int ok = 0;
      for (int i = 0; i < trials; ++i) {
        const CopyResult r = run_copy(tp, sc, i);
        ok += r.report.success ? 1 : 0;
        std::ostringstream label;
        label << "trial " << std::setw(2) << std::setfill('0') << i + 1;
        print_report(label.str(), r.report);
        if (!copy_log_dir.empty()) {
          std::ostringstream name;
          name << "trial_" << std::setw(2) << std::setfill('0') << i + 1 << ".csv";
          export_log(r.log, fs::path(copy_log_dir) / name.str());
        }
      }
      std::cout << "success: " << ok << "/" << trials << '\n';
      return kOk;
    }

    if (rt->parsed()) {
      if (rt_int.empty() == !rt_live) throw UsageError("give exactly one of --intervention or --live");
      const Scenario sc = load_effective(rt_sc);
      const tape::Tape tp = load_tape_arg(rt_tape);
      echo_config(cmdline, sc);
      RetouchResult r;
      if (rt_live) {
        SessionOptions opt;
        opt.address = rt_address;
        opt.port = rt_port;
        opt.realtime = !rt_fast;
        opt.start_paused = rt_paused;
        opt.save_path = rt_out;
        Session session(tp, sc, sc.intervention, opt);
        std::cout << "listening on ws://" << rt_address << ":" << session.port() << std::endl;
        r = session.run();
        const fs::path timeline = save_retouch(r.tape, r.timeline, fs::path(rt_out));
        std::cout << "timeline: " << timeline.string() << '\n';
      } else {
        if (!fs::exists(rt_int)) throw UsageError("intervention file not found: " + rt_int);
        const InterventionProfile profile = load_intervention(rt_int);
        r = run_retouch(tp, sc, profile);
        tape::save_tape(r.tape, fs::path(rt_out));
      }
      if (!rt_log.empty()) export_log(r.log, fs::path(rt_log));
      std::cout << "tape: " << rt_out << " (" << r.tape.size() << " samples)\n";
      print_report("retouch", r.report);
      return kOk;
    }

    if (ex->parsed()) {
      const std::string column = log_column(ex_what, ex_joint, ex_robot);
      Trace mean;
      for (const std::string& path : ex_logs) {
        if (!fs::exists(path)) throw UsageError("log file not found: " + path);
        const Trace tr = read_log_column(fs::path(path), column);
        if (mean.t.empty()) {
          mean = tr;
          continue;
        }
        if (tr.t != mean.t) throw UsageError("logs have different time bases: " + path);
        for (std::size_t i = 0; i < tr.value.size(); ++i) mean.value[i] += tr.value[i];
      }
      const double n = static_cast<double>(ex_logs.size());
      std::ofstream out(ex_out);
      if (!out) throw std::runtime_error("cannot write " + ex_out);
      out << "t," << column << (ex_logs.size() > 1 ? "_mean" : "") << '\n';
      for (std::size_t i = 0; i < mean.t.size(); ++i)
        out << tape::format_double(mean.t[i]) << ',' << tape::format_double(mean.value[i] / n) << '\n';
      std::cout << "export: " << column << " from " << ex_logs.size() << " log(s), "
                << mean.t.size() << " rows -> " << ex_out << '\n';
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
