// ams: simulate scenarios, plan missions, run the mixer and fit rig data.
#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "ams/identification.hpp"
#include "ams/sim_engine.hpp"

namespace fs = std::filesystem;
using namespace ams;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  static const Level level = [] {
    const char* env = std::getenv("AMS_LOG_LEVEL");
    const std::string s = env ? env : "info";
    if (s == "error") return Level::Error;
    if (s == "warn") return Level::Warn;
    if (s == "debug") return Level::Debug;
    return Level::Info;
  }();
  return level;
}

std::mutex log_mutex;

void log(Level l, const std::string& msg) {
  if (l > log_level()) return;
  static const char* tag[] = {"error", "warn", "info", "debug"};
  std::lock_guard lock(log_mutex);
  std::cerr << "ams " << tag[static_cast<int>(l)] << ": " << msg << '\n';
}

std::ofstream open_out(const std::string& path) {
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  return os;
}

RotorCalibration calibration_arg(const std::string& s) {
  if (s == "symmetric") return RotorCalibration::thesis_symmetric();
  if (s == "per_rotor") return RotorCalibration::thesis_per_rotor();
  return RotorCalibration::from_key_values(KeyValueFile::load(s));
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::vector<std::string> scenarios;
  std::string out;
  std::string controller;
  std::string trace;
  unsigned jobs = 0;
  bool seedless = false;
};

void simulate_one(const std::string& scenario, const std::string& out, const SimulateArgs& a) {
  ScenarioConfig cfg = ScenarioConfig::load(scenario);
  if (!a.controller.empty()) cfg.controller = *parse_controller(a.controller);
  const auto t0 = std::chrono::steady_clock::now();
  const SimLog sim = run_scenario(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto os = open_out(out);
  sim.write_csv(os);
  if (sim.diverged) {
    log(Level::Warn, cfg.name + " (" + sim.controller + "): diverged at t=" + format_number(sim.divergence_time) +
                         " s: " + sim.divergence_reason);
  }
  log(Level::Info, cfg.name + " (" + sim.controller + "): " + std::to_string(sim.rows.size()) + " rows in " +
                       format_number(std::round(wall * 1000) / 1000) + " s -> " + out);
  if (!a.trace.empty()) {
    const std::string trace = a.scenarios.size() == 1 ? a.trace : (fs::path(a.trace) / (cfg.name + "_trace.csv")).string();
    auto ts = open_out(trace);
    write_trace_csv(ts, end_effector_trace(sim, cfg.links.geometry()));
  }
}

int cmd_simulate(const SimulateArgs& a) {
  if (a.scenarios.size() == 1) {
    simulate_one(a.scenarios.front(), a.out, a);
    return 0;
  }
  // Batch: --out is a directory, one CSV per scenario, independent runs.
  std::vector<std::string> outs;
  for (const auto& s : a.scenarios) outs.push_back((fs::path(a.out) / (fs::path(s).stem().string() + ".csv")).string());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(a.jobs ? a.jobs : hw, static_cast<unsigned>(a.scenarios.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(a.scenarios.size());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < a.scenarios.size();) {
        try {
          simulate_one(a.scenarios[i], outs[i], a);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return 0;
}

// --- fit ------------------------------------------------------------------

int cmd_fit(const std::string& data, const std::string& out, const std::string& unit, const std::string& cal_out) {
  std::ifstream in(data);
  if (!in) throw std::runtime_error("cannot read '" + data + "'");
  const auto samples = read_rig_csv(in);
  const FitResult fit = fit_rotors(samples, unit == "N" ? ThrustUnit::Newton : ThrustUnit::GramForce);
  auto os = open_out(out);
  write_fit_csv(os, fit);
  if (!cal_out.empty()) {
    auto cs = open_out(cal_out);
    cs << fit.calibration(RotorCalibration::thesis_per_rotor()).to_key_values();
  }
  log(Level::Info, "fitted " + std::to_string(samples.size()) + " samples -> " + out);
  return 0;
}

// --- plan -----------------------------------------------------------------

int cmd_plan(const std::string& mission, int regions, double dt, const std::string& out, const std::string& mission_out) {
  MissionProfile m;
  if (mission == "thesis") {
    MissionTiming timing;
    timing.regions = regions;
    m = thesis_mission(LinkParams{}.geometry(), timing);
  } else if (mission != "empty") {
    m = MissionProfile::from_key_values(KeyValueFile::load(mission));
  }
  if (!mission_out.empty()) {
    auto ms = open_out(mission_out);
    ms << m.to_text();
  }
  auto os = open_out(out);
  os << "t";
  for (int c = 0; c < kChannelCount; ++c) {
    const auto n = channel_name(static_cast<Channel>(c));
    os << ',' << n << ',' << n << "_d," << n << "_dd";
  }
  os << '\n';
  if (m.duration > 0.0) {
    const long n = static_cast<long>(std::floor(m.duration / dt + 1e-9));
    for (long k = 0; k <= n; ++k) {
      const double t = k * dt;
      const ReferenceSet r = m.sample(t);
      os << format_number(t);
      for (const auto& s : r) os << ',' << format_number(s.q) << ',' << format_number(s.qd) << ',' << format_number(s.qdd);
      os << '\n';
    }
  }
  log(Level::Info, "planned mission -> " + out);
  return 0;
}

// --- mixer ----------------------------------------------------------------

int cmd_mixer(const BodyWrench& w, const std::string& calibration, double arm, std::ostream& os) {
  const RotorCalibration cal = calibration_arg(calibration);
  const MixerResult mix = mixer_speeds_from_wrench(cal, w, arm);
  const PwmResult pwm = pwm_from_wrench(cal, w, arm);
  const RotorSpeeds speeds = mix.speeds();
  os << "rotor,omega,omega_sq,pwm\n";
  for (int j = 0; j < 4; ++j) {
    os << j + 1 << ',' << format_number(speeds.omega(j)) << ',' << format_number(mix.omega_sq(j)) << ','
       << format_number(pwm.pwm.u(j)) << '\n';
  }
  os << "# omega_bar=" << format_number(omega_bar(speeds)) << " speed_saturated=" << mix.saturated
     << " pwm_saturated=" << pwm.saturated << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aerial manipulator simulation and identification tools"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one or more scenario files and write CSV logs");
  simulate->add_option("--scenario", sim.scenarios, "Scenario file; repeat for a parallel batch")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "CSV log path (output directory for a batch)")->required();
  simulate->add_option("--controller", sim.controller, "Override the scenario controller")
      ->check(CLI::IsMember({"fbl", "dflc", "fmrlc"}));
  simulate->add_option("--trace", sim.trace, "Also write the end-effector trace CSV here");
  simulate->add_option("-j,--jobs", sim.jobs, "Worker threads for a batch (default: hardware)");
  simulate->add_flag("--seedless", sim.seedless, "Accepted for compatibility; runs are always deterministic");

  std::string data, fit_out, unit = "gf", cal_out;
  auto* fit = app.add_subcommand("fit", "Least-squares rotor maps from test-stand data");
  fit->add_option("--data", data, "CSV with rotor,pwm,omega_sq,thrust,power")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Fit table CSV")->required();
  fit->add_option("--thrust-unit", unit, "Unit of the thrust column")->check(CLI::IsMember({"gf", "N"}));
  fit->add_option("--calibration-out", cal_out, "Also write a calibration file");

  std::string mission = "thesis", plan_out, mission_out;
  int regions = 3;
  double plan_dt = 0.01;
  auto* plan = app.add_subcommand("plan", "Sample a mission into a reference CSV");
  plan->add_option("--mission", mission, "thesis, empty, or a mission file");
  plan->add_option("--regions", regions, "Regions visited by the thesis mission")->check(CLI::Range(1, 3));
  plan->add_option("--dt", plan_dt, "Sample period [s]")->check(CLI::PositiveNumber);
  plan->add_option("--out", plan_out, "Reference CSV")->required();
  plan->add_option("--mission-out", mission_out, "Also write the mission file");

  BodyWrench w;
  std::string calibration = "symmetric", mixer_out;
  double arm = QuadrotorParams{}.arm;
  auto* mixer = app.add_subcommand("mixer", "Rotor speeds and PWM for a body wrench");
  mixer->add_option("--thrust", w.thrust, "Total thrust [N]")->required();
  mixer->add_option("--tau1", w.tau1, "Roll moment [N.m]");
  mixer->add_option("--tau2", w.tau2, "Pitch moment [N.m]");
  mixer->add_option("--tau3", w.tau3, "Yaw moment [N.m]");
  mixer->add_option("--calibration", calibration, "symmetric, per_rotor, or a calibration file");
  mixer->add_option("--arm", arm, "Rotor arm length [m]")->check(CLI::PositiveNumber);
  mixer->add_option("--out", mixer_out, "Write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*fit) return cmd_fit(data, fit_out, unit, cal_out);
    if (*plan) return cmd_plan(mission, regions, plan_dt, plan_out, mission_out);
    if (*mixer) {
      if (mixer_out.empty()) return cmd_mixer(w, calibration, arm, std::cout);
      auto os = open_out(mixer_out);
      return cmd_mixer(w, calibration, arm, os);
    }
  } catch (const ParseError& e) {
    log(Level::Error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return 1;
  }
  return 0;
}
