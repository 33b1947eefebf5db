#include "ams/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace ams {

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Fbl: return "fbl";
    case ControllerKind::Dflc: return "dflc";
    case ControllerKind::Fmrlc: return "fmrlc";
  }
  return "?";
}

std::optional<ControllerKind> parse_controller(std::string_view s) {
  if (s == "fbl") return ControllerKind::Fbl;
  if (s == "dflc") return ControllerKind::Dflc;
  if (s == "fmrlc") return ControllerKind::Fmrlc;
  return std::nullopt;
}

int ScenarioConfig::substeps() const { return static_cast<int>(std::lround(dt_control / dt_physics)); }

void ScenarioConfig::validate() const {
  if (!(dt_physics > 0.0) || !(dt_control > 0.0)) throw std::invalid_argument("scenario: time steps must be positive");
  const int n = substeps();
  if (n < 1 || std::abs(n * dt_physics - dt_control) > 1e-12 * dt_control) {
    throw std::invalid_argument("scenario: dt_control must be an integer multiple of dt_physics");
  }
  if (!(run_time() > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(divergence_limit > 0.0)) throw std::invalid_argument("scenario: divergence_limit must be positive");
  quad.validate();
  links.validate();
  calibration.validate();
  mission.validate();
}

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (std::filesystem::path(base) / path).string();
}

// Entries under `prefix` with the prefix stripped.
KeyValueFile sub_keys(const KeyValueFile& kv, const std::string& prefix) {
  KeyValueFile out;
  for (const auto& [k, e] : kv.entries()) {
    if (k.rfind(prefix, 0) == 0) out.set(k.substr(prefix.size()), e.value, e.unit);
  }
  return out;
}

KeyValueFile merge(KeyValueFile base, const KeyValueFile& over) {
  for (const auto& [k, e] : over.entries()) base.set(k, e.value, e.unit);
  return base;
}

template <typename Fn>
auto rethrow_as_parse(const KeyValueFile& kv, const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(kv.has(key) ? kv.entry(key).line : 0, e.what());
  }
}

}  // namespace

ScenarioConfig ScenarioConfig::from_key_values(const KeyValueFile& kv, const std::string& base_dir) {
  static const std::vector<std::string> known{
      "name",        "controller", "dt_physics", "dt_control",       "duration",       "actuation",
      "calibration", "params",     "gains",      "mission",          "divergence_limit", "initial_theta1",
      "initial_theta2"};
  for (const auto& [k, e] : kv.entries()) {
    const bool prefixed = k.rfind("param.", 0) == 0 || k.rfind("gain.", 0) == 0;
    if (!prefixed && std::find(known.begin(), known.end(), k) == known.end()) {
      throw ParseError(e.line, "unknown scenario key '" + k + "'");
    }
  }

  ScenarioConfig cfg;
  cfg.name = kv.text_or("name", cfg.name);
  if (kv.has("controller")) {
    const auto c = parse_controller(kv.text("controller"));
    if (!c) throw ParseError(kv.entry("controller").line, "unknown controller '" + kv.text("controller") + "'");
    cfg.controller = *c;
  }
  cfg.dt_physics = kv.number_or("dt_physics", cfg.dt_physics);
  cfg.dt_control = kv.number_or("dt_control", cfg.dt_control);
  cfg.duration = kv.number_or("duration", cfg.duration);
  cfg.divergence_limit = kv.number_or("divergence_limit", cfg.divergence_limit);
  if (kv.has("actuation")) {
    const std::string a = kv.text("actuation");
    if (a == "speeds") {
      cfg.actuation = Actuation::Speeds;
    } else if (a == "pwm") {
      cfg.actuation = Actuation::Pwm;
    } else {
      throw ParseError(kv.entry("actuation").line, "unknown actuation '" + a + "'");
    }
  }
  if (kv.has("calibration")) {
    const std::string c = kv.text("calibration");
    if (c == "symmetric") {
      cfg.calibration = RotorCalibration::thesis_symmetric();
    } else if (c == "per_rotor") {
      cfg.calibration = RotorCalibration::thesis_per_rotor();
    } else {
      cfg.calibration = rethrow_as_parse(kv, "calibration", [&] {
        return RotorCalibration::from_key_values(KeyValueFile::load(resolve(base_dir, c)));
      });
    }
  }

  KeyValueFile params = sub_keys(kv, "param.");
  if (kv.has("params")) {
    params = merge(rethrow_as_parse(kv, "params", [&] { return KeyValueFile::load(resolve(base_dir, kv.text("params"))); }),
                   params);
  }
  rethrow_as_parse(kv, "params", [&] {
    load_params(params, cfg.quad, cfg.links);
    return 0;
  });

  KeyValueFile gains = sub_keys(kv, "gain.");
  if (kv.has("gains")) {
    gains = merge(rethrow_as_parse(kv, "gains", [&] { return KeyValueFile::load(resolve(base_dir, kv.text("gains"))); }),
                  gains);
  }
  cfg.fbl = FblGains::from_key_values(gains);
  cfg.dflc = DflcGains::from_key_values(gains);
  cfg.fmrlc = FmrlcGains::from_key_values(gains);

  const std::string mission = kv.text_or("mission", kv.records().empty() ? "thesis" : "inline");
  if (mission == "thesis" || mission == "thesis_region1") {
    MissionTiming timing;
    if (mission == "thesis_region1") timing.regions = 1;
    cfg.mission = thesis_mission(cfg.links.geometry(), timing);
  } else if (mission == "inline") {
    cfg.mission = MissionProfile::from_key_values(kv);
  } else {
    cfg.mission = MissionProfile::from_key_values(
        rethrow_as_parse(kv, "mission", [&] { return KeyValueFile::load(resolve(base_dir, mission)); }));
  }
  if (mission != "inline" && !kv.records().empty()) {
    throw ParseError(kv.records().front().line, "mission records given together with 'mission = " + mission + "'");
  }

  cfg.initial.joints = Vec2(kv.number_or("initial_theta1", 0.0), kv.number_or("initial_theta2", 0.0));
  cfg.initial.attitude(2) = cfg.mission.sample(0.0)[static_cast<int>(Channel::Psi)].q;
  cfg.initial.position = Vec3(cfg.mission.sample(0.0)[0].q, cfg.mission.sample(0.0)[1].q, cfg.mission.sample(0.0)[2].q);

  rethrow_as_parse(kv, "duration", [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  auto cfg = from_key_values(kv, std::filesystem::path(path).parent_path().string());
  if (!kv.has("name")) cfg.name = std::filesystem::path(path).stem().string();
  return cfg;
}

std::unique_ptr<Controller> make_controller(const ScenarioConfig& cfg) {
  switch (cfg.controller) {
    case ControllerKind::Fbl: return std::make_unique<FblController>(cfg.quad, cfg.links, cfg.fbl);
    case ControllerKind::Dflc: return std::make_unique<DflcController>(cfg.dflc);
    case ControllerKind::Fmrlc: return std::make_unique<FmrlcController>(cfg.fmrlc);
  }
  throw std::logic_error("make_controller: unknown kind");
}

namespace {

struct Actuated {
  BodyWrench realized;
  double omega_bar = 0.0;
  bool saturated = false;
};

Actuated actuate(const ScenarioConfig& cfg, const BodyWrench& cmd) {
  Actuated a;
  if (cfg.actuation == Actuation::Speeds) {
    const MixerResult mix = mixer_speeds_from_wrench(cfg.calibration, cmd, cfg.quad.arm);
    a.realized = wrench_from_speeds(cfg.calibration, mix.omega_sq, cfg.quad.arm);
    a.omega_bar = omega_bar(mix.speeds());
    a.saturated = mix.saturated;
  } else {
    const PwmResult pwm = pwm_from_wrench(cfg.calibration, cmd, cfg.quad.arm);
    a.realized = wrench_from_pwm(cfg.calibration, pwm.pwm, cfg.quad.arm);
    const SpeedResult sp = speed_from_pwm(cfg.calibration, pwm.pwm);
    a.omega_bar = omega_bar(sp.speeds);
    a.saturated = pwm.saturated || sp.below_spin_up;
  }
  return a;
}

bool out_of_bounds(const StateVector& x, double limit) {
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || std::abs(x(i)) > limit) return true;
  }
  return false;
}

}  // namespace

SimLog run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  SimLog log;
  log.scenario = cfg.name;
  log.controller = std::string(to_string(cfg.controller));

  auto controller = make_controller(cfg);
  PayloadState plant(cfg.links);
  bool picked = false, placed = false;

  SystemState state = cfg.initial;
  // Start from the static arm load.
  const auto rest = rne_pass(state.euler(), BaseMotion{}, state.joints, Vec2::Zero(), Vec2::Zero(), plant.links());
  InteractionWrench interaction = interaction_wrench(rest, state.euler(), plant.links().L0);
  Vec3 lin_acc = Vec3::Zero(), ang_acc = Vec3::Zero();
  double last_omega_bar = 0.0;

  const int substeps = cfg.substeps();
  const long ticks = static_cast<long>(std::floor(cfg.run_time() / cfg.dt_control + 1e-9));

  auto diverge = [&](double t, const std::string& why, const SystemState& s) {
    log.diverged = true;
    log.divergence_time = t;
    log.divergence_reason = why;
    LogRow row;
    row.t = t;
    row.state = s;
    row.payload = plant.mass();
    row.event = LogEvent::Divergence;
    log.rows.push_back(row);
  };

  log.rows.reserve(static_cast<std::size_t>(ticks + 2));
  for (long k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * cfg.dt_control;
    LogRow row;
    row.t = t;
    if (cfg.mission.payload) {
      const auto& ev = *cfg.mission.payload;
      if (!picked && t >= ev.pick) {
        picked = true;
        plant.pick(ev.mass);
        row.event = LogEvent::Pick;
      } else if (picked && !placed && t >= ev.place) {
        placed = true;
        plant.place();
        row.event = LogEvent::Place;
      }
    }

    ControlContext ctx;
    ctx.t = t;
    ctx.dt = cfg.dt_control;
    ctx.state = state;
    ctx.refs = cfg.mission.sample(t);
    ctx.interaction = interaction;
    ctx.linear_acceleration = lin_acc;
    ctx.angular_acceleration = ang_acc;
    ctx.omega_bar = last_omega_bar;

    ControlOutput out;
    Actuated act;
    try {
      out = controller->step(ctx);
      act = actuate(cfg, out.wrench);
    } catch (const std::exception& e) {
      diverge(t, std::string("controller: ") + e.what(), state);
      return log;
    }
    last_omega_bar = act.omega_bar;

    row.state = state;
    for (int i = 0; i < kChannelCount; ++i) row.refs[i] = ctx.refs[i].q;
    row.phi_d = out.phi_d;
    row.theta_d = out.theta_d;
    row.commanded = out.wrench;
    row.realized = act.realized;
    row.joint_torque = out.joint_torque;
    row.interaction = interaction;
    row.omega_bar = act.omega_bar;
    row.actuator_saturated = act.saturated;
    row.payload = plant.mass();
    log.rows.push_back(row);
    if (k == ticks) break;

    const ControlInput input{act.realized, act.omega_bar, out.joint_torque};
    StateVector x = state.to_vector();
    try {
      auto f = [&](const StateVector& s) { return state_derivative(SystemState::from_vector(s), input, cfg.quad, plant.links()); };
      for (int j = 0; j < substeps; ++j) {
        x = rk4_step(f, x, cfg.dt_physics);
        if (out_of_bounds(x, cfg.divergence_limit)) {
          diverge(t + (j + 1) * cfg.dt_physics, "state left the numeric bounds", SystemState::from_vector(x));
          return log;
        }
      }
      state = SystemState::from_vector(x);
      const DynamicsEvaluation ev = evaluate_dynamics(state, input, cfg.quad, plant.links());
      interaction = ev.interaction;
      lin_acc = ev.linear_acceleration;
      ang_acc = ev.angular_acceleration;
    } catch (const ModelValidityError& e) {
      diverge(t + cfg.dt_control, e.what(), SystemState::from_vector(x));
      return log;
    }
  }
  return log;
}

std::vector<std::string> SimLog::csv_header() {
  return {"t",          "X",        "Y",       "Z",        "phi",      "theta",    "psi",      "theta1",
          "theta2",     "dX",       "dY",      "dZ",       "dphi",     "dtheta",   "dpsi",     "dtheta1",
          "dtheta2",    "ref_X",    "ref_Y",   "ref_Z",    "ref_psi",  "ref_theta1", "ref_theta2", "phi_d",
          "theta_d",    "T_cmd",    "tau1_cmd", "tau2_cmd", "tau3_cmd", "T",        "tau1",     "tau2",
          "tau3",       "Tm1",      "Tm2",     "Fx_I",     "Fy_I",     "Fz_I",     "Mx_B",     "My_B",
          "Mz_B",       "omega_bar", "saturated", "payload", "event"};
}

void SimLog::write_csv(std::ostream& os) const {
  const auto header = csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    const StateVector x = r.state.to_vector();
    std::vector<double> v;
    v.reserve(header.size());
    v.push_back(r.t);
    for (int i = 0; i < x.size(); ++i) v.push_back(x(i));
    v.insert(v.end(), r.refs.begin(), r.refs.end());
    v.push_back(r.phi_d);
    v.push_back(r.theta_d);
    for (const BodyWrench* w : {&r.commanded, &r.realized}) {
      v.push_back(w->thrust);
      v.push_back(w->tau1);
      v.push_back(w->tau2);
      v.push_back(w->tau3);
    }
    v.push_back(r.joint_torque(0));
    v.push_back(r.joint_torque(1));
    for (int i = 0; i < 3; ++i) v.push_back(r.interaction.force_inertial(i));
    for (int i = 0; i < 3; ++i) v.push_back(r.interaction.moment_body(i));
    v.push_back(r.omega_bar);
    v.push_back(r.actuator_saturated ? 1.0 : 0.0);
    v.push_back(r.payload);
    v.push_back(static_cast<double>(static_cast<int>(r.event)));
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_number(v[i]);
    os << '\n';
  }
}

std::vector<TracePoint> end_effector_trace(const SimLog& log, const ManipulatorGeometry& g) {
  std::vector<TracePoint> out;
  out.reserve(log.rows.size());
  for (const auto& r : log.rows) out.push_back({r.t, forward_kinematics(r.state.quad_pose(), r.state.joint_angles(), g)});
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "t,x_ee,y_ee,z_ee,phi_ee,theta_ee,psi_ee\n";
  for (const auto& p : trace) {
    const double v[] = {p.t,
                        p.pose.position.x(),
                        p.pose.position.y(),
                        p.pose.position.z(),
                        p.pose.orientation.phi,
                        p.pose.orientation.theta,
                        p.pose.orientation.psi};
    for (int i = 0; i < 7; ++i) os << (i ? "," : "") << format_number(v[i]);
    os << '\n';
  }
}

}  // namespace ams
