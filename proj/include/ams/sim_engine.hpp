#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ams/control_dflc.hpp"
#include "ams/control_fbl.hpp"
#include "ams/control_fmrlc.hpp"
#include "ams/dynamics.hpp"
#include "ams/rotor_model.hpp"
#include "ams/trajectory.hpp"

namespace ams {

enum class ControllerKind { Fbl, Dflc, Fmrlc };
std::string_view to_string(ControllerKind k);
std::optional<ControllerKind> parse_controller(std::string_view s);

/// Which map closes the loop from commanded to realized wrench.
enum class Actuation { Speeds, Pwm };

struct ScenarioConfig {
  std::string name = "scenario";
  MissionProfile mission;
  ControllerKind controller = ControllerKind::Fmrlc;
  double dt_physics = 1e-3;  // s
  double dt_control = 2e-3;  // s
  double duration = 0.0;     // s; 0 takes the mission duration
  QuadrotorParams quad;
  LinkParams links;
  RotorCalibration calibration = RotorCalibration::thesis_symmetric();
  Actuation actuation = Actuation::Speeds;
  FblGains fbl;
  DflcGains dflc;
  FmrlcGains fmrlc;
  double divergence_limit = 1e6;
  SystemState initial;

  double run_time() const { return duration > 0.0 ? duration : mission.duration; }
  int substeps() const;
  void validate() const;

  /// Scenario file keys:
  ///   name, controller (fbl|dflc|fmrlc), dt_physics, dt_control, duration,
  ///   actuation (speeds|pwm), calibration (symmetric|per_rotor|PATH),
  ///   params PATH, gains PATH, mission (thesis|thesis_region1|PATH),
  ///   divergence_limit, initial_theta1, initial_theta2,
  ///   param.<key> and gain.<key> inline overrides.
  /// Record lines (initial/segment/payload) define an inline mission.
  /// Relative paths resolve against `base_dir`.
  static ScenarioConfig from_key_values(const KeyValueFile& kv, const std::string& base_dir = ".");
  static ScenarioConfig load(const std::string& path);
};

enum class LogEvent { None = 0, Pick = 1, Place = 2, Divergence = 9 };

struct LogRow {
  double t = 0.0;
  SystemState state;
  std::array<double, kChannelCount> refs{};
  double phi_d = 0.0;
  double theta_d = 0.0;
  BodyWrench commanded;
  BodyWrench realized;
  Vec2 joint_torque = Vec2::Zero();
  InteractionWrench interaction;
  double omega_bar = 0.0;
  bool actuator_saturated = false;
  double payload = 0.0;
  LogEvent event = LogEvent::None;
};

struct SimLog {
  std::string scenario;
  std::string controller;
  std::vector<LogRow> rows;
  bool diverged = false;
  double divergence_time = 0.0;
  std::string divergence_reason;

  void write_csv(std::ostream& os) const;
  static std::vector<std::string> csv_header();
};

/// Classical fourth-order Runge-Kutta step.
template <typename F, typename State>
State rk4_step(F&& f, const State& x, double dt) {
  const State k1 = f(x);
  const State k2 = f(State(x + 0.5 * dt * k1));
  const State k3 = f(State(x + 0.5 * dt * k2));
  const State k4 = f(State(x + dt * k3));
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Plant link parameters across pick/place. Every change is recomputed from
/// the pristine set, so placing restores it exactly.
class PayloadState {
 public:
  explicit PayloadState(LinkParams pristine) : pristine_(std::move(pristine)), current_(pristine_) {}
  void pick(double mass) {
    current_ = apply_payload(pristine_, mass);
    mass_ = mass;
  }
  void place() {
    current_ = pristine_;
    mass_ = 0.0;
  }
  const LinkParams& links() const { return current_; }
  double mass() const { return mass_; }

 private:
  LinkParams pristine_;
  LinkParams current_;
  double mass_ = 0.0;
};

std::unique_ptr<Controller> make_controller(const ScenarioConfig& cfg);

SimLog run_scenario(const ScenarioConfig& cfg);

struct TracePoint {
  double t = 0.0;
  EndEffectorPose pose;
};

std::vector<TracePoint> end_effector_trace(const SimLog& log, const ManipulatorGeometry& g);
void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace);

}  // namespace ams
