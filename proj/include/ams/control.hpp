#pragma once

#include <string_view>

#include "ams/dynamics.hpp"
#include "ams/trajectory.hpp"

namespace ams {

/// What a controller sees at a control tick. Interaction and accelerations
/// are the values realized at the end of the previous physics step.
struct ControlContext {
  double t = 0.0;
  double dt = 0.0;
  SystemState state;
  ReferenceSet refs{};
  InteractionWrench interaction;
  Vec3 linear_acceleration = Vec3::Zero();
  Vec3 angular_acceleration = Vec3::Zero();
  double omega_bar = 0.0;
};

struct ControlOutput {
  BodyWrench wrench;
  Vec2 joint_torque = Vec2::Zero();
  double phi_d = 0.0;    // desired roll produced by the outer loop
  double theta_d = 0.0;  // desired pitch
  bool tilt_clamped = false;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual ControlOutput step(const ControlContext& ctx) = 0;
  virtual std::string_view name() const = 0;
};

/// Backward difference followed by a first-order low-pass with pole `pole`
/// (rad/s). The first sample reports zero rate.
class RateEstimator {
 public:
  explicit RateEstimator(double pole = 50.0) : pole_(pole) {}
  double update(double x, double dt);
  double value() const { return rate_; }
  void reset() { primed_ = false; rate_ = 0.0; }

 private:
  double pole_;
  double prev_ = 0.0;
  double rate_ = 0.0;
  bool primed_ = false;
};

}  // namespace ams
