#pragma once

#include <array>

#include "ams/control.hpp"

namespace ams {

/// Loop order shared by the feedback-linearization and learning controllers.
enum class Loop { Z = 0, Phi, Theta, Psi, Theta1, Theta2 };
inline constexpr int kLoopCount = 6;

struct PidGains {
  double kp = 0.0;
  double kd = 0.0;
  double ki = 0.0;
};

struct FblGains {
  std::array<PidGains, kLoopCount> loops{
      PidGains{16, 8, 0.01}, PidGains{100, 8, 10}, PidGains{100, 8, 10},
      PidGains{16, 8, 0.01}, PidGains{16, 8, 0.01}, PidGains{16, 8, 0.01}};
  /// Position feedback added to the desired X/Y accelerations.
  PidGains x{1.0, 2.0, 0.0};
  PidGains y{1.0, 2.0, 0.0};
  /// Bound on |Ki * integral| per loop, in the loop's acceleration units.
  std::array<double, kLoopCount> integral_limit{4.905, 25.0, 25.0, 25.0, 25.0, 25.0};
  double derivative_pole = 50.0;  // rad/s, for the desired roll/pitch rates

  PidGains& operator[](Loop l) { return loops[static_cast<int>(l)]; }
  const PidGains& operator[](Loop l) const { return loops[static_cast<int>(l)]; }

  /// Keys: <loop>_kp, <loop>_kd, <loop>_ki for z, phi, theta, psi, theta1,
  /// theta2, x, y; <loop>_ilimit; derivative_pole.
  static FblGains from_key_values(const KeyValueFile& kv);
};

struct PidState {
  double integral = 0.0;
};

/// q_dd_d + Kp e + Kd e_dot + Ki int(e), with the integral clamped so that
/// |Ki int(e)| <= limit.
double pid_acceleration(const PidGains& g, const TrajectorySample& ref, double y, double ydot, PidState& st,
                        double dt, double limit);

struct TiltCommand {
  double phi = 0.0;
  double theta = 0.0;
  bool clamped = false;  // the roll sine left [-1, 1]
};

/// Roll and pitch that point the thrust along the demanded acceleration,
/// net of the arm's inertial force. Throws std::domain_error on a zero
/// demand (free fall).
TiltCommand desired_attitude(const Vec3& accel, double psi_d, const Vec3& interaction_force_inertial, double mass,
                             double g);

/// Model-cancelling outputs for loop accelerations `u` (Z, phi, theta, psi,
/// theta1, theta2). Joint torques use `links` as the controller's model.
ControlOutput fbl_law(const SystemState& state, const std::array<double, kLoopCount>& u,
                      const InteractionWrench& interaction, double omega_bar, const QuadrotorParams& quad,
                      const LinkParams& links, const Vec3& linear_acceleration, const Vec3& angular_acceleration);

class FblController : public Controller {
 public:
  FblController(QuadrotorParams quad, LinkParams model, FblGains gains = {});
  ControlOutput step(const ControlContext& ctx) override;
  std::string_view name() const override { return "fbl"; }

 private:
  QuadrotorParams quad_;
  LinkParams model_;
  FblGains gains_;
  std::array<PidState, kLoopCount> pid_{};
  PidState x_pid_, y_pid_;
  RateEstimator phi_rate_, theta_rate_;
};

}  // namespace ams
