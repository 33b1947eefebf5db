#include "ams/control_fbl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ams {

namespace {

constexpr std::array<const char*, kLoopCount> kLoopKeys{"z", "phi", "theta", "psi", "theta1", "theta2"};

void read_pid(const KeyValueFile& kv, const std::string& prefix, PidGains& g) {
  g.kp = kv.number_or(prefix + "_kp", g.kp);
  g.kd = kv.number_or(prefix + "_kd", g.kd);
  g.ki = kv.number_or(prefix + "_ki", g.ki);
  if (g.kp < 0 || g.kd < 0 || g.ki < 0) throw ParseError(0, "negative gain for loop '" + prefix + "'");
}

}  // namespace

FblGains FblGains::from_key_values(const KeyValueFile& kv) {
  FblGains g;
  for (int i = 0; i < kLoopCount; ++i) {
    read_pid(kv, kLoopKeys[i], g.loops[i]);
    g.integral_limit[i] = kv.number_or(std::string(kLoopKeys[i]) + "_ilimit", g.integral_limit[i]);
  }
  read_pid(kv, "x", g.x);
  read_pid(kv, "y", g.y);
  g.derivative_pole = kv.number_or("derivative_pole", g.derivative_pole);
  return g;
}

double pid_acceleration(const PidGains& g, const TrajectorySample& ref, double y, double ydot, PidState& st,
                        double dt, double limit) {
  const double e = ref.q - y;
  st.integral += e * dt;
  if (g.ki > 0.0) st.integral = std::clamp(st.integral, -limit / g.ki, limit / g.ki);
  return ref.qdd + g.kp * e + g.kd * (ref.qd - ydot) + g.ki * st.integral;
}

TiltCommand desired_attitude(const Vec3& accel, double psi_d, const Vec3& interaction_force_inertial, double mass,
                             double g) {
  const Vec3 a = accel - interaction_force_inertial / mass + Vec3(0.0, 0.0, g);
  const double norm = a.norm();
  if (!(norm > 0.0)) throw std::domain_error("desired_attitude: zero thrust demand");
  const double c = std::cos(psi_d), s = std::sin(psi_d);
  TiltCommand out;
  const double sin_phi = (a.x() * s - a.y() * c) / norm;
  out.clamped = std::abs(sin_phi) > 1.0;
  out.phi = std::asin(std::clamp(sin_phi, -1.0, 1.0));
  out.theta = std::atan2(a.x() * c + a.y() * s, a.z());
  return out;
}

ControlOutput fbl_law(const SystemState& state, const std::array<double, kLoopCount>& u,
                      const InteractionWrench& interaction, double omega_bar, const QuadrotorParams& quad,
                      const LinkParams& links, const Vec3& linear_acceleration, const Vec3& angular_acceleration) {
  const double cf = std::cos(state.attitude(0)), ct = std::cos(state.attitude(1));
  if (!(cf * ct > 0.0)) throw ModelValidityError("fbl_law: attitude outside the validity region");
  const double p = state.attitude_rate(0), q = state.attitude_rate(1), r = state.attitude_rate(2);
  const Vec3& m = interaction.moment_body;

  ControlOutput out;
  out.wrench.thrust = (quad.m * u[0] + quad.m * quad.g - interaction.force_inertial.z()) / (cf * ct);
  out.wrench.tau1 = quad.Ix * u[1] - q * r * (quad.Iy - quad.Iz) + quad.Ir * q * omega_bar - m(0);
  out.wrench.tau2 = quad.Iy * u[2] - p * r * (quad.Iz - quad.Ix) - quad.Ir * p * omega_bar - m(1);
  out.wrench.tau3 = quad.Iz * u[3] - p * q * (quad.Ix - quad.Iy) - m(2);

  // M_i u_i - N_i is the recursion's torque at joint accelerations u.
  const Mat3 r_bi = rotation_from_euler(state.euler());
  const RneResult rne = rne_sweep(state, r_bi * linear_acceleration, angular_acceleration, Vec2(u[4], u[5]), links);
  for (int i = 0; i < 2; ++i) {
    out.joint_torque(i) = rne.joint_model.inertia(i) * u[4 + i] - rne.joint_model.bias(i);
  }
  return out;
}

FblController::FblController(QuadrotorParams quad, LinkParams model, FblGains gains)
    : quad_(quad),
      model_(std::move(model)),
      gains_(gains),
      phi_rate_(gains.derivative_pole),
      theta_rate_(gains.derivative_pole) {}

ControlOutput FblController::step(const ControlContext& ctx) {
  const SystemState& s = ctx.state;
  const auto& ref = ctx.refs;
  const auto X = ref[static_cast<int>(Channel::X)], Y = ref[static_cast<int>(Channel::Y)];
  const auto Z = ref[static_cast<int>(Channel::Z)], psi = ref[static_cast<int>(Channel::Psi)];

  const double ax = pid_acceleration(gains_.x, X, s.position.x(), s.velocity.x(), x_pid_, ctx.dt, 1e9);
  const double ay = pid_acceleration(gains_.y, Y, s.position.y(), s.velocity.y(), y_pid_, ctx.dt, 1e9);
  const TiltCommand tilt =
      desired_attitude(Vec3(ax, ay, Z.qdd), psi.q, ctx.interaction.force_inertial, quad_.m, quad_.g);

  // No second-derivative feedforward: differentiating phi_d twice closes a fast
  // loop through the lagged interaction force that the attitude PID cannot hold.
  const TrajectorySample phi_ref{tilt.phi, phi_rate_.update(tilt.phi, ctx.dt), 0.0};
  const TrajectorySample theta_ref{tilt.theta, theta_rate_.update(tilt.theta, ctx.dt), 0.0};

  const std::array<TrajectorySample, kLoopCount> loop_refs{
      Z, phi_ref, theta_ref, psi, ref[static_cast<int>(Channel::Theta1)], ref[static_cast<int>(Channel::Theta2)]};
  const std::array<double, kLoopCount> y{s.position.z(), s.attitude(0), s.attitude(1),
                                         s.attitude(2), s.joints(0), s.joints(1)};
  const std::array<double, kLoopCount> ydot{s.velocity.z(), s.attitude_rate(0), s.attitude_rate(1),
                                            s.attitude_rate(2), s.joint_rates(0), s.joint_rates(1)};
  std::array<double, kLoopCount> u{};
  for (int i = 0; i < kLoopCount; ++i) {
    u[i] = pid_acceleration(gains_.loops[i], loop_refs[i], y[i], ydot[i], pid_[i], ctx.dt,
                            gains_.integral_limit[i]);
  }
  ControlOutput out = fbl_law(s, u, ctx.interaction, ctx.omega_bar, quad_, model_, ctx.linear_acceleration,
                              ctx.angular_acceleration);
  out.phi_d = tilt.phi;
  out.theta_d = tilt.theta;
  out.tilt_clamped = tilt.clamped;
  return out;
}

}  // namespace ams
