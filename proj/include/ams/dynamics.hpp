#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

#include "ams/keyvalue.hpp"
#include "ams/kinematics.hpp"
#include "ams/rotor_model.hpp"
#include "ams/spatial_math.hpp"

namespace ams {

using Vec2 = Eigen::Vector2d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using StateVector = Eigen::Matrix<double, 16, 1>;

/// Raised when the attitude leaves the region where the model holds
/// (cos(phi) cos(theta) <= 0).
class ModelValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadrotorParams {
  double m = 1.0;          // kg, includes the base link
  double Ix = 13.215e-3;   // kg.m^2
  double Iy = 12.522e-3;
  double Iz = 23.527e-3;
  double Ir = 33.216e-6;   // rotor inertia
  double arm = 223.5e-3;   // m, rotor axis to centre of mass
  double g = 9.81;

  Vec3 inertia() const { return {Ix, Iy, Iz}; }
  void validate() const;
};

struct Link {
  double mass = 0.0;       // kg
  double length = 0.0;     // m
  double cg_offset = 0.0;  // m, joint axis to centre of gravity along the link
  Mat3 inertia = Mat3::Zero();  // about the CG, link frame
  double friction = 1e-3;  // N.m.s/rad

  /// Vector from the link frame origin (distal end) to the CG, link frame.
  Vec3 cg_from_origin() const { return {-(length - cg_offset), 0.0, 0.0}; }
  /// Slender square beam: m L^2 / 12 on the two transverse axes.
  static Link slender_beam(double mass, double length, double friction = 1e-3);
};

struct LinkParams {
  double m0 = 30e-3;  // base link, lumped into the quadrotor mass
  double L0 = 30e-3;
  double g = 9.81;
  std::array<Link, 2> links{Link::slender_beam(55e-3, 70e-3), Link::slender_beam(112e-3, 85e-3)};

  ManipulatorGeometry geometry() const { return {L0, links[0].length, links[1].length}; }
  double arm_mass() const { return links[0].mass + links[1].mass; }
  void validate() const;
};

/// Link 2 after grasping a point mass `payload` at its tip. Always derived from
/// the given parameters, so releasing means recomputing from the pristine set.
LinkParams apply_payload(const LinkParams& params, double payload);

/// Configuration and velocities. Euler rates double as body rates.
struct SystemState {
  Vec3 position = Vec3::Zero();    // X, Y, Z (m)
  Vec3 velocity = Vec3::Zero();    // m/s, inertial
  Vec3 attitude = Vec3::Zero();    // phi, theta, psi (rad)
  Vec3 attitude_rate = Vec3::Zero();
  Vec2 joints = Vec2::Zero();      // theta1, theta2 (rad)
  Vec2 joint_rates = Vec2::Zero();

  EulerAngles euler() const { return EulerAngles::from(attitude); }
  QuadPose quad_pose() const { return {position, euler()}; }
  JointAngles joint_angles() const { return {joints(0), joints(1)}; }

  /// [X Y Z phi theta psi th1 th2 | rates in the same order]
  StateVector to_vector() const;
  static SystemState from_vector(const StateVector& v);
};

struct InteractionWrench {
  Vec3 force_body = Vec3::Zero();      // F_mq^B (N)
  Vec3 moment_body = Vec3::Zero();     // M_mq^B (N.m), about the quadrotor CM
  Vec3 force_inertial = Vec3::Zero();  // F_mq^I (N)
};

/// Quadrotor base motion fed to the arm recursion, body frame.
struct BaseMotion {
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 angular_acceleration = Vec3::Zero();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 linear_acceleration = Vec3::Zero();  // of the CM, gravity excluded
};

/// Per-link quantities of one recursive Newton-Euler pass (index 0 = link 1).
struct RneWorkspace {
  Vec3 base_omega = Vec3::Zero();  // omega_0^0
  Vec3 base_omega_dot = Vec3::Zero();
  Vec3 base_v = Vec3::Zero();
  Vec3 base_v_dot = Vec3::Zero();
  std::array<Vec3, 2> omega, omega_dot, v, v_dot, v_dot_cg;
  std::array<Vec3, 2> inertial_force, inertial_moment;  // F_i^i, N_i^i
  std::array<Vec3, 2> gravity;                          // g^i
  std::array<Vec3, 2> force, moment;                    // f_{i,i-1}^i, n_{i,i-1}^i
  Vec3 base_force = Vec3::Zero();   // f_{1,0}^0
  Vec3 base_moment = Vec3::Zero();  // n_{1,0}^0
  Vec2 joint_torque = Vec2::Zero(); // T_m1, T_m2 including viscous friction
};

/// RNE pass. With `with_gravity` false the gravity load is dropped, which
/// together with zero velocities isolates the acceleration-linear part.
RneWorkspace rne_pass(const EulerAngles& attitude, const BaseMotion& base, const Vec2& q, const Vec2& qd,
                      const Vec2& qdd, const LinkParams& links, bool with_gravity = true);

/// Scalar joint models M_i thdd_i = T_mi + N_i. The other joint's
/// acceleration is held at its trial value.
struct JointModel {
  Vec2 inertia = Vec2::Zero();  // M_1, M_2
  Vec2 bias = Vec2::Zero();     // N_1, N_2
};

struct RneResult {
  RneWorkspace workspace;
  JointModel joint_model;
};

/// rne_pass at the trial joint accelerations plus the scalar joint models.
RneResult rne_sweep(const SystemState& state, const Vec3& body_linear_accel, const Vec3& body_angular_accel,
                    const Vec2& qdd_trial, const LinkParams& links);

/// Reaction of the arm on the quadrotor from the link-1 base load.
InteractionWrench interaction_wrench(const RneWorkspace& ws, const EulerAngles& attitude, double L0);

/// Six quadrotor accelerations (X, Y, Z, phi, theta, psi) for a given
/// interaction wrench. Throws ModelValidityError outside the valid region.
Vec6 quadrotor_accelerations(const SystemState& state, const BodyWrench& wrench, double omega_bar,
                             const InteractionWrench& interaction, const QuadrotorParams& params);

/// Rotational part only; no validity check (used for free-body studies).
Vec3 quadrotor_rotational_accelerations(const Vec3& rates, const Vec3& torque, double omega_bar,
                                        const QuadrotorParams& params);

struct ControlInput {
  BodyWrench wrench;
  double omega_bar = 0.0;
  Vec2 joint_torque = Vec2::Zero();
};

struct DynamicsEvaluation {
  Vec3 linear_acceleration = Vec3::Zero();   // eta_1 ddot
  Vec3 angular_acceleration = Vec3::Zero();  // eta_2 ddot
  Vec2 joint_acceleration = Vec2::Zero();
  InteractionWrench interaction;
};

/// Solves the coupled quadrotor/arm accelerations simultaneously.
DynamicsEvaluation evaluate_dynamics(const SystemState& state, const ControlInput& u, const QuadrotorParams& quad,
                                     const LinkParams& links);

StateVector state_derivative(const SystemState& state, const ControlInput& u, const QuadrotorParams& quad,
                             const LinkParams& links);

/// Parameter file keys: m, Ix, Iy, Iz, Ir, arm, g, m0, L0, m1, L1, m2, L2, b1, b2.
void load_params(const KeyValueFile& kv, QuadrotorParams& quad, LinkParams& links);

}  // namespace ams
