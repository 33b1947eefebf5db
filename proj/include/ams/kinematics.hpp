#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "ams/spatial_math.hpp"

namespace ams {

/// Denavit-Hartenberg row (d, a, alpha, theta).
template <typename Scalar> struct DhRowT {
  Scalar d{0};
  Scalar a{0};
  Scalar alpha{0};
  Scalar theta{0};
};
using DhRow = DhRowT<double>;

struct ManipulatorGeometry {
  double L0 = 30e-3;
  double L1 = 70e-3;
  double L2 = 85e-3;

  /// Throws std::invalid_argument unless all lengths are strictly positive.
  void validate() const;
};

template <typename Scalar> struct JointAnglesT {
  Scalar theta1{0};
  Scalar theta2{0};
};
using JointAngles = JointAnglesT<double>;

/// Quadrotor position eta_1 and attitude eta_2 in the inertial frame.
template <typename Scalar> struct QuadPoseT {
  Vec3T<Scalar> position = Vec3T<Scalar>::Zero();
  EulerAnglesT<Scalar> attitude{};
};
using QuadPose = QuadPoseT<double>;

/// End-effector pose; `orientation` are the roll-pitch-yaw angles whose
/// rotation_from_euler() is the transpose of the end-effector-to-inertial rotation.
struct EndEffectorPose {
  Vec3 position = Vec3::Zero();
  EulerAngles orientation{};
};

/// Standard DH homogeneous transform Rot_z(theta) Trans_z(d) Trans_x(a) Rot_x(alpha).
template <typename Scalar>
Transform4T<Scalar> dh_transform(const DhRowT<Scalar>& row) {
  using std::cos;
  using std::sin;
  const Scalar ct = cos(row.theta), st = sin(row.theta);
  const Scalar ca = cos(row.alpha), sa = sin(row.alpha);
  Mat3T<Scalar> r;
  r << ct, -st * ca, st * sa,
      st, ct * ca, -ct * sa,
      Scalar(0), sa, ca;
  return make_transform<Scalar>(r, Vec3T<Scalar>(row.a * ct, row.a * st, row.d));
}

/// The three DH rows of the arm: base link 0 (fixed to the body), link 1, link 2.
template <typename Scalar>
std::array<DhRowT<Scalar>, 3> dh_table(const ManipulatorGeometry& g, const JointAnglesT<Scalar>& q) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  return {DhRowT<Scalar>{Scalar(-g.L0), Scalar(0), Scalar(-half_pi), Scalar(-half_pi)},
          DhRowT<Scalar>{Scalar(0), Scalar(g.L1), Scalar(half_pi), q.theta1},
          DhRowT<Scalar>{Scalar(0), Scalar(g.L2), Scalar(0), q.theta2}};
}

/// A^B_0, A^0_1, A^1_2 evaluated at the joint angles.
template <typename Scalar>
std::array<Transform4T<Scalar>, 3> dh_chain(const ManipulatorGeometry& g, const JointAnglesT<Scalar>& q) {
  const auto rows = dh_table<Scalar>(g, q);
  return {dh_transform(rows[0]), dh_transform(rows[1]), dh_transform(rows[2])};
}

/// Body-to-inertial transform A^I_B.
template <typename Scalar>
Transform4T<Scalar> body_to_inertial(const QuadPoseT<Scalar>& pose) {
  return make_transform<Scalar>(rotation_from_euler(pose.attitude).transpose(), pose.position);
}

/// T^I_2 = A^I_B A^B_0 A^0_1 A^1_2.
template <typename Scalar>
Transform4T<Scalar> end_effector_transform(const QuadPoseT<Scalar>& pose, const JointAnglesT<Scalar>& q,
                                           const ManipulatorGeometry& g) {
  const auto chain = dh_chain(g, q);
  return body_to_inertial(pose) * chain[0] * chain[1] * chain[2];
}

/// Full forward kinematics. Orientation extraction throws GimbalLockError at
/// end-effector pitch +-pi/2.
EndEffectorPose forward_kinematics(const QuadPose& pose, const JointAngles& q, const ManipulatorGeometry& g);

enum class IkCase { Case1BranchA, Case1BranchB, Case2, Case3 };

std::string_view to_string(IkCase c);

struct IkSolution {
  double X = 0, Y = 0, Z = 0;
  double psi = 0, theta1 = 0, theta2 = 0;
  IkCase case_id = IkCase::Case1BranchA;
  bool free_psi = false;

  QuadPose quad_pose() const { return {Vec3(X, Y, Z), EulerAngles{0.0, 0.0, psi}}; }
  JointAngles joints() const { return {theta1, theta2}; }
};

struct IkOptions {
  /// Yaw used in the degenerate cases where only theta2 +- psi is determined.
  std::optional<double> preferred_psi;
  double degenerate_tol = 1e-9;
  double orthonormal_tol = 1e-9;
};

/// Inverse kinematics with the quadrotor level (phi = theta = 0).
/// `r` is the end-effector-to-inertial rotation, `p` the end-effector position.
/// Throws std::invalid_argument if `r` is not a proper rotation.
std::vector<IkSolution> inverse_kinematics(const Mat3& r, const Vec3& p, const ManipulatorGeometry& g,
                                           const IkOptions& opts = {});
std::vector<IkSolution> inverse_kinematics(const EndEffectorPose& pose, const ManipulatorGeometry& g,
                                           const IkOptions& opts = {});

/// Quadrant-correct arc tangent in (-pi, pi]; throws std::domain_error when both arguments are zero.
double atan2_checked(double yy, double xx);

}  // namespace ams
