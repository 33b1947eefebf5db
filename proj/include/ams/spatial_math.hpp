#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace ams {

template <typename Scalar> using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3T = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Transform4T = Eigen::Transform<Scalar, 3, Eigen::Isometry>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Transform4 = Transform4T<double>;

/// Roll-pitch-yaw angles in radians, stored unwrapped.
template <typename Scalar> struct EulerAnglesT {
  Scalar phi{0};
  Scalar theta{0};
  Scalar psi{0};

  Vec3T<Scalar> vec() const { return {phi, theta, psi}; }
  static EulerAnglesT from(const Vec3T<Scalar>& v) { return {v.x(), v.y(), v.z()}; }
};
using EulerAngles = EulerAnglesT<double>;

/// Thrown by operations whose result is undefined at a pitch of +-pi/2.
class GimbalLockError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inertial-to-body rotation R_I^B for roll-pitch-yaw angles.
template <typename Scalar>
Mat3T<Scalar> rotation_from_euler(const EulerAnglesT<Scalar>& a) {
  using std::cos;
  using std::sin;
  const Scalar cf = cos(a.phi), sf = sin(a.phi);
  const Scalar ct = cos(a.theta), st = sin(a.theta);
  const Scalar cp = cos(a.psi), sp = sin(a.psi);
  Mat3T<Scalar> r;
  r << cp * ct, sp * ct, -st,
      -sp * cf + sf * st * cp, cp * cf + sp * st * sf, ct * sf,
      sp * sf + cp * st * cf, -cp * sf + sp * st * cf, ct * cf;
  return r;
}

/// Maps Euler-angle rates to body rates, nu_2 = J_v * eta_2_dot.
/// det(J_v) = cos(theta); the caller checks that before inverting.
template <typename Scalar>
Mat3T<Scalar> euler_rate_jacobian(const EulerAnglesT<Scalar>& a) {
  using std::cos;
  using std::sin;
  const Scalar cf = cos(a.phi), sf = sin(a.phi);
  const Scalar ct = cos(a.theta), st = sin(a.theta);
  Mat3T<Scalar> j;
  j << Scalar(1), Scalar(0), -st,
      Scalar(0), cf, ct * sf,
      Scalar(0), -sf, ct * cf;
  return j;
}

/// Inverse of rotation_from_euler on the generic branch |theta| < pi/2.
/// Throws GimbalLockError when |R(0,2)| is within `tol` of one.
template <typename Scalar>
EulerAnglesT<Scalar> euler_from_rotation(const Mat3T<Scalar>& r, Scalar tol = Scalar(1e-12)) {
  using std::abs;
  using std::asin;
  using std::atan2;
  const Scalar s = -r(0, 2);
  if (abs(abs(s) - Scalar(1)) <= tol || abs(s) > Scalar(1)) {
    throw GimbalLockError("euler_from_rotation: pitch at +-pi/2");
  }
  EulerAnglesT<Scalar> a;
  a.theta = asin(s);
  a.phi = atan2(r(1, 2), r(2, 2));
  a.psi = atan2(r(0, 1), r(0, 0));
  return a;
}

/// skew(v) * w == v.cross(w)
/// Same extraction, but at gimbal lock fixes phi = 0 and folds the remaining
/// rotation into psi instead of throwing.
template <typename Scalar>
EulerAnglesT<Scalar> euler_from_rotation_any(const Mat3T<Scalar>& r, Scalar tol = Scalar(1e-12)) {
  using std::abs;
  using std::atan2;
  const Scalar s = -r(0, 2);
  if (abs(abs(s) - Scalar(1)) > tol && abs(s) <= Scalar(1)) return euler_from_rotation(r, tol);
  constexpr double half_pi = std::numbers::pi / 2.0;
  return {Scalar(0), s > Scalar(0) ? Scalar(half_pi) : Scalar(-half_pi), atan2(-r(1, 0), r(1, 1))};
}

template <typename Derived>
Mat3T<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Mat3T<Scalar> s;
  s << Scalar(0), -v(2), v(1),
      v(2), Scalar(0), -v(0),
      -v(1), v(0), Scalar(0);
  return s;
}

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w <= 0.0) w += two_pi;
  return w - std::numbers::pi;
}

inline double angle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

template <typename Scalar>
Transform4T<Scalar> make_transform(const Mat3T<Scalar>& rotation, const Vec3T<Scalar>& translation) {
  Transform4T<Scalar> t = Transform4T<Scalar>::Identity();
  t.linear() = rotation;
  t.translation() = translation;
  return t;
}

}  // namespace ams
