#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "ams/keyvalue.hpp"

namespace ams {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPwmMin = 1000.0;  // us
inline constexpr double kPwmMax = 2000.0;  // us
inline constexpr double kGramForce = 9.81e-3;  // N per gram-force

/// Identified rotor assembly coefficients, SI throughout.
///
/// The thrust fit (c, d) is measured in gram-force on the rig; it is
/// converted to newtons once, when the calibration is built or loaded.
struct RotorCalibration {
  Vec4 a = Vec4::Zero();    // rad^2/s^2/us      Omega^2 = a u + b
  Vec4 b = Vec4::Zero();    // rad^2/s^2
  Vec4 c = Vec4::Zero();    // N/us              F = c u + d
  Vec4 d = Vec4::Zero();    // N
  Vec4 e = Vec4::Zero();    // N.m/us            M = e u + h
  Vec4 h = Vec4::Zero();    // N.m
  Vec4 k_f = Vec4::Zero();  // N/(rad/s)^2
  Vec4 k_m = Vec4::Zero();  // N.m/(rad/s)^2

  /// Measured per-rotor tables, with K_F/K_M from the rotor assembly table.
  static RotorCalibration thesis_per_rotor();
  /// Same fits, but the single (K_F, K_M) pair of the system table on all rotors.
  static RotorCalibration thesis_symmetric();

  /// Keys: a1..a4, b1..b4, c1..c4, d1..d4, e1..e4, h1..h4, kf1..kf4, km1..km4.
  /// c/d accept units "gf/us", "gf" (converted) or "N/us", "N".
  static RotorCalibration from_key_values(const KeyValueFile& kv);
  std::string to_key_values() const;

  void validate() const;
};

struct RotorSpeeds {
  Vec4 omega = Vec4::Zero();  // rad/s
};

struct BodyWrench {
  double thrust = 0.0;  // N
  double tau1 = 0.0;    // N.m, roll
  double tau2 = 0.0;    // N.m, pitch
  double tau3 = 0.0;    // N.m, yaw

  Vec4 vec() const { return {thrust, tau1, tau2, tau3}; }
  static BodyWrench from(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
};

struct PwmCommand {
  Vec4 u = Vec4::Constant(kPwmMin);  // us
};

struct SpeedResult {
  RotorSpeeds speeds;
  bool below_spin_up = false;  // some a_j u_j + b_j < 0, clamped to zero
};

struct PwmResult {
  PwmCommand pwm;
  bool saturated = false;
};

struct MixerResult {
  Vec4 omega_sq = Vec4::Zero();  // (rad/s)^2
  bool saturated = false;        // negative squares clamped to zero
  RotorSpeeds speeds() const { return {omega_sq.cwiseSqrt()}; }
};

SpeedResult speed_from_pwm(const RotorCalibration& cal, const PwmCommand& pwm);

Vec4 thrust_from_speed(const RotorCalibration& cal, const RotorSpeeds& s);
Vec4 moment_from_speed(const RotorCalibration& cal, const RotorSpeeds& s);

/// Drag moment from consumed power, M = P / Omega. Throws for Omega <= 0.
double drag_moment_from_power(double power, double omega);

/// 4x4 map from Omega^2 to (T, tau1, tau2, tau3).
Mat4 speed_allocation_matrix(const RotorCalibration& cal, double arm);
/// Wrench generated by squared rotor speeds.
BodyWrench wrench_from_speeds(const RotorCalibration& cal, const Vec4& omega_sq, double arm);

/// G and A of U = G u + A for the linear PWM fits.
Mat4 pwm_gain_matrix(const RotorCalibration& cal, double arm);
Vec4 pwm_offset_vector(const RotorCalibration& cal, double arm);

BodyWrench wrench_from_pwm(const RotorCalibration& cal, const PwmCommand& pwm, double arm);
/// Throws std::domain_error for singular G; clamps to [1000, 2000] us.
PwmResult pwm_from_wrench(const RotorCalibration& cal, const BodyWrench& w, double arm);

/// Throws std::domain_error for a singular allocation matrix.
MixerResult mixer_speeds_from_wrench(const RotorCalibration& cal, const BodyWrench& w, double arm);

/// Signed rotor speed sum Omega1 - Omega2 + Omega3 - Omega4.
double omega_bar(const RotorSpeeds& s);

}  // namespace ams
