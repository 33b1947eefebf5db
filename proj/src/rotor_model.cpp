#include "ams/rotor_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ams {

RotorCalibration RotorCalibration::thesis_per_rotor() {
  RotorCalibration cal;
  cal.a << 420.5, 466.0, 411.4, 445.0;
  cal.b << -4.06e5, -4.43e5, -3.92e5, -4.13e5;
  cal.c = Vec4(0.6566, 0.6029, 0.6805, 0.6119) * kGramForce;
  cal.d = Vec4(-731.4, -674.4, -758.3, -660.5) * kGramForce;
  cal.e << 0.0001658, 0.0001348, 0.000172, 0.000141;
  cal.h << -0.1462, -0.1178, -0.1577, -0.126;
  cal.k_f << 1.667e-5, 1.285e-5, 1.711e-5, 1.556e-5;
  cal.k_m << 3.965e-7, 2.847e-7, 4.404e-7, 3.170e-7;
  return cal;
}

RotorCalibration RotorCalibration::thesis_symmetric() {
  RotorCalibration cal = thesis_per_rotor();
  cal.k_f.setConstant(1.667e-5);
  cal.k_m.setConstant(3.965e-7);
  return cal;
}

namespace {

double force_scale(const std::string& unit, bool per_us, std::size_t line) {
  const std::string suffix = per_us ? "/us" : "";
  if (unit.empty() || unit == "gf" + suffix) return kGramForce;
  if (unit == "N" + suffix) return 1.0;
  throw ParseError(line, "unsupported force unit '" + unit + "'");
}

}  // namespace

RotorCalibration RotorCalibration::from_key_values(const KeyValueFile& kv) {
  RotorCalibration cal;
  for (int j = 0; j < 4; ++j) {
    const std::string n = std::to_string(j + 1);
    cal.a(j) = kv.number("a" + n);
    cal.b(j) = kv.number("b" + n);
    const auto& ce = kv.entry("c" + n);
    cal.c(j) = kv.number("c" + n) * force_scale(ce.unit, true, ce.line);
    const auto& de = kv.entry("d" + n);
    cal.d(j) = kv.number("d" + n) * force_scale(de.unit, false, de.line);
    cal.e(j) = kv.number("e" + n);
    cal.h(j) = kv.number("h" + n);
    cal.k_f(j) = kv.number("kf" + n);
    cal.k_m(j) = kv.number("km" + n);
  }
  cal.validate();
  return cal;
}

std::string RotorCalibration::to_key_values() const {
  std::ostringstream os;
  os << "# rotor calibration; thrust fit stored in newtons (1 gf = " << format_number(kGramForce) << " N)\n";
  auto row = [&](const char* key, const Vec4& v, const char* unit) {
    for (int j = 0; j < 4; ++j) os << key << j + 1 << " = " << format_number(v(j)) << ' ' << unit << '\n';
  };
  row("a", a, "rad2/s2/us");
  row("b", b, "rad2/s2");
  row("c", c, "N/us");
  row("d", d, "N");
  row("e", e, "N.m/us");
  row("h", h, "N.m");
  row("kf", k_f, "N.s2/rad2");
  row("km", k_m, "N.m.s2/rad2");
  return os.str();
}

void RotorCalibration::validate() const {
  if ((a.array() <= 0).any() || (c.array() <= 0).any() || (e.array() <= 0).any() ||
      (k_f.array() <= 0).any() || (k_m.array() <= 0).any()) {
    throw std::invalid_argument("RotorCalibration: a, c, e, K_F, K_M must be positive");
  }
}

namespace {

void check_pwm(const PwmCommand& pwm) {
  if ((pwm.u.array() < kPwmMin).any() || (pwm.u.array() > kPwmMax).any()) {
    throw std::invalid_argument("PWM command outside [1000, 2000] us");
  }
}

}  // namespace

SpeedResult speed_from_pwm(const RotorCalibration& cal, const PwmCommand& pwm) {
  check_pwm(pwm);
  SpeedResult out;
  for (int j = 0; j < 4; ++j) {
    const double sq = cal.a(j) * pwm.u(j) + cal.b(j);
    if (sq < 0.0) out.below_spin_up = true;
    out.speeds.omega(j) = sq > 0.0 ? std::sqrt(sq) : 0.0;
  }
  return out;
}

Vec4 thrust_from_speed(const RotorCalibration& cal, const RotorSpeeds& s) {
  return cal.k_f.cwiseProduct(s.omega.cwiseAbs2());
}

Vec4 moment_from_speed(const RotorCalibration& cal, const RotorSpeeds& s) {
  return cal.k_m.cwiseProduct(s.omega.cwiseAbs2());
}

double drag_moment_from_power(double power, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("drag_moment_from_power: angular speed must be positive");
  return power / omega;
}

Mat4 speed_allocation_matrix(const RotorCalibration& cal, double arm) {
  const Vec4& kf = cal.k_f;
  const Vec4& km = cal.k_m;
  Mat4 m;
  m << kf(0), kf(1), kf(2), kf(3),
      0.0, -arm * kf(1), 0.0, arm * kf(3),
      -arm * kf(0), 0.0, arm * kf(2), 0.0,
      -km(0), km(1), -km(2), km(3);
  return m;
}

BodyWrench wrench_from_speeds(const RotorCalibration& cal, const Vec4& omega_sq, double arm) {
  return BodyWrench::from(speed_allocation_matrix(cal, arm) * omega_sq);
}

Mat4 pwm_gain_matrix(const RotorCalibration& cal, double arm) {
  const Vec4& c = cal.c;
  const Vec4& e = cal.e;
  Mat4 g;
  g << c(0), c(1), c(2), c(3),
      0.0, -arm * c(1), 0.0, arm * c(3),
      -arm * c(0), 0.0, arm * c(2), 0.0,
      -e(0), e(1), -e(2), e(3);
  return g;
}

Vec4 pwm_offset_vector(const RotorCalibration& cal, double arm) {
  const Vec4& d = cal.d;
  const Vec4& h = cal.h;
  return {d.sum(), arm * (d(3) - d(1)), arm * (d(2) - d(0)), -h(0) + h(1) - h(2) + h(3)};
}

BodyWrench wrench_from_pwm(const RotorCalibration& cal, const PwmCommand& pwm, double arm) {
  check_pwm(pwm);
  return BodyWrench::from(pwm_gain_matrix(cal, arm) * pwm.u + pwm_offset_vector(cal, arm));
}

namespace {

Vec4 solve_checked(const Mat4& m, const Vec4& rhs, const char* what) {
  Eigen::FullPivLU<Mat4> lu(m);
  if (!lu.isInvertible()) throw std::domain_error(std::string(what) + ": singular matrix");
  return lu.solve(rhs);
}

}  // namespace

PwmResult pwm_from_wrench(const RotorCalibration& cal, const BodyWrench& w, double arm) {
  const Vec4 raw = solve_checked(pwm_gain_matrix(cal, arm), w.vec() - pwm_offset_vector(cal, arm),
                                 "pwm_from_wrench");
  PwmResult out;
  out.pwm.u = raw.cwiseMax(kPwmMin).cwiseMin(kPwmMax);
  out.saturated = (out.pwm.u.array() != raw.array()).any();
  return out;
}

MixerResult mixer_speeds_from_wrench(const RotorCalibration& cal, const BodyWrench& w, double arm) {
  const Vec4 raw = solve_checked(speed_allocation_matrix(cal, arm), w.vec(), "mixer_speeds_from_wrench");
  MixerResult out;
  out.omega_sq = raw.cwiseMax(0.0);
  out.saturated = (raw.array() < 0.0).any();
  return out;
}

double omega_bar(const RotorSpeeds& s) {
  return s.omega(0) - s.omega(1) + s.omega(2) - s.omega(3);
}

}  // namespace ams
