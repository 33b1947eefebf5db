#include "ams/control_dflc.hpp"

#include <cmath>

namespace ams {

namespace {

constexpr std::array<const char*, kDflcLoopCount> kKeys{"x", "y", "z", "phi", "theta", "psi", "theta1", "theta2"};

}  // namespace

DflcGains DflcGains::from_key_values(const KeyValueFile& kv) {
  DflcGains g;
  for (int i = 0; i < kDflcLoopCount; ++i) {
    const std::string k = kKeys[i];
    auto& l = g.loops[i];
    l.ke = kv.number_or(k + "_ke", l.ke);
    l.kc = kv.number_or(k + "_kc", l.kc);
    l.ku = kv.number_or(k + "_ku", l.ku);
    if (l.ke < 0 || l.kc < 0 || l.ku < 0) throw ParseError(0, "negative scaling for loop '" + k + "'");
  }
  g.offset = kv.number_or("offset", g.offset);
  g.rate_pole = kv.number_or("rate_pole", g.rate_pole);
  return g;
}

const FuzzySystem& dflc_rule_system() {
  // Rows e = N, Z, P; columns c = N, Z, P.
  static const FuzzySystem sys{FuzzyVariable::uniform(3, -1, 1), FuzzyVariable::uniform(3, -3, 3),
                               RuleBase2D(3, 3, {-1, -1, 0, -1, 0, 1, 0, 1, 1}), 2.0};
  return sys;
}

double dflc_output(const DflcScaling& s, double e, double c) {
  return s.ku * dflc_rule_system().evaluate(s.ke * e, s.kc * c);
}

BodyFrameError body_frame_error(double ex, double ey, double ex_rate, double ey_rate, double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  return {ex * c + ey * s, ex_rate * c + ey_rate * s, ex * s - ey * c, ex_rate * s - ey_rate * c};
}

OuterPositionLoops::OuterPositionLoops(DflcScaling x, DflcScaling y, double rate_pole)
    : x_(x), y_(y), x_rate_(rate_pole), y_rate_(rate_pole) {}

std::pair<double, double> OuterPositionLoops::step(const BodyFrameError& err) const {
  return {dflc_output(x_, err.x, err.x_rate), dflc_output(y_, err.y, err.y_rate)};
}

BodyFrameError OuterPositionLoops::measure(const SystemState& s, const ReferenceSet& refs, double dt) {
  const double ex = refs[static_cast<int>(Channel::X)].q - s.position.x();
  const double ey = refs[static_cast<int>(Channel::Y)].q - s.position.y();
  return body_frame_error(ex, ey, x_rate_.update(ex, dt), y_rate_.update(ey, dt), s.attitude(2));
}

DflcController::DflcController(DflcGains gains)
    : gains_(gains), outer_(gains[DflcLoop::X], gains[DflcLoop::Y], gains.rate_pole) {
  rates_.fill(RateEstimator(gains.rate_pole));
}

ControlOutput DflcController::step(const ControlContext& ctx) {
  const SystemState& s = ctx.state;
  const auto [theta_d, phi_d] = outer_.step(outer_.measure(s, ctx.refs, ctx.dt));
  const std::array<double, 6> refs{ctx.refs[static_cast<int>(Channel::Z)].q,      phi_d, theta_d,
                                   ctx.refs[static_cast<int>(Channel::Psi)].q,
                                   ctx.refs[static_cast<int>(Channel::Theta1)].q,
                                   ctx.refs[static_cast<int>(Channel::Theta2)].q};
  const std::array<double, 6> y{s.position.z(), s.attitude(0), s.attitude(1), s.attitude(2), s.joints(0),
                                s.joints(1)};
  std::array<double, 6> u{};
  for (int i = 0; i < 6; ++i) {
    const double e = refs[i] - y[i];
    u[i] = dflc_output(gains_.loops[i + 2], e, rates_[i].update(e, ctx.dt));
  }
  ControlOutput out;
  out.wrench = BodyWrench{u[0] + gains_.offset, u[1], u[2], u[3]};
  out.joint_torque = Vec2(u[4], u[5]);
  out.phi_d = phi_d;
  out.theta_d = theta_d;
  return out;
}

}  // namespace ams
