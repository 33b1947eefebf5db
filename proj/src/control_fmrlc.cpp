#include "ams/control_fmrlc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ams {

ReferenceModel::ReferenceModel(double tau) : tau_(tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("ReferenceModel: time constant must be positive");
}

double ReferenceModel::step(double r, double dt) {
  y_ += -std::expm1(-dt / tau_) * (r - y_);
  return y_;
}

namespace {

constexpr std::array<const char*, kLoopCount> kLoopKeys{"z", "phi", "theta", "psi", "theta1", "theta2"};

}  // namespace

FmrlcGains FmrlcGains::from_key_values(const KeyValueFile& kv) {
  FmrlcGains g;
  for (int i = 0; i < kLoopCount; ++i) {
    const std::string k = std::string(kLoopKeys[i]) + "_";
    FmrlcParams& p = g.loops[i];
    p.ge = kv.number_or(k + "ge", p.ge);
    p.gc = kv.number_or(k + "gc", p.gc);
    p.gu = kv.number_or(k + "gu", p.gu);
    p.gye = kv.number_or(k + "gye", p.gye);
    p.gyc = kv.number_or(k + "gyc", p.gyc);
    p.gp = kv.number_or(k + "gp", p.gp);
    p.tau_c = kv.number_or(k + "tau_c", p.tau_c);
    p.ta = kv.number_or(k + "ta", p.ta);
    if (!(p.ge > 0 && p.gc > 0 && p.gu > 0 && p.gye > 0 && p.gyc > 0 && p.gp >= 0 && p.tau_c > 0 && p.ta > 0)) {
      throw ParseError(0, "non-positive learning gain for loop '" + std::string(kLoopKeys[i]) + "'");
    }
  }
  for (auto [name, s] : {std::pair{"x", &g.x}, std::pair{"y", &g.y}}) {
    const std::string k = name;
    s->ke = kv.number_or(k + "_ke", s->ke);
    s->kc = kv.number_or(k + "_kc", s->kc);
    s->ku = kv.number_or(k + "_ku", s->ku);
  }
  g.cap_factor = kv.number_or("cap_factor", g.cap_factor);
  g.auto_tune = kv.number_or("auto_tune", g.auto_tune ? 1.0 : 0.0) != 0.0;
  g.rate_pole = kv.number_or("rate_pole", g.rate_pole);
  return g;
}

const RuleBase2D& inverse_model_table() {
  static const RuleBase2D table(11, 11, {
      -1,   -1,   -1,   -1,   -1,   -1,   -0.8, -0.6, -0.4, -0.2, 0,
      -1,   -1,   -1,   -1,   -1,   -0.8, -0.6, -0.4, -0.2, 0,    0.2,
      -1,   -1,   -1,   -1,   -0.8, -0.6, -0.4, -0.2, 0,    0.2,  0.4,
      -1,   -1,   -1,   -0.8, -0.6, -0.4, -0.2, 0,    0.2,  0.4,  0.6,
      -1,   -1,   -0.8, -0.6, -0.4, -0.2, 0,    0.2,  0.4,  0.6,  0.8,
      -1,   -0.8, -0.6, -0.4, -0.2, 0,    0.2,  0.4,  0.6,  0.8,  1,
      -0.8, -0.6, -0.4, -0.2, 0,    0.2,  0.4,  0.6,  0.8,  1,    1,
      -0.6, -0.4, -0.2, 0,    0.2,  0.4,  0.6,  0.8,  1,    1,    1,
      -0.4, -0.2, 0,    0.2,  0.4,  0.6,  0.8,  1,    1,    1,    1,
      -0.2, 0,    0.2,  0.4,  0.6,  0.8,  1,    1,    1,    1,    1,
      0,    0.2,  0.4,  0.6,  0.8,  1,    1,    1,    1,    1,    1});
  return table;
}

const FuzzyVariable& fmrlc_input_variable() {
  static const FuzzyVariable v = FuzzyVariable::uniform(11, -1, 1);
  return v;
}

int knowledge_base_update(RuleBase2D& rules, const std::vector<Activation>& e, const std::vector<Activation>& c,
                          double p) {
  if (p == 0.0) return 0;
  int changed = 0;
  for (const auto& a : e) {
    for (const auto& b : c) {
      if (std::min(a.degree, b.degree) <= 0.0) continue;
      double& center = rules.at(a.index, b.index);
      center = std::clamp(center + p, -1.0, 1.0);
      ++changed;
    }
  }
  return changed;
}

AutoTuner::AutoTuner(double ta, double ge_cap, double gc_cap) : ta_(ta), ge_cap_(ge_cap), gc_cap_(gc_cap) {}

bool AutoTuner::step(double e, double c, double dt, double& ge, double& gc) {
  max_e_ = std::max(max_e_, std::abs(e));
  max_c_ = std::max(max_c_, std::abs(c));
  elapsed_ += dt;
  // Half-tick slack keeps the cadence exact under floating-point accumulation.
  if (elapsed_ + 0.5 * dt < ta_) return false;
  ge = max_e_ > 1.0 / ge_cap_ ? 1.0 / max_e_ : ge_cap_;
  gc = max_c_ > 1.0 / gc_cap_ ? 1.0 / max_c_ : gc_cap_;
  elapsed_ = 0.0;
  max_e_ = 0.0;
  max_c_ = 0.0;
  return true;
}

FmrlcLoop::FmrlcLoop(FmrlcParams params, double cap_factor, bool auto_tune, double rate_pole)
    : params_(params),
      model_(params.tau_c),
      rules_(11, 11, 0.0),
      tuner_(params.ta, cap_factor * params.ge, cap_factor * params.gc),
      e_rate_(rate_pole),
      ye_rate_(rate_pole),
      ge_(params.ge),
      gc_(params.gc),
      auto_tune_(auto_tune) {}

double FmrlcLoop::inverse_model(double ye, double yc) const {
  const auto& v = fmrlc_input_variable();
  const auto sets = infer(inverse_model_table(), fuzzify(v, params_.gye * ye), fuzzify(v, params_.gyc * yc));
  return params_.gp * defuzzify_cog(sets, kFmrlcOutputWidth).value;
}

double FmrlcLoop::step(double r, double y, double dt) {
  if (!primed_) {
    model_.reset(y);
    primed_ = true;
  }
  const double ym = model_.step(r, dt);
  const double ye = ym - y;
  const double yc = ye_rate_.update(ye, dt);
  p_ = learning_ ? inverse_model(ye, yc) : 0.0;
  knowledge_base_update(rules_, prev_e_, prev_c_, p_);

  const double e = r - y;
  const double c = e_rate_.update(e, dt);
  const auto& v = fmrlc_input_variable();
  prev_e_ = fuzzify(v, ge_ * e);
  prev_c_ = fuzzify(v, gc_ * c);
  const double u = params_.gu * defuzzify_cog(infer(rules_, prev_e_, prev_c_), kFmrlcOutputWidth).value;

  if (auto_tune_) tuner_.step(e, c, dt, ge_, gc_);
  return u;
}

FmrlcController::FmrlcController(FmrlcGains gains) : gains_(gains), outer_(gains.x, gains.y, gains.rate_pole) {
  for (const auto& p : gains_.loops) loops_.emplace_back(p, gains_.cap_factor, gains_.auto_tune, gains_.rate_pole);
}

ControlOutput FmrlcController::step(const ControlContext& ctx) {
  const SystemState& s = ctx.state;
  const auto [theta_d, phi_d] = outer_.step(outer_.measure(s, ctx.refs, ctx.dt));
  const std::array<double, kLoopCount> refs{ctx.refs[static_cast<int>(Channel::Z)].q,      phi_d, theta_d,
                                            ctx.refs[static_cast<int>(Channel::Psi)].q,
                                            ctx.refs[static_cast<int>(Channel::Theta1)].q,
                                            ctx.refs[static_cast<int>(Channel::Theta2)].q};
  const std::array<double, kLoopCount> y{s.position.z(), s.attitude(0), s.attitude(1),
                                         s.attitude(2), s.joints(0), s.joints(1)};
  std::array<double, kLoopCount> u{};
  for (int i = 0; i < kLoopCount; ++i) u[i] = loops_[i].step(refs[i], y[i], ctx.dt);

  ControlOutput out;
  out.wrench = BodyWrench{u[0], u[1], u[2], u[3]};
  out.joint_torque = Vec2(u[4], u[5]);
  out.phi_d = phi_d;
  out.theta_d = theta_d;
  return out;
}

}  // namespace ams
