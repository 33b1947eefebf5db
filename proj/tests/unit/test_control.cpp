#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ams/control_fmrlc.hpp"

using namespace ams;
using std::numbers::pi;

namespace {

Vec3 thrust_axis(double phi, double theta) { return rotation_from_euler(EulerAngles{phi, theta, 0.0}).transpose().col(2); }

std::array<double, kLoopCount> zeros() { return {}; }

ControlContext rest_context(double dt = 2e-3) {
  ControlContext ctx;
  ctx.dt = dt;
  for (auto& r : ctx.refs) r = TrajectorySample{};
  return ctx;
}

}  // namespace

TEST_CASE("pid acceleration sums feedforward, feedback and integral") {
  PidState st;
  const PidGains g{16, 8, 0.01};
  const double u = pid_acceleration(g, {0.1, 0.2, 0.3}, 0.0, 0.0, st, 0.5, 1e9);
  CHECK(u == doctest::Approx(0.3 + 16 * 0.1 + 8 * 0.2 + 0.01 * 0.05));
  CHECK(st.integral == doctest::Approx(0.05));

  PidState w;
  const PidGains gi{0, 0, 10};
  for (int i = 0; i < 1000; ++i) pid_acceleration(gi, {1.0, 0, 0}, 0.0, 0.0, w, 0.1, 2.0);
  CHECK(std::abs(gi.ki * w.integral) <= 2.0 + 1e-12);
}

TEST_CASE("fbl law at level hover") {
  const QuadrotorParams quad;
  const LinkParams links;
  const SystemState s;
  const ControlOutput out = fbl_law(s, zeros(), InteractionWrench{}, 0.0, quad, links, Vec3::Zero(), Vec3::Zero());
  CHECK(out.wrench.thrust == doctest::Approx(9.81).epsilon(1e-12));
  CHECK(out.wrench.tau1 == 0.0);
  CHECK(out.wrench.tau2 == 0.0);
  CHECK(out.wrench.tau3 == 0.0);

  auto u = zeros();
  u[0] = FblGains{}[Loop::Z].kp * 0.1;
  const ControlOutput step = fbl_law(s, u, InteractionWrench{}, 0.0, quad, links, Vec3::Zero(), Vec3::Zero());
  CHECK(step.wrench.thrust == doctest::Approx(11.41).epsilon(1e-12));
}

TEST_CASE("fbl law compensates the arm and rejects invalid attitude") {
  const QuadrotorParams quad;
  const LinkParams links;
  SystemState s;
  InteractionWrench w;
  w.force_inertial = Vec3(0, 0, -1.5);
  w.moment_body = Vec3(0.1, -0.2, 0.05);
  const ControlOutput out = fbl_law(s, zeros(), w, 0.0, quad, links, Vec3::Zero(), Vec3::Zero());
  CHECK(out.wrench.thrust == doctest::Approx(quad.m * quad.g + 1.5));
  CHECK(out.wrench.tau1 == doctest::Approx(-0.1));
  CHECK(out.wrench.tau2 == doctest::Approx(0.2));
  CHECK(out.wrench.tau3 == doctest::Approx(-0.05));

  // Joint torques equal the recursion's computed torque at the commanded accelerations.
  s.joints = Vec2(0.3, -0.4);
  s.joint_rates = Vec2(0.5, 0.2);
  auto u = zeros();
  u[4] = 1.5;
  u[5] = -0.7;
  const ControlOutput arm = fbl_law(s, u, w, 0.0, quad, links, Vec3::Zero(), Vec3::Zero());
  const RneWorkspace rne = rne_pass(s.euler(), BaseMotion{}, s.joints, s.joint_rates, Vec2(1.5, -0.7), links);
  CHECK(arm.joint_torque(0) == doctest::Approx(rne.joint_torque(0)).epsilon(1e-9));
  CHECK(arm.joint_torque(1) == doctest::Approx(rne.joint_torque(1)).epsilon(1e-9));

  s.attitude(0) = pi / 2 + 0.1;
  CHECK_THROWS_AS(fbl_law(s, zeros(), w, 0.0, quad, links, Vec3::Zero(), Vec3::Zero()), ModelValidityError);
}

TEST_CASE("desired attitude") {
  for (double psi : {0.0, 0.7, -2.0}) {
    const TiltCommand t = desired_attitude(Vec3::Zero(), psi, Vec3::Zero(), 1.0, 9.81);
    CHECK(t.phi == doctest::Approx(0.0));
    CHECK(t.theta == doctest::Approx(0.0));
  }
  const TiltCommand fwd = desired_attitude(Vec3(1.0, 0, 0), 0.0, Vec3::Zero(), 1.0, 9.81);
  CHECK(fwd.theta > 0.0);
  CHECK(fwd.phi == doctest::Approx(0.0));
  CHECK_FALSE(fwd.clamped);
  // The thrust direction reproduces the demanded acceleration.
  const Vec3 dir = thrust_axis(fwd.phi, fwd.theta);
  CHECK(dir.x() / dir.z() == doctest::Approx(1.0 / 9.81));

  const TiltCommand side = desired_attitude(Vec3(0, 2.0, 0), 0.0, Vec3::Zero(), 1.0, 9.81);
  const Vec3 sd = thrust_axis(side.phi, side.theta);
  CHECK(sd.y() / sd.z() == doctest::Approx(2.0 / 9.81));

  // An arm pulling sideways is countered by tilting against it.
  const TiltCommand pull = desired_attitude(Vec3::Zero(), 0.0, Vec3(0.5, 0, 0), 1.0, 9.81);
  CHECK(pull.theta < 0.0);

  const TiltCommand extreme = desired_attitude(Vec3(0, 1e3, -9.81), 0.0, Vec3::Zero(), 1.0, 9.81);
  CHECK(std::isfinite(extreme.phi));
  CHECK(std::abs(extreme.phi) == doctest::Approx(pi / 2));
  CHECK_THROWS_AS(desired_attitude(Vec3(0, 0, -9.81), 0.0, Vec3::Zero(), 1.0, 9.81), std::domain_error);
}

TEST_CASE("fbl gains from key values") {
  const auto kv = KeyValueFile::parse_string("z_kp = 20\ntheta2_ki = 0.5\nx_kd = 3\nphi_ilimit = 7\n");
  const FblGains g = FblGains::from_key_values(kv);
  CHECK(g[Loop::Z].kp == 20);
  CHECK(g[Loop::Z].kd == 8);
  CHECK(g[Loop::Theta2].ki == 0.5);
  CHECK(g.x.kd == 3);
  CHECK(g.integral_limit[1] == 7);
  CHECK_THROWS_AS(FblGains::from_key_values(KeyValueFile::parse_string("z_kp = -1\n")), ParseError);
}

TEST_CASE("dflc rule system") {
  const DflcScaling unit{1, 1, 1};
  CHECK(dflc_output(unit, 0, 0) == 0.0);
  CHECK(dflc_output({1, 1, 3.5}, 1.0, 3.0) == doctest::Approx(3.5));
  CHECK(dflc_output({1, 1, 3.5}, 5.0, 30.0) == doctest::Approx(3.5));
  CHECK(dflc_output({1, 1, 3.5}, -1.0, -3.0) == doctest::Approx(-3.5));
  // Zero scaling leaves only the centre rule.
  CHECK(dflc_output({0, 0, 9}, 0.8, 2.0) == 0.0);

  const auto& sys = dflc_rule_system();
  const double expect[3][3] = {{-1, -1, 0}, {-1, 0, 1}, {0, 1, 1}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(sys.rules.at(i, j) == expect[i][j]);
  }
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double e = -1.0 + 0.1 * i, c = -3.0 + 0.3 * j;
      const double u = dflc_output({1, 1, 2}, e, c);
      CHECK(dflc_output({1, 1, 2}, -e, -c) == -u);
      CHECK(std::abs(u) <= 2.0);
    }
  }
}

TEST_CASE("dflc controller at rest outputs the offset") {
  DflcController c;
  const ControlOutput out = c.step(rest_context());
  CHECK(out.wrench.thrust == DflcGains{}.offset);
  CHECK(out.wrench.tau1 == 0.0);
  CHECK(out.wrench.tau2 == 0.0);
  CHECK(out.wrench.tau3 == 0.0);
  CHECK(out.joint_torque.isZero());
}

TEST_CASE("body frame error") {
  const BodyFrameError z = body_frame_error(0, 0, 0, 0, 0.3);
  CHECK(z.x == 0.0);
  CHECK(z.y == 0.0);
  const BodyFrameError a = body_frame_error(1.5, 0.4, 0.2, -0.1, 0.0);
  CHECK(a.x == doctest::Approx(1.5));
  CHECK(a.y == doctest::Approx(-0.4));
  CHECK(a.x_rate == doctest::Approx(0.2));
  CHECK(a.y_rate == doctest::Approx(0.1));
  const BodyFrameError b = body_frame_error(1.5, 0.4, 0.0, 0.0, pi / 2);
  CHECK(b.x == doctest::Approx(0.4));
  CHECK(b.y == doctest::Approx(1.5));
}

TEST_CASE("outer position loops") {
  OuterPositionLoops loops({0.5, 0.5, 0.3}, {0.5, 0.5, 0.3});
  const auto [th0, ph0] = loops.step(BodyFrameError{});
  CHECK(th0 == 0.0);
  CHECK(ph0 == 0.0);
  const auto [th, ph] = loops.step(BodyFrameError{1.0, 0.0, 0.0, 0.0});
  CHECK(th > 0.0);
  CHECK(ph == 0.0);
  const auto [th_big, ph_big] = loops.step(BodyFrameError{100, 100, 100, 100});
  CHECK(std::abs(th_big) <= 0.3 + 1e-15);
  CHECK(std::abs(ph_big) <= 0.3 + 1e-15);
}

TEST_CASE("inverse model table") {
  const RuleBase2D& t = inverse_model_table();
  auto c = [&](int k, int s) { return t.at(k + 5, s + 5); };
  CHECK(c(0, 0) == 0.0);
  CHECK(c(2, 1) == doctest::Approx(0.6));
  CHECK(c(5, 5) == 1.0);
  CHECK(c(-5, -5) == -1.0);
  CHECK(c(5, -5) == 0.0);
  for (int k = -5; k <= 5; ++k) {
    for (int s = -5; s <= 5; ++s) {
      CHECK(c(k, s) == -c(-k, -s));
      CHECK(c(k, s) == doctest::Approx(std::clamp(0.2 * (k + s), -1.0, 1.0)));
    }
  }
}

TEST_CASE("inverse model inference") {
  FmrlcParams p;
  p.gye = p.gyc = p.gp = 1.0;
  const FmrlcLoop loop(p);
  CHECK(loop.inverse_model(0.0, 0.0) == 0.0);
  CHECK(loop.inverse_model(0.4, 0.2) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(loop.inverse_model(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(loop.inverse_model(7.0, 9.0) == doctest::Approx(1.0));
  CHECK(loop.inverse_model(-0.3, 0.05) == -loop.inverse_model(0.3, -0.05));
  p.gp = 0.25;
  CHECK(FmrlcLoop(p).inverse_model(0.4, 0.2) == doctest::Approx(0.15));
}

TEST_CASE("knowledge base update touches the active set only") {
  const auto& v = fmrlc_input_variable();
  RuleBase2D rules(11, 11);
  CHECK(knowledge_base_update(rules, fuzzify(v, 0.4), fuzzify(v, -0.2), 0.0) == 0);
  CHECK(rules == RuleBase2D(11, 11));

  CHECK(knowledge_base_update(rules, fuzzify(v, 0.4), fuzzify(v, -0.2), 0.1) == 1);
  int changed = 0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      if (rules.at(i, j) != 0.0) {
        ++changed;
        CHECK(i == 7);
        CHECK(j == 4);
        CHECK(rules.at(i, j) == doctest::Approx(0.1));
      }
    }
  }
  CHECK(changed == 1);

  RuleBase2D four(11, 11);
  CHECK(knowledge_base_update(four, fuzzify(v, 0.13), fuzzify(v, -0.55), -0.05) == 4);
  int nonzero = 0;
  for (double x : four.data()) nonzero += x != 0.0;
  CHECK(nonzero == 4);

  RuleBase2D sat(11, 11);
  for (int i = 0; i < 50; ++i) knowledge_base_update(sat, fuzzify(v, 0.13), fuzzify(v, -0.55), 0.3);
  for (double x : sat.data()) CHECK(std::abs(x) <= 1.0);
}

TEST_CASE("reference model") {
  ReferenceModel m(0.03);
  const int n = 1000;
  for (int i = 0; i < n; ++i) m.step(1.0, 0.03 / n);
  CHECK(m.value() == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
  CHECK(std::abs(m.value() - (1.0 - std::exp(-1.0))) <= 1e-6);

  ReferenceModel eq(0.1);
  eq.reset(0.7);
  CHECK(eq.step(0.7, 0.01) == 0.7);

  ReferenceModel small(0.5);
  const double dt = 1e-7;
  CHECK(small.step(1.0, dt) == doctest::Approx(dt / 0.5).epsilon(1e-6));
}

TEST_CASE("auto tuner") {
  AutoTuner tuner(0.1, 40.0, 50.0);
  double ge = 1, gc = 1;
  int updates = 0;
  for (int i = 1; i <= 50; ++i) {
    const bool up = tuner.step(i == 3 ? 0.5 : 0.1, i == 7 ? -0.25 : 0.0, 2e-3, ge, gc);
    if (up) {
      ++updates;
      CHECK(i == 50);
    }
  }
  CHECK(updates == 1);
  CHECK(ge == doctest::Approx(2.0));
  CHECK(gc == doctest::Approx(4.0));

  for (int i = 0; i < 50; ++i) tuner.step(0.0, 0.0, 2e-3, ge, gc);
  CHECK(ge == 40.0);
  CHECK(gc == 50.0);
}

TEST_CASE("fmrlc loop") {
  FmrlcParams p;
  p.tau_c = 0.05;
  FmrlcLoop loop(p, 10.0, false);
  CHECK(loop.step(1.0, 0.0, 2e-3) == 0.0);
  for (double x : loop.rules().data()) CHECK(std::abs(x) <= 1.0);

  // Tracking the reference model exactly leaves the rule base untouched.
  FmrlcLoop exact(p, 10.0, false);
  for (int i = 0; i < 100; ++i) exact.step(0.0, 0.0, 2e-3);
  CHECK(exact.rules() == RuleBase2D(11, 11));
  CHECK(exact.last_p() == 0.0);

  // Learning off: output stays at the zero-initialized value.
  FmrlcLoop frozen(p, 10.0, false);
  frozen.set_learning(false);
  for (int i = 0; i < 200; ++i) CHECK(frozen.step(1.0, 0.0, 2e-3) == 0.0);

  // A plant that never moves keeps y_e positive, so learned centres only grow.
  FmrlcLoop grow(p, 10.0, false);
  std::vector<double> prev = grow.rules().data();
  for (int i = 0; i < 300; ++i) {
    grow.step(1.0, 0.0, 2e-3);
    const auto& now = grow.rules().data();
    for (std::size_t k = 0; k < now.size(); ++k) CHECK(now[k] >= prev[k]);
    prev = now;
  }
  CHECK(*std::max_element(prev.begin(), prev.end()) > 0.0);
}

TEST_CASE("fmrlc gains from key values") {
  const auto kv = KeyValueFile::parse_string("z_gu = 20\nphi_tau_c = 0.02\nauto_tune = 0\nx_ku = 4\n");
  const FmrlcGains g = FmrlcGains::from_key_values(kv);
  CHECK(g[Loop::Z].gu == 20);
  CHECK(g[Loop::Phi].tau_c == 0.02);
  CHECK_FALSE(g.auto_tune);
  CHECK(g.x.ku == 4);
  CHECK_THROWS_AS(FmrlcGains::from_key_values(KeyValueFile::parse_string("psi_tau_c = 0\n")), ParseError);
}
