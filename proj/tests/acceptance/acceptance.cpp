// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]... [--expect-fail ID]...
//
// ID is a criterion number or a criterion-10 part (10.fbl, 10.dflc, 10.fmrlc).
// Exit status is 0 when every selected check passes or fails only where
// listed with --expect-fail. Expected failures still print FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "ams/control_fmrlc.hpp"
#include "ams/identification.hpp"
#include "ams/kinematics.hpp"
#include "ams/sim_engine.hpp"
#include "oracles.hpp"

using namespace ams;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. FK(IK(pose)) over generic poses, plus both degenerate cases.
Outcome kinematics_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const ManipulatorGeometry g;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> ang(-pi + 1e-3, pi), pos(-60, 60);
  double worst = 0.0;
  int generic = 0;
  while (generic < 1000) {
    const double psi = ang(rng), t1 = ang(rng), t2 = ang(rng);
    if (std::abs(std::sin(t1)) < 1e-3) continue;
    const Vec3 p(pos(rng), pos(rng), pos(rng));
    const auto t = end_effector_transform(QuadPose{p, EulerAngles{0, 0, psi}}, JointAngles{t1, t2}, g);
    double best = 1e9;
    for (const auto& s : inverse_kinematics(Mat3(t.linear()), Vec3(t.translation()), g)) {
      const double e = std::max({(Vec3(s.X, s.Y, s.Z) - p).cwiseAbs().maxCoeff(), angle_distance(s.psi, psi),
                                 angle_distance(s.theta1, t1), angle_distance(s.theta2, t2)});
      best = std::min(best, e);
    }
    worst = std::max(worst, best);
    ++generic;
  }
  // theta1 = 0 and theta1 = pi, yaw fixed by the preferred value.
  double degenerate = 0.0;
  for (double t1 : {0.0, pi}) {
    const Vec3 p(3, -2, 7);
    const double psi = 0.4, t2 = -0.8;
    const auto t = end_effector_transform(QuadPose{p, EulerAngles{0, 0, psi}}, JointAngles{t1, t2}, g);
    IkOptions opts;
    opts.preferred_psi = psi;
    const auto sols = inverse_kinematics(Mat3(t.linear()), Vec3(t.translation()), g, opts);
    const IkCase want = t1 == 0.0 ? IkCase::Case2 : IkCase::Case3;
    if (sols.size() != 1 || sols[0].case_id != want) return {false, "degenerate case not detected"};
    const auto& s = sols[0];
    degenerate = std::max({degenerate, (Vec3(s.X, s.Y, s.Z) - p).cwiseAbs().maxCoeff(), angle_distance(s.psi, psi),
                           angle_distance(s.theta1, t1), angle_distance(s.theta2, t2)});
  }
  const double wall = seconds_since(t0);
  return {worst <= 1e-9 && degenerate <= 1e-9 && wall < 1.0,
          "generic max err " + sci(worst) + ", cases 2/3 max err " + sci(degenerate) + ", " + sci(wall) + " s"};
}

// 2. Rotation orthonormality and det J = cos(theta).
Outcome rotation_jacobian() {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> ang(-pi, pi), pitch(-pi / 2 + 1e-3, pi / 2 - 1e-3);
  double orth = 0.0, det = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const EulerAngles a{ang(rng), pitch(rng), ang(rng)};
    const Mat3 r = rotation_from_euler(a);
    orth = std::max(orth, (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff());
    det = std::max(det, std::abs(euler_rate_jacobian(a).determinant() - std::cos(a.theta)));
  }
  return {orth <= 1e-12 && det <= 1e-12, "orthonormality " + sci(orth) + ", det J " + sci(det)};
}

// 3. Mixer round trips with the measured calibration and the yaw sign pattern.
Outcome mixer() {
  const double arm = QuadrotorParams{}.arm;
  const RotorCalibration cal = RotorCalibration::thesis_per_rotor();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> thrust(6, 14), tau(-0.3, 0.3), yaw(-0.05, 0.05);
  double speeds = 0.0, pwm = 0.0;
  int used = 0;
  for (int i = 0; i < 1000; ++i) {
    const BodyWrench w{thrust(rng), tau(rng), tau(rng), yaw(rng)};
    const MixerResult m = mixer_speeds_from_wrench(cal, w, arm);
    const PwmResult u = pwm_from_wrench(cal, w, arm);
    if (m.saturated || u.saturated) continue;
    ++used;
    speeds = std::max(speeds, (wrench_from_speeds(cal, m.omega_sq, arm).vec() - w.vec()).norm());
    pwm = std::max(pwm, (wrench_from_pwm(cal, u.pwm, arm).vec() - w.vec()).norm());
  }
  const Vec4 hover = mixer_speeds_from_wrench(cal, {10, 0, 0, 0}, arm).omega_sq;
  const Vec4 spun = mixer_speeds_from_wrench(cal, {10, 0, 0, 0.02}, arm).omega_sq;
  const Vec4 d = spun - hover;
  const bool pattern = d(0) < 0 && d(1) > 0 && d(2) < 0 && d(3) > 0;
  return {speeds <= 1e-9 && pwm <= 1e-9 && pattern && used > 500,
          "speeds " + sci(speeds) + ", pwm " + sci(pwm) + " over " + std::to_string(used) +
              " wrenches, yaw pattern " + (pattern ? "-+-+" : "wrong")};
}

// 4. Torque-free rigid body under RK4.
Outcome conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const QuadrotorParams p;
  const Vec3 inertia = p.inertia();
  Vec3 w(1.0, 0.5, 0.2);
  auto energy = [&](const Vec3& x) { return 0.5 * x.dot(inertia.cwiseProduct(x)); };
  auto momentum = [&](const Vec3& x) { return inertia.cwiseProduct(x).norm(); };
  const double e0 = energy(w), h0 = momentum(w);
  auto f = [&](const Vec3& x) { return quadrotor_rotational_accelerations(x, Vec3::Zero(), 0.0, p); };
  for (int i = 0; i < 10000; ++i) w = rk4_step(f, w, 1e-3);
  const double de = std::abs(energy(w) - e0) / e0, dh = std::abs(momentum(w) - h0) / h0;
  const double wall = seconds_since(t0);
  return {de <= 1e-6 && dh <= 1e-6 && wall < 5.0,
          "energy drift " + sci(de) + ", momentum drift " + sci(dh) + ", " + sci(wall) + " s"};
}

// 5. Recursion against the Lagrangian of the frozen-base arm.
Outcome rne_oracle() {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ang(-pi, pi), rate(-3, 3), acc(-20, 20), tilt(-0.5, 0.5);
  const LinkParams links;
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const EulerAngles att{tilt(rng), tilt(rng), ang(rng)};
    const Vec2 q(ang(rng), ang(rng)), qd(rate(rng), rate(rng)), qdd(acc(rng), acc(rng));
    const auto ws = rne_pass(att, BaseMotion{}, q, qd, qdd, links);
    const Vec2 ref = oracle::lagrange_torque(q, qd, qdd, links, oracle::gravity_in_link0(att, q, links));
    worst = std::max(worst, (ws.joint_torque - ref).norm() / std::max(1e-3, ref.norm()));
  }
  const auto st = rne_pass(EulerAngles{}, BaseMotion{}, Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), links);
  const Link &l1 = links.links[0], &l2 = links.links[1];
  const double expect = l1.length / 2 * l1.mass * links.g + (l1.length + l2.length / 2) * l2.mass * links.g;
  const double st_err = std::abs(std::abs(st.joint_torque(0)) - expect);
  return {worst <= 1e-6 && st_err <= 1e-9,
          "max relative error " + sci(worst) + ", static joint-1 torque error " + sci(st_err)};
}

bool same_links(const LinkParams& a, const LinkParams& b) {
  for (int i = 0; i < 2; ++i) {
    const Link &x = a.links[i], &y = b.links[i];
    if (std::memcmp(&x.mass, &y.mass, sizeof(double)) || std::memcmp(&x.length, &y.length, sizeof(double)) ||
        std::memcmp(&x.cg_offset, &y.cg_offset, sizeof(double)) ||
        std::memcmp(&x.friction, &y.friction, sizeof(double)) ||
        std::memcmp(x.inertia.data(), y.inertia.data(), 9 * sizeof(double))) {
      return false;
    }
  }
  return true;
}

// 6. Payload algebra and exact restore.
Outcome payload() {
  const LinkParams links;
  const LinkParams p = apply_payload(links, 0.15);
  const Link& l2 = links.links[1];
  const double cg = (l2.mass * l2.cg_offset + 0.15 * l2.length) / (l2.mass + 0.15);
  const bool mass_ok = p.links[1].mass == 0.262;
  const double cg_err = std::abs(p.links[1].cg_offset - cg);
  PayloadState plant(links);
  plant.pick(0.15);
  const bool picked = same_links(plant.links(), p);
  plant.place();
  const bool restored = same_links(plant.links(), links);
  return {mass_ok && cg_err <= 1e-12 && std::abs(cg - 0.06683) < 5e-6 && picked && restored,
          "m2' = " + format_number(p.links[1].mass) + ", d'_CG2 = " + format_number(p.links[1].cg_offset) +
              " (oracle err " + sci(cg_err) + "), restore " + (restored ? "bit-exact" : "DIFFERS")};
}

// 7. Quintic boundary values and the rest-to-rest profile.
Outcome quintic() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> val(-50, 50), start(0, 40), len(0.5, 20);
  double bound = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double q0 = val(rng), qf = val(rng), t0 = start(rng), tf = t0 + len(rng);
    const auto seg = plan_quintic(q0, qf, t0, tf);
    const auto a = sample(seg, t0), b = sample(seg, tf);
    const double scale = std::max(1.0, std::abs(qf - q0));
    bound = std::max({bound, std::abs(a.q - q0) / scale, std::abs(b.q - qf) / scale, std::abs(a.qd), std::abs(b.qd),
                      std::abs(a.qdd), std::abs(b.qdd)});
  }
  const auto unit = plan_quintic(0, 1, 0, 1);
  const auto mid = sample(unit, 0.5);
  const auto seg = plan_quintic(2, 5, 1, 4);
  const double peak = sample(seg, 2.5).qd;
  const double mid_err = std::abs(mid.q - 0.5), peak_err = std::abs(peak - 15.0 / 8.0 * 3.0 / 3.0);
  return {bound <= 1e-12 && mid_err <= 1e-9 && peak_err <= 1e-9,
          "boundary max " + sci(bound) + ", midpoint err " + sci(mid_err) + ", peak speed err " + sci(peak_err)};
}

// 8. Printed fuzzy tables and the analytic COG.
Outcome fuzzy_tables() {
  const double dflc[3][3] = {{-1, -1, 0}, {-1, 0, 1}, {0, 1, 1}};
  bool dflc_ok = true;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) dflc_ok &= dflc_rule_system().rules.at(i, j) == dflc[i][j];
  }
  const RuleBase2D& inv = inverse_model_table();
  auto c = [&](int k, int s) { return inv.at(k + 5, s + 5); };
  bool inv_ok = c(0, 0) == 0.0 && c(2, 1) == 0.6 && c(5, 5) == 1.0 && c(-5, -5) == -1.0 && c(5, -5) == 0.0 &&
                c(-5, 5) == 0.0;
  for (int k = -5; k <= 5; ++k) {
    for (int s = -5; s <= 5; ++s) {
      // Printed rows step by 0.2 along both axes and saturate at +-1.
      const double printed = std::clamp(std::round(2 * (k + s)) / 10.0, -1.0, 1.0);
      inv_ok &= c(k, s) == printed;
    }
  }
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> count(1, 4), cell(-5, 5);
  std::uniform_real_distribution<double> deg(0.01, 1.0);
  double cog = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<ClippedSet> sets;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      const double ctr = cell(rng) / 5.0;
      if (std::none_of(sets.begin(), sets.end(), [&](const ClippedSet& s) { return s.center == ctr; })) {
        sets.push_back({ctr, deg(rng)});
      }
    }
    const double w = i % 2 ? kFmrlcOutputWidth : 2.0;
    cog = std::max(cog, std::abs(defuzzify_cog(sets, w).value - oracle::numeric_cog(sets, w, true)));
  }
  return {dflc_ok && inv_ok && cog <= 1e-9, std::string("DFLC table ") + (dflc_ok ? "match" : "MISMATCH") +
                                                ", inverse table " + (inv_ok ? "match" : "MISMATCH") +
                                                ", COG max err " + sci(cog)};
}

// 9. Learning mechanics.
Outcome fmrlc_mechanics() {
  FmrlcLoop loop(FmrlcGains{}[Loop::Z]);
  const bool zero = loop.step(1.0, 0.0, 2e-3) == 0.0;
  const auto& v = fmrlc_input_variable();
  RuleBase2D rules(11, 11);
  const int changed = knowledge_base_update(rules, fuzzify(v, 0.4), fuzzify(v, -0.6), 0.1);
  int moved = 0;
  bool exact = true;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      if (rules.at(i, j) != 0.0) {
        ++moved;
        exact &= i == 7 && j == 2 && rules.at(i, j) == 0.1;
      }
    }
  }
  ReferenceModel m(0.03);
  for (int i = 0; i < 15; ++i) m.step(1.0, 2e-3);
  const double ref_err = std::abs(m.value() - (1.0 - std::exp(-1.0)));
  return {zero && changed == 1 && moved == 1 && exact && ref_err <= 1e-6,
          std::string("zero base output ") + (zero ? "0" : "nonzero") + ", single-point update moved " +
              std::to_string(moved) + " centre(s), reference model err " + sci(ref_err)};
}

struct RunSummary {
  SimLog log;
  double wall = 0.0;
};

RunSummary run(ControllerKind kind, int regions) {
  ScenarioConfig cfg;
  cfg.controller = kind;
  MissionTiming timing;
  timing.regions = regions;
  cfg.mission = thesis_mission(cfg.links.geometry(), timing);
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary r{run_scenario(cfg), 0.0};
  r.wall = seconds_since(t0);
  return r;
}

bool post_transient(double t) {
  // 5 s settling after each move end (10, 30, 50 s) and payload event (15, 65 s).
  return (t >= 35 && t <= 40) || (t >= 55 && t <= 65) || (t >= 70 && t <= 80);
}

// 10. Scenario reproduction for the three controllers.
Outcome scenarios(std::string& fbl_line, std::string& dflc_line, std::string& fmrlc_line, bool& fbl_ok,
                  bool& dflc_ok, bool& fmrlc_ok) {
  const MissionTiming timing;
  {
    const auto r = run(ControllerKind::Fbl, 3);
    fbl_ok = r.log.diverged && r.log.divergence_time > timing.payload.pick && r.wall < 60;
    double arm_err = 0.0, body_err = 0.0;
    for (const auto& row : r.log.rows) {
      if (row.t < timing.payload.pick) continue;
      arm_err = std::max({arm_err, std::abs(row.state.joints(0) - row.refs[4]), std::abs(row.state.joints(1) - row.refs[5])});
      body_err = std::max(body_err, (row.state.position - Vec3(row.refs[0], row.refs[1], row.refs[2])).norm());
    }
    fbl_line = r.log.diverged ? "diverged at " + sci(r.log.divergence_time) + " s"
                              : "no divergence record; after pick max arm error " + sci(arm_err) +
                                    " rad, max position error " + sci(body_err) + " m";
    fbl_line += " (" + sci(r.wall) + " s)";
  }
  {
    const auto r = run(ControllerKind::Dflc, 1);
    double tilt = 0.0, pos = 0.0;
    for (const auto& row : r.log.rows) {
      if (row.t < timing.payload.pick) continue;
      tilt = std::max({tilt, std::abs(row.state.attitude(0)), std::abs(row.state.attitude(1))});
      pos = std::max(pos, (row.state.position - Vec3(row.refs[0], row.refs[1], row.refs[2])).norm());
    }
    dflc_ok = !r.log.diverged && tilt < 0.5 && pos < 2.0 && r.wall < 60;
    dflc_line = "region 1, after pick max tilt " + sci(tilt) + " rad, max position error " + sci(pos) + " m (" +
                sci(r.wall) + " s)";
  }
  {
    const auto r = run(ControllerKind::Fmrlc, 3);
    std::array<double, kChannelCount> lo, hi, err{};
    lo.fill(1e300);
    hi.fill(-1e300);
    for (const auto& row : r.log.rows) {
      const double y[kChannelCount] = {row.state.position(0), row.state.position(1), row.state.position(2),
                                       row.state.attitude(2), row.state.joints(0),   row.state.joints(1)};
      for (int c = 0; c < kChannelCount; ++c) {
        lo[c] = std::min(lo[c], row.refs[c]);
        hi[c] = std::max(hi[c], row.refs[c]);
        if (post_transient(row.t)) err[c] = std::max(err[c], std::abs(y[c] - row.refs[c]));
      }
    }
    double worst = 0.0;
    fmrlc_line = "completed " + std::string(r.log.diverged ? "NO" : "yes") + ", post-transient error % of span:";
    for (int c = 0; c < kChannelCount; ++c) {
      const double pct = 100.0 * err[c] / (hi[c] - lo[c]);
      worst = std::max(worst, pct);
      fmrlc_line += " " + std::string(channel_name(static_cast<Channel>(c))) + " " + sci(pct);
    }
    fmrlc_ok = !r.log.diverged && r.log.rows.back().t == 80.0 && worst < 2.0 && r.wall < 60;
    fmrlc_line += " (" + sci(r.wall) + " s)";
  }
  return {fbl_ok && dflc_ok && fmrlc_ok, ""};
}

// 11. Identification fit on synthetic rig data.
Outcome identification() {
  const RotorCalibration cal = RotorCalibration::thesis_per_rotor();
  std::vector<double> pwm;
  for (double u = 1060; u <= 1800; u += 10) pwm.push_back(u);
  const RotorCalibration back = fit_rotors(synthesize_rig_data(cal, pwm)).calibration(cal);
  double worst = 0.0;
  for (const auto& [got, want] : {std::pair{&back.a, &cal.a}, std::pair{&back.b, &cal.b}, std::pair{&back.c, &cal.c},
                                  std::pair{&back.d, &cal.d}, std::pair{&back.e, &cal.e}, std::pair{&back.h, &cal.h}}) {
    worst = std::max(worst, ((*got - *want).array() / want->array()).abs().maxCoeff());
  }
  return {worst <= 1e-9, "max relative error over a..h, 4 rotors: " + sci(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::set<std::string> expect_fail;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only.insert(std::stoi(argv[++i]));
    } else if (a == "--expect-fail" && i + 1 < argc) {
      expect_fail.insert(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N]... [--expect-fail ID]...\n");
      return 2;
    }
  }
  int unexpected = 0;
  auto tally = [&](bool pass, const std::string& id) {
    if (pass) return;
    if (expect_fail.count(id)) {
      std::printf("  (%s is a recorded deviation; see README)\n", id.c_str());
    } else {
      ++unexpected;
    }
  };
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"kinematics round-trip", kinematics_round_trip},
      {"rotation and Euler-rate Jacobian", rotation_jacobian},
      {"mixer round-trips", mixer},
      {"rigid-body conservation", conservation},
      {"RNE vs Lagrangian oracle", rne_oracle},
      {"payload algebra", payload},
      {"quintic trajectory", quintic},
      {"fuzzy tables and COG", fuzzy_tables},
      {"FMRLC mechanics", fmrlc_mechanics},
      {"scenario reproduction", nullptr},
      {"identification fit", identification},
  };
  for (int n = 1; n <= 11; ++n) {
    if (!only.empty() && !only.count(n)) continue;
    const char* name = criteria[n - 1].first;
    Outcome o;
    if (n == 10) {
      std::string fbl, dflc, fmrlc;
      bool a = false, b = false, c = false;
      o = scenarios(fbl, dflc, fmrlc, a, b, c);
      std::printf("criterion 10 [%s]: %s\n", name, o.pass ? "PASS" : "FAIL");
      std::printf("  FBL divergence after pick: %s - %s\n", a ? "PASS" : "FAIL", fbl.c_str());
      std::printf("  DFLC bounded through pick/place: %s - %s\n", b ? "PASS" : "FAIL", dflc.c_str());
      std::printf("  FMRLC full mission within 2%%: %s - %s\n", c ? "PASS" : "FAIL", fmrlc.c_str());
      tally(a, "10.fbl");
      tally(b, "10.dflc");
      tally(c, "10.fmrlc");
    } else {
      o = criteria[n - 1].second();
      std::printf("criterion %d [%s]: %s - %s\n", n, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
      tally(o.pass, std::to_string(n));
    }
  }
  std::fflush(stdout);
  return unexpected == 0 ? 0 : 1;
}
