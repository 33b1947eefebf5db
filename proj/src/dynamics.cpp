#include "ams/dynamics.hpp"

#include <cmath>

namespace ams {

void QuadrotorParams::validate() const {
  if (!(m > 0 && Ix > 0 && Iy > 0 && Iz > 0 && Ir > 0 && arm > 0 && g > 0)) {
    throw std::invalid_argument("QuadrotorParams: all parameters must be positive");
  }
}

Link Link::slender_beam(double mass, double length, double friction) {
  Link l;
  l.mass = mass;
  l.length = length;
  l.cg_offset = length / 2.0;
  l.inertia = Vec3(0.0, 1.0, 1.0).asDiagonal();
  l.inertia *= mass * length * length / 12.0;
  l.friction = friction;
  return l;
}

void LinkParams::validate() const {
  geometry().validate();
  for (const Link& l : links) {
    if (!(l.mass > 0.0)) throw std::invalid_argument("LinkParams: link masses must be positive");
  }
}

LinkParams apply_payload(const LinkParams& params, double payload) {
  if (payload < 0.0) throw std::invalid_argument("apply_payload: negative payload mass");
  if (payload == 0.0) return params;
  LinkParams out = params;
  const Link& l2 = params.links[1];
  Link& n2 = out.links[1];
  n2.mass = l2.mass + payload;
  n2.cg_offset = (l2.mass * l2.cg_offset + payload * l2.length) / n2.mass;
  const double shift = n2.cg_offset - l2.cg_offset;
  const double tip = l2.length - n2.cg_offset;
  const double extra = l2.mass * shift * shift + payload * tip * tip;
  n2.inertia(1, 1) += extra;
  n2.inertia(2, 2) += extra;
  return out;
}

StateVector SystemState::to_vector() const {
  StateVector v;
  v << position, attitude, joints, velocity, attitude_rate, joint_rates;
  return v;
}

SystemState SystemState::from_vector(const StateVector& v) {
  SystemState s;
  s.position = v.segment<3>(0);
  s.attitude = v.segment<3>(3);
  s.joints = v.segment<2>(6);
  s.velocity = v.segment<3>(8);
  s.attitude_rate = v.segment<3>(11);
  s.joint_rates = v.segment<2>(14);
  return s;
}

RneWorkspace rne_pass(const EulerAngles& attitude, const BaseMotion& base, const Vec2& q, const Vec2& qd,
                      const Vec2& qdd, const LinkParams& links, bool with_gravity) {
  const ManipulatorGeometry geom = links.geometry();
  const auto chain = dh_chain<double>(geom, {q(0), q(1)});
  const Mat3 r_b0 = chain[0].linear();
  const std::array<Mat3, 2> r_parent_child{chain[1].linear(), chain[2].linear()};  // R^{i-1}_i
  const Mat3 r_0b = r_b0.transpose();
  const Vec3 z = Vec3::UnitZ();

  RneWorkspace ws;
  const Vec3 r0 = r_0b * Vec3(0.0, 0.0, -links.L0);
  ws.base_omega = r_0b * base.angular_velocity;
  ws.base_omega_dot = r_0b * base.angular_acceleration;
  ws.base_v = r_0b * base.linear_velocity + ws.base_omega.cross(r0);
  ws.base_v_dot = r_0b * base.linear_acceleration + ws.base_omega_dot.cross(r0) +
                  ws.base_omega.cross(ws.base_omega.cross(r0));

  const Vec3 g_inertial = with_gravity ? Vec3(0.0, 0.0, -links.g) : Vec3::Zero();
  Vec3 g_frame = r_0b * rotation_from_euler(attitude) * g_inertial;

  Vec3 w_p = ws.base_omega, wd_p = ws.base_omega_dot, v_p = ws.base_v, vd_p = ws.base_v_dot;
  for (int i = 0; i < 2; ++i) {
    const Mat3 r_cp = r_parent_child[i].transpose();
    const Link& link = links.links[i];
    const Vec3 r(link.length, 0.0, 0.0);
    const Vec3 rc = link.cg_from_origin();

    ws.omega[i] = r_cp * (w_p + qd(i) * z);
    ws.omega_dot[i] = r_cp * (wd_p + qdd(i) * z + w_p.cross(qd(i) * z));
    ws.v[i] = r_cp * v_p + ws.omega[i].cross(r);
    ws.v_dot[i] = r_cp * vd_p + ws.omega_dot[i].cross(r) + ws.omega[i].cross(ws.omega[i].cross(r));
    ws.v_dot_cg[i] = ws.v_dot[i] + ws.omega_dot[i].cross(rc) + ws.omega[i].cross(ws.omega[i].cross(rc));
    ws.inertial_force[i] = -link.mass * ws.v_dot_cg[i];
    ws.inertial_moment[i] = -link.inertia * ws.omega_dot[i] - ws.omega[i].cross(link.inertia * ws.omega[i]);
    g_frame = r_cp * g_frame;
    ws.gravity[i] = g_frame;

    w_p = ws.omega[i];
    wd_p = ws.omega_dot[i];
    v_p = ws.v[i];
    vd_p = ws.v_dot[i];
  }

  // Inward pass; no external load beyond link 2.
  Vec3 f_next = Vec3::Zero(), n_next = Vec3::Zero();
  for (int i = 1; i >= 0; --i) {
    const Link& link = links.links[i];
    const Vec3 r(link.length, 0.0, 0.0);
    const Vec3 rc = link.cg_from_origin();
    ws.force[i] = f_next - link.mass * ws.gravity[i] - ws.inertial_force[i];
    ws.moment[i] = n_next + (r + rc).cross(ws.force[i]) - rc.cross(f_next) - ws.inertial_moment[i];
    f_next = r_parent_child[i] * ws.force[i];
    n_next = r_parent_child[i] * ws.moment[i];
    ws.joint_torque(i) = n_next.dot(z) + link.friction * qd(i);
  }
  ws.base_force = f_next;
  ws.base_moment = n_next;
  return ws;
}

namespace {

BaseMotion base_motion(const SystemState& s, const Mat3& r_bi, const Vec3& body_lin_acc, const Vec3& body_ang_acc) {
  BaseMotion b;
  b.angular_velocity = s.attitude_rate;
  b.angular_acceleration = body_ang_acc;
  b.linear_velocity = r_bi * s.velocity;
  b.linear_acceleration = body_lin_acc;
  return b;
}

}  // namespace

RneResult rne_sweep(const SystemState& state, const Vec3& body_linear_accel, const Vec3& body_angular_accel,
                    const Vec2& qdd_trial, const LinkParams& links) {
  const EulerAngles att = state.euler();
  const Mat3 r_bi = rotation_from_euler(att);
  RneResult out;
  out.workspace = rne_pass(att, base_motion(state, r_bi, body_linear_accel, body_angular_accel), state.joints,
                           state.joint_rates, qdd_trial, links);
  for (int i = 0; i < 2; ++i) {
    Vec2 unit = Vec2::Zero();
    unit(i) = 1.0;
    const RneWorkspace probe = rne_pass(att, BaseMotion{}, state.joints, Vec2::Zero(), unit, links, false);
    out.joint_model.inertia(i) = probe.joint_torque(i);
    out.joint_model.bias(i) = out.joint_model.inertia(i) * qdd_trial(i) - out.workspace.joint_torque(i);
  }
  return out;
}

InteractionWrench interaction_wrench(const RneWorkspace& ws, const EulerAngles& attitude, double L0) {
  static const Mat3 r_b0 = (Mat3() << 0, 0, 1, -1, 0, 0, 0, -1, 0).finished();
  const Vec3 p_b0(0.0, 0.0, -L0);
  InteractionWrench w;
  w.force_body = -(r_b0 * ws.base_force);
  w.moment_body = -(skew(p_b0) * r_b0 * ws.base_force + r_b0 * ws.base_moment);
  w.force_inertial = rotation_from_euler(attitude).transpose() * w.force_body;
  return w;
}

namespace {

void check_validity(const Vec3& attitude) {
  if (!(std::cos(attitude(0)) * std::cos(attitude(1)) > 0.0)) {
    throw ModelValidityError("attitude outside the model validity region (cos(phi) cos(theta) <= 0)");
  }
}

Vec3 thrust_direction(const Vec3& att) {
  const double cf = std::cos(att(0)), sf = std::sin(att(0));
  const double ct = std::cos(att(1)), st = std::sin(att(1));
  const double cp = std::cos(att(2)), sp = std::sin(att(2));
  return {cp * st * cf + sp * sf, sp * st * cf - cp * sf, ct * cf};
}

Vec3 gyroscopic(const Vec3& rates, double omega_bar, const QuadrotorParams& p) {
  const double pr = rates(0), qr = rates(1), rr = rates(2);
  return {qr * rr * (p.Iy - p.Iz) - p.Ir * qr * omega_bar,
          rr * pr * (p.Iz - p.Ix) + p.Ir * pr * omega_bar,
          qr * pr * (p.Ix - p.Iy)};
}

}  // namespace

Vec3 quadrotor_rotational_accelerations(const Vec3& rates, const Vec3& torque, double omega_bar,
                                        const QuadrotorParams& params) {
  return (gyroscopic(rates, omega_bar, params) + torque).cwiseQuotient(params.inertia());
}

Vec6 quadrotor_accelerations(const SystemState& state, const BodyWrench& wrench, double omega_bar,
                             const InteractionWrench& interaction, const QuadrotorParams& params) {
  check_validity(state.attitude);
  Vec6 acc;
  acc.head<3>() = (wrench.thrust * thrust_direction(state.attitude) + interaction.force_inertial) / params.m;
  acc(2) -= params.g;
  acc.tail<3>() = quadrotor_rotational_accelerations(
      state.attitude_rate, Vec3(wrench.tau1, wrench.tau2, wrench.tau3) + interaction.moment_body, omega_bar,
      params);
  return acc;
}

DynamicsEvaluation evaluate_dynamics(const SystemState& state, const ControlInput& u, const QuadrotorParams& quad,
                                     const LinkParams& links) {
  check_validity(state.attitude);
  const EulerAngles att = state.euler();
  const Mat3 r_bi = rotation_from_euler(att);

  using Mat8 = Eigen::Matrix<double, 8, 8>;
  using Vec8 = Eigen::Matrix<double, 8, 1>;
  using Mat3x8 = Eigen::Matrix<double, 3, 8>;

  const RneWorkspace bias = rne_pass(att, base_motion(state, r_bi, Vec3::Zero(), Vec3::Zero()), state.joints,
                                     state.joint_rates, Vec2::Zero(), links);
  const InteractionWrench bias_w = interaction_wrench(bias, att, links.L0);

  // Columns: unit eta_1 ddot (inertial), unit eta_2 ddot, unit joint accelerations.
  Mat3x8 force_map, moment_map;
  Eigen::Matrix<double, 2, 8> torque_map;
  for (int k = 0; k < 8; ++k) {
    BaseMotion probe_base;
    Vec2 qdd = Vec2::Zero();
    if (k < 3) {
      probe_base.linear_acceleration = r_bi.col(k);
    } else if (k < 6) {
      probe_base.angular_acceleration = Vec3::Unit(k - 3);
    } else {
      qdd(k - 6) = 1.0;
    }
    const RneWorkspace probe = rne_pass(att, probe_base, state.joints, Vec2::Zero(), qdd, links, false);
    const InteractionWrench w = interaction_wrench(probe, att, links.L0);
    force_map.col(k) = w.force_inertial;
    moment_map.col(k) = w.moment_body;
    torque_map.col(k) = probe.joint_torque;
  }

  Mat8 a = Mat8::Zero();
  Vec8 rhs;
  a.topRows<3>() = -force_map;
  a.block<3, 3>(0, 0) += quad.m * Mat3::Identity();
  rhs.head<3>() = u.wrench.thrust * thrust_direction(state.attitude) + bias_w.force_inertial;
  rhs(2) -= quad.m * quad.g;

  a.middleRows<3>(3) = -moment_map;
  a.block<3, 3>(3, 3) += quad.inertia().asDiagonal();
  rhs.segment<3>(3) = gyroscopic(state.attitude_rate, u.omega_bar, quad) +
                      Vec3(u.wrench.tau1, u.wrench.tau2, u.wrench.tau3) + bias_w.moment_body;

  a.bottomRows<2>() = torque_map;
  rhs.tail<2>() = u.joint_torque - bias.joint_torque;

  const Vec8 x = a.partialPivLu().solve(rhs);

  DynamicsEvaluation out;
  out.linear_acceleration = x.head<3>();
  out.angular_acceleration = x.segment<3>(3);
  out.joint_acceleration = x.tail<2>();
  out.interaction.force_inertial = bias_w.force_inertial + force_map * x;
  out.interaction.moment_body = bias_w.moment_body + moment_map * x;
  out.interaction.force_body = r_bi * out.interaction.force_inertial;
  return out;
}

StateVector state_derivative(const SystemState& state, const ControlInput& u, const QuadrotorParams& quad,
                             const LinkParams& links) {
  const DynamicsEvaluation ev = evaluate_dynamics(state, u, quad, links);
  StateVector d;
  d << state.velocity, state.attitude_rate, state.joint_rates, ev.linear_acceleration, ev.angular_acceleration,
      ev.joint_acceleration;
  return d;
}

void load_params(const KeyValueFile& kv, QuadrotorParams& quad, LinkParams& links) {
  quad.m = kv.number_or("m", quad.m);
  quad.Ix = kv.number_or("Ix", quad.Ix);
  quad.Iy = kv.number_or("Iy", quad.Iy);
  quad.Iz = kv.number_or("Iz", quad.Iz);
  quad.Ir = kv.number_or("Ir", quad.Ir);
  quad.arm = kv.number_or("arm", quad.arm);
  quad.g = kv.number_or("g", quad.g);
  links.g = quad.g;
  links.m0 = kv.number_or("m0", links.m0);
  links.L0 = kv.number_or("L0", links.L0);
  for (int i = 0; i < 2; ++i) {
    const std::string n = std::to_string(i + 1);
    const Link& cur = links.links[i];
    const double b = kv.number_or("b" + n, cur.friction);
    links.links[i] = Link::slender_beam(kv.number_or("m" + n, cur.mass), kv.number_or("L" + n, cur.length), b);
  }
  quad.validate();
  links.validate();
}

}  // namespace ams
