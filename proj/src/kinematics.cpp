#include "ams/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ams {

void ManipulatorGeometry::validate() const {
  if (!(L0 > 0.0 && L1 > 0.0 && L2 > 0.0)) {
    throw std::invalid_argument("ManipulatorGeometry: link lengths must be positive");
  }
}

EndEffectorPose forward_kinematics(const QuadPose& pose, const JointAngles& q, const ManipulatorGeometry& g) {
  const Transform4 t = end_effector_transform(pose, q, g);
  EndEffectorPose out;
  out.position = t.translation();
  out.orientation = euler_from_rotation_any<double>(t.linear().transpose());
  return out;
}

std::string_view to_string(IkCase c) {
  switch (c) {
    case IkCase::Case1BranchA: return "case1a";
    case IkCase::Case1BranchB: return "case1b";
    case IkCase::Case2: return "case2";
    case IkCase::Case3: return "case3";
  }
  return "?";
}

double atan2_checked(double yy, double xx) {
  if (yy == 0.0 && xx == 0.0) throw std::domain_error("atan2_checked: both arguments are zero");
  const double a = std::atan2(yy, xx);
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

namespace {

void fill_position(IkSolution& s, const Vec3& p, const ManipulatorGeometry& g) {
  const double cps = std::cos(s.psi), sps = std::sin(s.psi);
  const double c1 = std::cos(s.theta1), s1 = std::sin(s.theta1);
  const double c2 = std::cos(s.theta2), s2 = std::sin(s.theta2);
  s.X = p.x() - (g.L1 * c1 * sps + g.L2 * cps * s2 + g.L2 * c1 * c2 * sps);
  s.Y = p.y() - (-g.L1 * cps * c1 + g.L2 * sps * s2 - g.L2 * cps * c1 * c2);
  s.Z = p.z() + g.L0 + g.L1 * s1 + g.L2 * c2 * s1;
}

}  // namespace

std::vector<IkSolution> inverse_kinematics(const Mat3& r, const Vec3& p, const ManipulatorGeometry& g,
                                           const IkOptions& opts) {
  if (!((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= opts.orthonormal_tol) ||
      !(std::abs(r.determinant() - 1.0) <= opts.orthonormal_tol)) {
    throw std::invalid_argument("inverse_kinematics: orientation is not a proper rotation");
  }

  const double r13 = r(0, 2), r23 = r(1, 2);
  const double r33 = std::clamp(r(2, 2), -1.0, 1.0);
  std::vector<IkSolution> out;

  if (std::abs(r13) >= opts.degenerate_tol || std::abs(r23) >= opts.degenerate_tol) {
    const double s1 = std::sqrt(1.0 - r33 * r33);

    IkSolution a;
    a.case_id = IkCase::Case1BranchA;
    a.theta1 = atan2_checked(s1, r33);
    a.psi = atan2_checked(r13, -r23);
    a.theta2 = atan2_checked(r(2, 1), -r(2, 0));
    fill_position(a, p, g);
    out.push_back(a);

    IkSolution b;
    b.case_id = IkCase::Case1BranchB;
    b.theta1 = atan2_checked(-s1, r33);
    b.psi = atan2_checked(-r13, r23);
    b.theta2 = atan2_checked(-r(2, 1), r(2, 0));
    fill_position(b, p, g);
    out.push_back(b);
    return out;
  }

  IkSolution s;
  s.free_psi = true;
  s.psi = opts.preferred_psi.value_or(0.0);
  const double combined = atan2_checked(r(0, 0), r(0, 1));
  if (r33 > 0.0) {
    s.case_id = IkCase::Case2;
    s.theta1 = 0.0;
    s.theta2 = combined - s.psi;
  } else {
    s.case_id = IkCase::Case3;
    s.theta1 = std::numbers::pi;
    s.theta2 = combined + s.psi;
  }
  fill_position(s, p, g);
  out.push_back(s);
  return out;
}

std::vector<IkSolution> inverse_kinematics(const EndEffectorPose& pose, const ManipulatorGeometry& g,
                                           const IkOptions& opts) {
  return inverse_kinematics(Mat3(rotation_from_euler(pose.orientation).transpose()), pose.position, g, opts);
}

}  // namespace ams
