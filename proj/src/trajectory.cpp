#include "ams/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ams {

double QuinticSegment::end_value() const {
  const double h = tf - t0;
  double v = 0.0;
  for (int k = 5; k >= 0; --k) v = v * h + coeffs[k];
  return v;
}

QuinticSegment plan_quintic(double q0, double qf, double t0, double tf) {
  if (!(tf > t0)) throw std::invalid_argument("plan_quintic: tf must exceed t0");
  const double h = tf - t0, dq = qf - q0;
  QuinticSegment s;
  s.t0 = t0;
  s.tf = tf;
  s.coeffs = {q0, 0.0, 0.0, 10.0 * dq / std::pow(h, 3), -15.0 * dq / std::pow(h, 4), 6.0 * dq / std::pow(h, 5)};
  return s;
}

TrajectorySample sample(const QuinticSegment& seg, double t) {
  const double tau = std::clamp(t, seg.t0, seg.tf) - seg.t0;
  const auto& c = seg.coeffs;
  TrajectorySample out;
  out.q = c[0] + tau * (c[1] + tau * (c[2] + tau * (c[3] + tau * (c[4] + tau * c[5]))));
  out.qd = c[1] + tau * (2 * c[2] + tau * (3 * c[3] + tau * (4 * c[4] + tau * 5 * c[5])));
  out.qdd = 2 * c[2] + tau * (6 * c[3] + tau * (12 * c[4] + tau * 20 * c[5]));
  if (t >= seg.tf) {
    // Exact hold at the end point.
    out.qd = 0.0;
    out.qdd = 0.0;
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, kChannelCount> kNames{"X", "Y", "Z", "psi", "theta1", "theta2"};

}  // namespace

std::string_view channel_name(Channel c) { return kNames[static_cast<int>(c)]; }

std::optional<Channel> parse_channel(std::string_view name) {
  for (int i = 0; i < kChannelCount; ++i) {
    if (kNames[i] == name) return static_cast<Channel>(i);
  }
  return std::nullopt;
}

TrajectorySample ChannelProfile::sample(double t) const {
  const QuinticSegment* active = nullptr;
  for (const auto& s : segments) {
    if (s.t0 <= t) active = &s;
  }
  if (!active) return {initial, 0.0, 0.0};
  return ams::sample(*active, t);
}

void ChannelProfile::add_move(double target, double start, double duration) {
  segments.push_back(plan_quintic(final_value(), target, start, start + duration));
}

ReferenceSet MissionProfile::sample(double t) const {
  ReferenceSet r;
  for (int i = 0; i < kChannelCount; ++i) r[i] = channels[i].sample(t);
  return r;
}

void MissionProfile::validate() const {
  for (int i = 0; i < kChannelCount; ++i) {
    const auto& segs = channels[i].segments;
    for (std::size_t k = 1; k < segs.size(); ++k) {
      if (segs[k].t0 < segs[k - 1].tf) {
        throw std::invalid_argument("mission: overlapping segments on channel " + std::string(kNames[i]));
      }
      if (segs[k].start_value() != segs[k - 1].end_value()) {
        throw std::invalid_argument("mission: discontinuous segments on channel " + std::string(kNames[i]));
      }
    }
    if (!segs.empty() && segs.front().start_value() != channels[i].initial) {
      throw std::invalid_argument("mission: first segment does not start at the initial value");
    }
  }
  if (payload && !(payload->mass >= 0.0 && payload->pick <= payload->place)) {
    throw std::invalid_argument("mission: payload needs mass >= 0 and pick <= place");
  }
  if (duration < 0.0) throw std::invalid_argument("mission: negative duration");
}

MissionProfile MissionProfile::from_key_values(const KeyValueFile& kv) {
  MissionProfile m;
  m.duration = kv.number_or("duration", 0.0);
  auto channel_of = [](const KeyValueFile::Record& r) {
    const auto c = parse_channel(r.fields.at(0));
    if (!c) throw ParseError(r.line, "unknown channel '" + r.fields[0] + "'");
    return *c;
  };
  auto expect = [](const KeyValueFile::Record& r, std::size_t n) {
    if (r.fields.size() != n) {
      throw ParseError(r.line, "'" + r.name + "' expects " + std::to_string(n) + " fields");
    }
  };
  for (const auto& r : kv.records()) {
    if (r.name == "initial") {
      expect(r, 2);
      m[channel_of(r)].initial = parse_number(r.fields[1], r.line);
    } else if (r.name == "segment") {
      expect(r, 4);
      const double dur = parse_number(r.fields[3], r.line);
      if (!(dur > 0.0)) throw ParseError(r.line, "segment duration must be positive");
      m[channel_of(r)].add_move(parse_number(r.fields[1], r.line), parse_number(r.fields[2], r.line), dur);
    } else if (r.name == "payload") {
      expect(r, 3);
      m.payload = PayloadEvent{parse_number(r.fields[0], r.line), parse_number(r.fields[1], r.line),
                               parse_number(r.fields[2], r.line)};
    } else {
      throw ParseError(r.line, "unknown record '" + r.name + "'");
    }
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
  return m;
}

std::string MissionProfile::to_text() const {
  std::ostringstream os;
  os << "duration = " << format_number(duration) << " s\n";
  for (int i = 0; i < kChannelCount; ++i) {
    os << "initial " << kNames[i] << ' ' << format_number(channels[i].initial) << '\n';
  }
  os << "# segment channel target start duration\n";
  for (int i = 0; i < kChannelCount; ++i) {
    for (const auto& s : channels[i].segments) {
      os << "segment " << kNames[i] << ' ' << format_number(s.end_value()) << ' ' << format_number(s.t0) << ' '
         << format_number(s.tf - s.t0) << '\n';
    }
  }
  if (payload) {
    os << "# payload mass pick place\n";
    os << "payload " << format_number(payload->mass) << ' ' << format_number(payload->pick) << ' '
       << format_number(payload->place) << '\n';
  }
  return os.str();
}

IkSolution solve_setpoint(const EndEffectorPose& pose, const ManipulatorGeometry& g, double preferred_psi) {
  IkOptions opts;
  opts.preferred_psi = preferred_psi;
  const auto sols = inverse_kinematics(pose, g, opts);
  if (sols.empty()) throw std::runtime_error("solve_setpoint: no inverse kinematics solution");
  return sols.front();
}

std::array<EndEffectorPose, 3> mission_setpoints() {
  std::array<EndEffectorPose, 3> out;
  const std::array<double, 3> pos{5.0, 20.0, 60.0}, ang{0.5, 1.0, 1.5};
  for (int i = 0; i < 3; ++i) {
    out[i].position = Vec3::Constant(pos[i]);
    out[i].orientation = EulerAngles{ang[i], ang[i], ang[i]};
  }
  return out;
}

namespace {

// Equivalent of `target` (mod 2 pi) closest to `from`.
double nearest_equivalent(double target, double from) { return from + wrap_angle(target - from); }

}  // namespace

MissionProfile thesis_mission(const ManipulatorGeometry& g, const MissionTiming& timing) {
  if (timing.regions < 1 || timing.regions > 3) throw std::invalid_argument("thesis_mission: regions must be 1..3");
  MissionProfile m;
  m.duration = timing.duration;
  m.payload = timing.payload;
  const auto poses = mission_setpoints();
  for (int r = 0; r < timing.regions; ++r) {
    const IkSolution s = solve_setpoint(poses[r], g, m[Channel::Psi].final_value());
    const double start = timing.move_start[r];
    m[Channel::X].add_move(s.X, start, timing.move_duration);
    m[Channel::Y].add_move(s.Y, start, timing.move_duration);
    m[Channel::Z].add_move(s.Z, start, timing.move_duration);
    m[Channel::Psi].add_move(nearest_equivalent(s.psi, m[Channel::Psi].final_value()), start, timing.move_duration);
    m[Channel::Theta1].add_move(nearest_equivalent(s.theta1, m[Channel::Theta1].final_value()), start,
                                timing.move_duration);
    m[Channel::Theta2].add_move(nearest_equivalent(s.theta2, m[Channel::Theta2].final_value()), start,
                                timing.move_duration);
  }
  m.validate();
  return m;
}

}  // namespace ams
