#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ams/keyvalue.hpp"
#include "ams/kinematics.hpp"

namespace ams {

struct TrajectorySample {
  double q = 0.0;
  double qd = 0.0;
  double qdd = 0.0;
};

/// q(t) = sum c_k (t - t0)^k, k = 0..5, with zero end velocity and acceleration.
struct QuinticSegment {
  double t0 = 0.0;
  double tf = 1.0;
  std::array<double, 6> coeffs{};

  double start_value() const { return coeffs[0]; }
  double end_value() const;
};

QuinticSegment plan_quintic(double q0, double qf, double t0, double tf);

/// Evaluates the segment with t clamped to [t0, tf].
TrajectorySample sample(const QuinticSegment& seg, double t);

enum class Channel { X = 0, Y, Z, Psi, Theta1, Theta2 };
inline constexpr int kChannelCount = 6;

std::string_view channel_name(Channel c);
std::optional<Channel> parse_channel(std::string_view name);

/// One reference channel: holds `initial` until the first segment, then
/// follows segments and holds the last reached value in between.
struct ChannelProfile {
  double initial = 0.0;
  std::vector<QuinticSegment> segments;

  double final_value() const { return segments.empty() ? initial : segments.back().end_value(); }
  TrajectorySample sample(double t) const;
  /// Appends a move from the current final value.
  void add_move(double target, double start, double duration);
};

struct PayloadEvent {
  double mass = 0.0;   // kg
  double pick = 0.0;   // s
  double place = 0.0;  // s
};

using ReferenceSet = std::array<TrajectorySample, kChannelCount>;

struct MissionProfile {
  std::array<ChannelProfile, kChannelCount> channels;
  std::optional<PayloadEvent> payload;
  double duration = 0.0;  // s

  ChannelProfile& operator[](Channel c) { return channels[static_cast<int>(c)]; }
  const ChannelProfile& operator[](Channel c) const { return channels[static_cast<int>(c)]; }

  ReferenceSet sample(double t) const;
  /// Segments must be ordered and non-overlapping per channel.
  void validate() const;

  static MissionProfile from_key_values(const KeyValueFile& kv);
  std::string to_text() const;
};

/// Quadrotor/joint targets for an end-effector pose, via the first Case 1
/// branch when available. `preferred_psi` resolves the free yaw of Cases 2/3.
IkSolution solve_setpoint(const EndEffectorPose& pose, const ManipulatorGeometry& g, double preferred_psi = 0.0);

struct MissionTiming {
  std::array<double, 3> move_start{0.0, 20.0, 40.0};  // s
  double move_duration = 10.0;                         // s
  double duration = 80.0;                              // s
  PayloadEvent payload{0.15, 15.0, 65.0};
  /// Number of regions visited; 1 keeps the vehicle in the first region.
  int regions = 3;
};

/// Three end-effector regions: position (5, 5, 5) -> (20, 20, 20) -> (60, 60, 60) m and
/// orientation (0.5, 0.5, 0.5) -> (1, 1, 1) -> (1.5, 1.5, 1.5) rad, starting at rest at the origin.
std::array<EndEffectorPose, 3> mission_setpoints();
MissionProfile thesis_mission(const ManipulatorGeometry& g, const MissionTiming& timing = {});

}  // namespace ams
