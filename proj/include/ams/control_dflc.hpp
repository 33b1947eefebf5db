#pragma once

#include <array>

#include "ams/control.hpp"
#include "ams/fuzzy.hpp"

namespace ams {

enum class DflcLoop { X = 0, Y, Z, Phi, Theta, Psi, Theta1, Theta2 };
inline constexpr int kDflcLoopCount = 8;

struct DflcScaling {
  double ke = 1.0;  // error -> [-1, 1]
  double kc = 1.0;  // error rate -> [-3, 3]
  double ku = 1.0;  // normalized output -> physical
};

struct DflcGains {
  std::array<DflcScaling, kDflcLoopCount> loops{
      DflcScaling{0.007, 0.05, 5}, DflcScaling{0.007, 0.05, 5}, DflcScaling{1, 0.3, 16.5},
      DflcScaling{0.5, 0.5, 9},    DflcScaling{0.5, 0.5, 10},   DflcScaling{1, 0.5, 0.2},
      DflcScaling{2, 0.05, 4},     DflcScaling{5, 0.3, 0.3}};
  double offset = 7.85;     // N, added to the thrust loop
  double rate_pole = 50.0;  // rad/s

  DflcScaling& operator[](DflcLoop l) { return loops[static_cast<int>(l)]; }
  const DflcScaling& operator[](DflcLoop l) const { return loops[static_cast<int>(l)]; }

  /// Keys: <loop>_ke, <loop>_kc, <loop>_ku for x, y, z, phi, theta, psi,
  /// theta1, theta2; offset; rate_pole.
  static DflcGains from_key_values(const KeyValueFile& kv);
};

/// Three N/Z/P sets on e in [-1, 1] and c in [-3, 3], PD-like rule table.
const FuzzySystem& dflc_rule_system();

/// ku * COG(fuzzy(ke e, kc c)); inputs clamp to their universes.
double dflc_output(const DflcScaling& s, double e, double c);

struct BodyFrameError {
  double x = 0.0;
  double x_rate = 0.0;
  double y = 0.0;
  double y_rate = 0.0;
};

/// Inertial position errors (and rates) rotated into the yaw frame.
BodyFrameError body_frame_error(double ex, double ey, double ex_rate, double ey_rate, double psi);

/// Fuzzy x/y loops: x error -> desired pitch, y error -> desired roll.
class OuterPositionLoops {
 public:
  OuterPositionLoops(DflcScaling x, DflcScaling y, double rate_pole = 50.0);
  /// Returns (theta_d, phi_d).
  std::pair<double, double> step(const BodyFrameError& err) const;
  /// Errors measured from the state and references; rates by filtered difference.
  BodyFrameError measure(const SystemState& s, const ReferenceSet& refs, double dt);

 private:
  DflcScaling x_, y_;
  RateEstimator x_rate_, y_rate_;
};

class DflcController : public Controller {
 public:
  explicit DflcController(DflcGains gains = {});
  ControlOutput step(const ControlContext& ctx) override;
  std::string_view name() const override { return "dflc"; }

 private:
  DflcGains gains_;
  OuterPositionLoops outer_;
  std::array<RateEstimator, 6> rates_;
};

}  // namespace ams
