#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ams/rotor_model.hpp"

namespace ams {

/// y = slope x + intercept, ordinary least squares.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;  // residual root-mean-square, units of y
  std::size_t samples = 0;
};

/// Throws std::domain_error unless x holds at least two distinct values.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// One static test-stand reading.
struct RigSample {
  int rotor = 1;          // 1..4
  double pwm = 0.0;       // us
  double omega_sq = 0.0;  // rad^2/s^2
  double thrust = 0.0;    // gf or N, see ThrustUnit
  double power = 0.0;     // W, mechanical power into the propeller
};

enum class ThrustUnit { GramForce, Newton };

enum class FitMap { SpeedSquared, Thrust, DragMoment };
inline constexpr int kFitMapCount = 3;
std::string_view to_string(FitMap m);

struct FitResult {
  ThrustUnit thrust_unit = ThrustUnit::GramForce;
  std::array<std::array<LineFit, kFitMapCount>, 4> fits{};  // [rotor][map]

  const LineFit& at(int rotor, FitMap m) const { return fits[rotor - 1][static_cast<int>(m)]; }
  /// Fitted a..h with the thrust fit converted to newtons; K_F/K_M are taken from `base`.
  RotorCalibration calibration(const RotorCalibration& base) const;
};

/// CSV with header naming at least rotor,pwm,omega_sq,thrust,power (any order).
std::vector<RigSample> read_rig_csv(std::istream& in);
void write_rig_csv(std::ostream& os, const std::vector<RigSample>& samples);

/// Per-rotor fits of Omega^2, thrust and drag moment against PWM. The drag
/// moment of each sample is P / Omega before fitting.
FitResult fit_rotors(const std::vector<RigSample>& samples, ThrustUnit unit = ThrustUnit::GramForce);

void write_fit_csv(std::ostream& os, const FitResult& fit);

/// Noise-free readings generated from the linear fits of `cal`, thrust in gram-force.
std::vector<RigSample> synthesize_rig_data(const RotorCalibration& cal, const std::vector<double>& pwm);

}  // namespace ams
