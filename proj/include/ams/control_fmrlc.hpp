#pragma once

#include <array>
#include <vector>

#include "ams/control_dflc.hpp"
#include "ams/control_fbl.hpp"
#include "ams/fuzzy.hpp"

namespace ams {

/// First-order lag 1 / (tau s + 1), discretized exactly for a held input.
class ReferenceModel {
 public:
  explicit ReferenceModel(double tau = 1.0);
  double step(double r, double dt);
  double value() const { return y_; }
  void reset(double y) { y_ = y; }

 private:
  double tau_;
  double y_ = 0.0;
};

struct FmrlcParams {
  double ge = 1.0;    // controller error gain
  double gc = 1.0;    // controller error-rate gain
  double gu = 1.0;    // controller output gain
  double gye = 1.0;   // inverse model error gain
  double gyc = 1.0;   // inverse model error-rate gain
  double gp = 1.0;    // inverse model output gain
  double tau_c = 1.0; // reference model time constant, s
  double ta = 0.1;    // auto-tuning window, s
};

struct FmrlcGains {
  std::array<FmrlcParams, kLoopCount> loops{
      FmrlcParams{1.0 / 5, 1.0 / 10, 16.5, 1.0 / 60, 1.0 / 15, 3, 0.03, 0.1},
      FmrlcParams{2, 1, 0.93, 10, 10, 0.0029, 0.01, 0.05},
      FmrlcParams{2, 1, 0.93, 10, 10, 0.0029, 0.01, 0.05},
      FmrlcParams{1.0 / 3, 1.0 / 30, 0.19, 10, 10, 0.0019, 0.01, 0.05},
      FmrlcParams{1.0 / 60, 1.0 / 1000, 0.63, 1.0 / 2, 1.0 / 2, 0.0063, 0.1, 0.1},
      FmrlcParams{1.0 / 60, 1.0 / 1000, 0.32, 1.0 / 1.5, 1.0 / 1.5, 9.6e-4, 0.1, 0.1}};
  double cap_factor = 10.0;  // auto-tune cap relative to the initial ge, gc
  bool auto_tune = true;
  double rate_pole = 50.0;
  /// Outer x/y loops stay direct fuzzy.
  DflcScaling x{0.007, 0.05, 5};
  DflcScaling y{0.007, 0.05, 5};

  FmrlcParams& operator[](Loop l) { return loops[static_cast<int>(l)]; }
  const FmrlcParams& operator[](Loop l) const { return loops[static_cast<int>(l)]; }

  /// Keys: <loop>_<field> with loop in z, phi, theta, psi, theta1, theta2 and
  /// field in ge, gc, gu, gye, gyc, gp, tau_c, ta; x_ke ... y_ku; cap_factor;
  /// auto_tune (0/1); rate_pole.
  static FmrlcGains from_key_values(const KeyValueFile& kv);
};

/// Fixed 11x11 inverse-model table, rows y_e index -5..5, columns y_c -5..5.
const RuleBase2D& inverse_model_table();

/// 11 sets on [-1, 1], output sets of base width 0.4.
const FuzzyVariable& fmrlc_input_variable();
inline constexpr double kFmrlcOutputWidth = 0.4;

/// Shifts the centre of every rule fired by (e, c) by p, clamped to [-1, 1].
/// Returns the number of rules changed.
int knowledge_base_update(RuleBase2D& rules, const std::vector<Activation>& e, const std::vector<Activation>& c,
                          double p);

/// Windowed input maxima; every `ta` seconds sets ge = 1 / max|e|, gc = 1 / max|c|.
class AutoTuner {
 public:
  AutoTuner(double ta, double ge_cap, double gc_cap);
  /// Returns true on the ticks where the gains were updated.
  bool step(double e, double c, double dt, double& ge, double& gc);

 private:
  double ta_, ge_cap_, gc_cap_;
  double elapsed_ = 0.0;
  double max_e_ = 0.0;
  double max_c_ = 0.0;
};

class FmrlcLoop {
 public:
  FmrlcLoop(FmrlcParams params, double cap_factor = 10.0, bool auto_tune = true, double rate_pole = 50.0);

  /// One control tick for reference r and measurement y.
  double step(double r, double y, double dt);
  void reset_reference(double y) { model_.reset(y); }

  const RuleBase2D& rules() const { return rules_; }
  RuleBase2D& rules() { return rules_; }
  double last_p() const { return p_; }
  double reference_output() const { return model_.value(); }
  double ge() const { return ge_; }
  double gc() const { return gc_; }
  void set_learning(bool on) { learning_ = on; }

  /// Inverse model output for the given model-following error and its rate.
  double inverse_model(double ye, double yc) const;

 private:
  FmrlcParams params_;
  ReferenceModel model_;
  RuleBase2D rules_;
  AutoTuner tuner_;
  RateEstimator e_rate_, ye_rate_;
  double ge_, gc_;
  double p_ = 0.0;
  bool auto_tune_;
  bool learning_ = true;
  bool primed_ = false;
  std::vector<Activation> prev_e_, prev_c_;
};

class FmrlcController : public Controller {
 public:
  explicit FmrlcController(FmrlcGains gains = {});
  ControlOutput step(const ControlContext& ctx) override;
  std::string_view name() const override { return "fmrlc"; }

  const FmrlcLoop& loop(Loop l) const { return loops_[static_cast<int>(l)]; }

 private:
  FmrlcGains gains_;
  OuterPositionLoops outer_;
  std::vector<FmrlcLoop> loops_;
};

}  // namespace ams
