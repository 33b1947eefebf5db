#pragma once

#include <string>
#include <vector>

namespace ams {

/// Symmetric triangle; a shoulder holds membership 1 beyond the centre on
/// its side.
struct TriangularMF {
  double center = 0.0;
  double half_width = 1.0;
  bool left_shoulder = false;
  bool right_shoulder = false;

  double membership(double x) const;
};

/// Evenly spaced partition of [lo, hi] with saturating edge sets.
class FuzzyVariable {
 public:
  FuzzyVariable() = default;
  FuzzyVariable(std::vector<TriangularMF> sets, double lo, double hi);
  static FuzzyVariable uniform(int count, double lo, double hi);

  int size() const { return static_cast<int>(sets_.size()); }
  const TriangularMF& operator[](int i) const { return sets_[i]; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double clamp(double x) const;

 private:
  std::vector<TriangularMF> sets_;
  double lo_ = -1.0;
  double hi_ = 1.0;
};

struct Activation {
  int index = 0;
  double degree = 0.0;
};

/// Memberships above zero, input clamped to the universe.
std::vector<Activation> fuzzify(const FuzzyVariable& v, double crisp);

/// Output centres indexed by (first input set, second input set).
class RuleBase2D {
 public:
  RuleBase2D() = default;
  RuleBase2D(int rows, int cols, double fill = 0.0);
  RuleBase2D(int rows, int cols, std::vector<double> row_major);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int r, int c) { return centers_[static_cast<std::size_t>(r * cols_ + c)]; }
  double at(int r, int c) const { return centers_[static_cast<std::size_t>(r * cols_ + c)]; }
  const std::vector<double>& data() const { return centers_; }

  bool operator==(const RuleBase2D&) const = default;

  /// One row per line, whitespace separated; '#' starts a comment.
  std::string to_grid() const;
  static RuleBase2D from_grid(const std::string& text);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> centers_;
};

struct ClippedSet {
  double center = 0.0;
  double degree = 0.0;
};

/// min for rule strength; identical output centres merged by max.
std::vector<ClippedSet> infer(const RuleBase2D& rules, const std::vector<Activation>& first,
                              const std::vector<Activation>& second);

struct CogResult {
  double value = 0.0;
  bool empty = false;  // no area; value is 0
};

/// Centre of gravity of symmetric output triangles of full base `base_width`,
/// each clipped at its degree; sets are weighted by their own areas.
CogResult defuzzify_cog(const std::vector<ClippedSet>& sets, double base_width);

/// Area of a unit-height symmetric triangle of base `base_width` clipped at `h`.
double clipped_area(double h, double base_width);

/// Complete two-input Mamdani evaluation on normalized inputs.
struct FuzzySystem {
  FuzzyVariable first;
  FuzzyVariable second;
  RuleBase2D rules;
  double output_base_width = 2.0;

  double evaluate(double x1, double x2) const;
};

}  // namespace ams
