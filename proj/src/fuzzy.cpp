#include "ams/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ams/keyvalue.hpp"

namespace ams {

double TriangularMF::membership(double x) const {
  if ((left_shoulder && x <= center) || (right_shoulder && x >= center)) return 1.0;
  // Inputs sitting on a neighbouring centre leave rounding residue; drop it so
  // that a grid point fires exactly one set.
  const double mu = 1.0 - std::abs(x - center) / half_width;
  return mu > 1e-12 ? mu : 0.0;
}

FuzzyVariable::FuzzyVariable(std::vector<TriangularMF> sets, double lo, double hi)
    : sets_(std::move(sets)), lo_(lo), hi_(hi) {
  if (sets_.empty() || !(hi > lo)) throw std::invalid_argument("FuzzyVariable: empty set list or universe");
}

FuzzyVariable FuzzyVariable::uniform(int count, double lo, double hi) {
  if (count < 2) throw std::invalid_argument("FuzzyVariable::uniform: need at least two sets");
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const int n = count - 1;
  std::vector<TriangularMF> sets;
  for (int i = 0; i < count; ++i) {
    // Written so that mirrored centres are exact negatives about `mid`.
    TriangularMF mf;
    mf.center = mid + half * static_cast<double>(2 * i - n) / n;
    mf.half_width = 2.0 * half / n;
    mf.left_shoulder = i == 0;
    mf.right_shoulder = i == n;
    sets.push_back(mf);
  }
  return FuzzyVariable(std::move(sets), lo, hi);
}

double FuzzyVariable::clamp(double x) const { return std::clamp(x, lo_, hi_); }

std::vector<Activation> fuzzify(const FuzzyVariable& v, double crisp) {
  const double x = v.clamp(crisp);
  std::vector<Activation> out;
  for (int i = 0; i < v.size(); ++i) {
    const double mu = v[i].membership(x);
    if (mu > 0.0) out.push_back({i, mu});
  }
  return out;
}

RuleBase2D::RuleBase2D(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), centers_(static_cast<std::size_t>(rows * cols), fill) {}

RuleBase2D::RuleBase2D(int rows, int cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), centers_(std::move(row_major)) {
  if (centers_.size() != static_cast<std::size_t>(rows * cols)) {
    throw std::invalid_argument("RuleBase2D: size does not match dimensions");
  }
}

std::string RuleBase2D::to_grid() const {
  std::ostringstream os;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) os << (c ? " " : "") << format_number(at(r, c));
    os << '\n';
  }
  return os.str();
}

RuleBase2D RuleBase2D::from_grid(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  int rows = 0, cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string tok;
    int n = 0;
    while (ls >> tok) {
      values.push_back(parse_number(tok, line_no));
      ++n;
    }
    if (n == 0) continue;
    if (cols >= 0 && n != cols) throw ParseError(line_no, "ragged rule grid");
    cols = n;
    ++rows;
  }
  if (rows == 0) throw ParseError(0, "empty rule grid");
  return RuleBase2D(rows, cols, std::move(values));
}

std::vector<ClippedSet> infer(const RuleBase2D& rules, const std::vector<Activation>& first,
                              const std::vector<Activation>& second) {
  std::vector<ClippedSet> out;
  for (const auto& a : first) {
    for (const auto& b : second) {
      const double w = std::min(a.degree, b.degree);
      if (w <= 0.0) continue;
      const double center = rules.at(a.index, b.index);
      auto it = std::find_if(out.begin(), out.end(), [&](const ClippedSet& s) { return s.center == center; });
      if (it == out.end()) {
        out.push_back({center, w});
      } else {
        it->degree = std::max(it->degree, w);
      }
    }
  }
  return out;
}

double clipped_area(double h, double base_width) { return 0.5 * base_width * h * (2.0 - h); }

CogResult defuzzify_cog(const std::vector<ClippedSet>& sets, double base_width) {
  // Group by |centre| and accumulate in that order so that a mirrored set of
  // activations gives an exactly negated result.
  std::vector<ClippedSet> sorted = sets;
  std::sort(sorted.begin(), sorted.end(), [](const ClippedSet& a, const ClippedSet& b) {
    const double ma = std::abs(a.center), mb = std::abs(b.center);
    return ma != mb ? ma < mb : a.center < b.center;
  });
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double mag = std::abs(sorted[i].center);
    double pos = 0.0, neg = 0.0;
    for (; i < sorted.size() && std::abs(sorted[i].center) == mag; ++i) {
      const double area = clipped_area(std::clamp(sorted[i].degree, 0.0, 1.0), base_width);
      (sorted[i].center < 0.0 ? neg : pos) += area;
    }
    num += mag * (pos - neg);
    den += pos + neg;
  }
  if (!(den > 0.0)) return {0.0, true};
  return {num / den, false};
}

double FuzzySystem::evaluate(double x1, double x2) const {
  return defuzzify_cog(infer(rules, fuzzify(first, x1), fuzzify(second, x2)), output_base_width).value;
}

}  // namespace ams
