#include "ams/identification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ams {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
  if (x.size() < 2 || std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
    throw std::domain_error("fit_line: need at least two distinct abscissae");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  // Centred sums keep the intercept accurate with PWM values near 1500.
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.samples = x.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

std::string_view to_string(FitMap m) {
  switch (m) {
    case FitMap::SpeedSquared: return "omega_sq";
    case FitMap::Thrust: return "thrust";
    case FitMap::DragMoment: return "drag_moment";
  }
  return "?";
}

RotorCalibration FitResult::calibration(const RotorCalibration& base) const {
  RotorCalibration cal = base;
  const double fs = thrust_unit == ThrustUnit::GramForce ? kGramForce : 1.0;
  for (int j = 0; j < 4; ++j) {
    cal.a(j) = fits[j][0].slope;
    cal.b(j) = fits[j][0].intercept;
    cal.c(j) = fits[j][1].slope * fs;
    cal.d(j) = fits[j][1].intercept * fs;
    cal.e(j) = fits[j][2].slope;
    cal.h(j) = fits[j][2].intercept;
  }
  return cal;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<RigSample> read_rig_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    header = split_csv(line);
  }
  if (header.empty()) throw ParseError(lineno, "rig data: missing header row");

  static const char* const names[] = {"rotor", "pwm", "omega_sq", "thrust", "power"};
  int col[5];
  for (int k = 0; k < 5; ++k) {
    const auto it = std::find(header.begin(), header.end(), names[k]);
    if (it == header.end()) throw ParseError(lineno, std::string("rig data: missing column '") + names[k] + "'");
    col[k] = static_cast<int>(it - header.begin());
  }

  std::vector<RigSample> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw ParseError(lineno, "rig data: wrong number of columns");
    RigSample s;
    const double rotor = parse_number(cells[col[0]], lineno);
    if (rotor != 1 && rotor != 2 && rotor != 3 && rotor != 4) throw ParseError(lineno, "rig data: rotor must be 1..4");
    s.rotor = static_cast<int>(rotor);
    s.pwm = parse_number(cells[col[1]], lineno);
    s.omega_sq = parse_number(cells[col[2]], lineno);
    s.thrust = parse_number(cells[col[3]], lineno);
    s.power = parse_number(cells[col[4]], lineno);
    if (s.omega_sq <= 0.0) throw ParseError(lineno, "rig data: omega_sq must be positive");
    out.push_back(s);
  }
  return out;
}

void write_rig_csv(std::ostream& os, const std::vector<RigSample>& samples) {
  os << "rotor,pwm,omega_sq,thrust,power\n";
  for (const auto& s : samples) {
    os << s.rotor << ',' << format_number(s.pwm) << ',' << format_number(s.omega_sq) << ','
       << format_number(s.thrust) << ',' << format_number(s.power) << '\n';
  }
}

FitResult fit_rotors(const std::vector<RigSample>& samples, ThrustUnit unit) {
  FitResult r;
  r.thrust_unit = unit;
  for (int j = 1; j <= 4; ++j) {
    std::vector<double> u, w2, f, m;
    for (const auto& s : samples) {
      if (s.rotor != j) continue;
      u.push_back(s.pwm);
      w2.push_back(s.omega_sq);
      f.push_back(s.thrust);
      m.push_back(drag_moment_from_power(s.power, std::sqrt(s.omega_sq)));
    }
    try {
      r.fits[j - 1][0] = fit_line(u, w2);
      r.fits[j - 1][1] = fit_line(u, f);
      r.fits[j - 1][2] = fit_line(u, m);
    } catch (const std::domain_error& e) {
      throw std::domain_error("rotor " + std::to_string(j) + ": " + e.what());
    }
  }
  return r;
}

void write_fit_csv(std::ostream& os, const FitResult& fit) {
  const char* force = fit.thrust_unit == ThrustUnit::GramForce ? "gf" : "N";
  os << "rotor,map,slope,intercept,rms,samples,slope_unit,intercept_unit\n";
  for (int j = 1; j <= 4; ++j) {
    for (int k = 0; k < kFitMapCount; ++k) {
      const auto m = static_cast<FitMap>(k);
      const LineFit& f = fit.at(j, m);
      std::string yu = m == FitMap::SpeedSquared ? "rad2/s2" : m == FitMap::Thrust ? force : "N.m";
      os << j << ',' << to_string(m) << ',' << format_number(f.slope) << ',' << format_number(f.intercept) << ','
         << format_number(f.rms) << ',' << f.samples << ',' << yu << "/us," << yu << '\n';
    }
  }
}

std::vector<RigSample> synthesize_rig_data(const RotorCalibration& cal, const std::vector<double>& pwm) {
  std::vector<RigSample> out;
  for (int j = 0; j < 4; ++j) {
    for (double u : pwm) {
      RigSample s;
      s.rotor = j + 1;
      s.pwm = u;
      s.omega_sq = cal.a(j) * u + cal.b(j);
      s.thrust = (cal.c(j) * u + cal.d(j)) / kGramForce;
      s.power = (cal.e(j) * u + cal.h(j)) * std::sqrt(s.omega_sq);
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace ams
