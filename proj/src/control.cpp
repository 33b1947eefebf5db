#include "ams/control.hpp"

#include <cmath>

namespace ams {

double RateEstimator::update(double x, double dt) {
  if (!primed_) {
    primed_ = true;
    prev_ = x;
    rate_ = 0.0;
    return rate_;
  }
  const double raw = (x - prev_) / dt;
  prev_ = x;
  rate_ += (1.0 - std::exp(-pole_ * dt)) * (raw - rate_);
  return rate_;
}

}  // namespace ams
