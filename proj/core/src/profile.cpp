#include "ghpctrl/profile.hpp"

#include <algorithm>
#include <cmath>

namespace ghpctrl {

PiecewiseProfile::PiecewiseProfile(std::vector<double> times, std::vector<double> values,
                                   Interp interp)
    : times_(std::move(times)), values_(std::move(values)), interp_(interp) {
  if (times_.empty() || times_.size() != values_.size()) {
    throw StructuralError("profile: times/values must be non-empty and equal length");
  }
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    if (!(times_[k] < times_[k + 1])) {
      throw StructuralError("profile: breakpoint times must be strictly increasing");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw StructuralError("profile: non-finite value");
  }
}

PiecewiseProfile PiecewiseProfile::constant(double value) {
  return PiecewiseProfile({0.0}, {value}, Interp::hold);
}

double PiecewiseProfile::operator()(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  // first breakpoint strictly greater than t
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  if (interp_ == Interp::hold) return values_[lo];
  const double f = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return values_[lo] + f * (values_[hi] - values_[lo]);
}

bool PiecewiseProfile::is_constant() const {
  return std::all_of(values_.begin(), values_.end(),
                     [&](double v) { return v == values_.front(); });
}

double PiecewiseProfile::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double PiecewiseProfile::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

}  // namespace ghpctrl
