#pragma once

#include <vector>

#include "ghpctrl/errors.hpp"

namespace ghpctrl {

/// Piecewise time profile, right-continuous at breakpoints.
///
/// `hold` keeps each value constant on [t_k, t_{k+1}); `linear` interpolates
/// between breakpoints. Outside the breakpoint range the first/last value is
/// extrapolated as a constant, so a profile defined on [0, horizon] covers any
/// query time.
class PiecewiseProfile {
 public:
  enum class Interp { hold, linear };

  PiecewiseProfile() = default;
  PiecewiseProfile(std::vector<double> times, std::vector<double> values,
                   Interp interp = Interp::hold);

  static PiecewiseProfile constant(double value);

  double operator()(double t) const;

  Interp interp() const { return interp_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  bool is_constant() const;

  /// Largest value attained over all breakpoints (profiles are monotone
  /// between breakpoints for both interpolation kinds).
  double max_value() const;
  double min_value() const;

 private:
  std::vector<double> times_{0.0};
  std::vector<double> values_{0.0};
  Interp interp_ = Interp::hold;
};

}  // namespace ghpctrl
