#pragma once

#include <Eigen/Core>

namespace ghpctrl {

/// One classic 4th-order Runge-Kutta update of a single component. Both
/// execution paths (monolithic and agent-based) must combine stages through
/// these helpers so their floating-point arithmetic is identical.
inline double rk4_combine(double x, double k1, double k2, double k3, double k4,
                          double dt) {
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline double rk4_stage(double x, double k, double scaled_dt) {
  return x + scaled_dt * k;
}

/// Classic RK4 step on dx/dt = rhs(t, x) with a state repair applied to every
/// stage input and to the result (used to keep projected multipliers
/// non-negative; pass a no-op to integrate plain ODEs).
template <class RhsFn, class ClampFn>
Eigen::VectorXd rk4_step(RhsFn&& rhs, double t, const Eigen::VectorXd& x, double dt,
                         ClampFn&& clamp) {
  using Eigen::VectorXd;
  const auto eval = [&](double tq, VectorXd xq) {
    clamp(xq);
    return rhs(tq, xq);
  };
  const double half = 0.5 * dt;
  const VectorXd k1 = eval(t, x);
  VectorXd xs(x.size());
  for (int i = 0; i < x.size(); ++i) xs[i] = rk4_stage(x[i], k1[i], half);
  const VectorXd k2 = eval(t + half, xs);
  for (int i = 0; i < x.size(); ++i) xs[i] = rk4_stage(x[i], k2[i], half);
  const VectorXd k3 = eval(t + half, xs);
  for (int i = 0; i < x.size(); ++i) xs[i] = rk4_stage(x[i], k3[i], dt);
  const VectorXd k4 = eval(t + dt, xs);
  VectorXd out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    out[i] = rk4_combine(x[i], k1[i], k2[i], k3[i], k4[i], dt);
  }
  clamp(out);
  return out;
}

}  // namespace ghpctrl
