#pragma once

#include "ghpctrl/problem.hpp"

namespace ghpctrl {

struct SolveOptions {
  double tolerance = 1e-8;       ///< target KKT residual (max norm)
  long max_iterations = 10'000'000;
  double primal_step = 0.02;
  double dual_step = 0.05;
  double penalty = 20.0;         ///< augmented-Lagrangian damping weight
  int check_every = 200;         ///< residual evaluation cadence
};

struct ReferenceSolution {
  PrimalDualPoint point;
  double objective_value = 0.0;
  KktReport kkt;
  long iterations = 0;
};

/// Reference solver for SteadyStateProblem, independent of the closed-loop
/// controllers: eliminates Z_floor through the floor balance, then runs a
/// damped projected primal-dual iteration (gradient steps on the augmented
/// Lagrangian, projected multiplier ascent) with fixed steps until the full
/// problem's KKT residual drops below the tolerance. Deterministic: identical
/// problems produce bit-identical solutions. Throws NumericError with the
/// best residual if the iteration cap is reached.
ReferenceSolution solve_reference(const SteadyStateProblem& problem,
                                  const SolveOptions& options = {});

}  // namespace ghpctrl
