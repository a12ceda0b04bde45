#pragma once

#include <Eigen/Core>

#include "ghpctrl/building.hpp"

namespace ghpctrl {

/// ghpctrl stacks plant temperatures as x = [T_zone; T_floor; T_water;
/// T_wall], wall block present only when the graph carries wall states.
VectorXd pack_state(const PlantState& s);
PlantState unpack_state(const BuildingGraph& g, const VectorXd& x);

/// Time derivative of every plant temperature for the RC network
///
///   C_i  dT_i/dt  = (T_out - T_i)/R_out + sum_j (T_j - T_i)/R_ij
///                   + (T_floor,i - T_i)/R_af + Q_i
///   C_fi dT_fi/dt = (T_i - T_fi)/R_af + (T_wi - T_fi)/R_fw
///   C_wi dT_wi/dt = (T_fi - T_wi)/R_fw + c_w q_i (T_supply - T_fi)
///
/// With wall states enabled the zone equation exchanges with the wall node
/// (T_wall,ij - T_i)/R_ij instead of the direct neighbor term, and each wall
/// obeys C_wall dT_ij/dt = (T_i - T_ij)/R_ij + (T_j - T_ij)/R_ij.
PlantState plant_rhs(const PlantState& state, const PlantInputs& inputs, double T_out,
                     const VectorXd& Q, const BuildingGraph& graph, const GhpParams& ghp);

/// Linear form dx/dt = A x + w of the plant for frozen inputs/disturbances.
/// A depends on the flows q only; w collects outdoor, gain and supply terms.
struct AffineDynamics {
  MatrixXd A;
  VectorXd w;
};
AffineDynamics system_matrix(const BuildingGraph& graph, const GhpParams& ghp,
                             const PlantInputs& inputs, double T_out, const VectorXd& Q);

struct StabilityReport {
  bool hurwitz = false;
  double spectral_abscissa = 0.0;  ///< max real part over the spectrum
};
StabilityReport is_hurwitz(const MatrixXd& A);

/// Unique equilibrium for frozen inputs/disturbances via a dense linear solve.
/// Requires the system matrix to be Hurwitz (callers may check explicitly);
/// throws NumericError if the solve is singular.
PlantState steady_state(const BuildingGraph& graph, const GhpParams& ghp,
                        const PlantInputs& inputs, double T_out, const VectorXd& Q);

/// Second-order wall-model reduction check. At the wall-model equilibrium
/// every wall sits at the mean of its zones, and the first-order model with
/// doubled edge resistances reproduces the zone/floor equilibria.
struct WallReductionCheck {
  double wall_midpoint_residual = 0.0;   ///< max |T_ij - (T_i + T_j)/2|
  double reduced_model_agreement = 0.0;  ///< max zone/floor gap vs 2R model
};
WallReductionCheck second_order_steady_state_check(const BuildingGraph& graph_with_walls,
                                                   const GhpParams& ghp,
                                                   const PlantInputs& inputs, double T_out,
                                                   const VectorXd& Q);

}  // namespace ghpctrl
