#include "ghpctrl/plant.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace ghpctrl {

VectorXd pack_state(const PlantState& s) {
  VectorXd x(s.total_states());
  const int n = static_cast<int>(s.T_zone.size());
  x.segment(0, n) = s.T_zone;
  x.segment(n, n) = s.T_floor;
  x.segment(2 * n, n) = s.T_water;
  if (s.T_wall.size() > 0) x.segment(3 * n, s.T_wall.size()) = s.T_wall;
  return x;
}

PlantState unpack_state(const BuildingGraph& g, const VectorXd& x) {
  const int n = g.size();
  const int walls = g.wall_states ? g.edge_count() : 0;
  if (x.size() != 3 * n + walls) throw StructuralError("plant state vector has wrong size");
  PlantState s;
  s.T_zone = x.segment(0, n);
  s.T_floor = x.segment(n, n);
  s.T_water = x.segment(2 * n, n);
  if (walls > 0) s.T_wall = x.segment(3 * n, walls);
  return s;
}

PlantState plant_rhs(const PlantState& state, const PlantInputs& inputs, double T_out,
                     const VectorXd& Q, const BuildingGraph& graph, const GhpParams& ghp) {
  const int n = graph.size();
  state.require_matching(graph);
  if (inputs.q.size() != n) throw StructuralError("plant_rhs: q dimension mismatch");
  if (Q.size() != n) throw StructuralError("plant_rhs: Q dimension mismatch");
  if (!state.all_finite()) throw NumericError("plant_rhs: non-finite state");

  PlantState d;
  d.T_zone = VectorXd::Zero(n);
  d.T_floor = VectorXd::Zero(n);
  d.T_water = VectorXd::Zero(n);
  if (graph.wall_states) d.T_wall = VectorXd::Zero(graph.edge_count());

  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = graph.zones[static_cast<std::size_t>(i)];
    double flux = (T_out - state.T_zone[i]) / z.R_out +
                  (state.T_floor[i] - state.T_zone[i]) / z.R_af + Q[i];
    if (!graph.wall_states) {
      for (const auto& [j, R] : graph.neighbors(i)) {
        flux += (state.T_zone[j] - state.T_zone[i]) / R;
      }
    }
    d.T_zone[i] = flux / z.C;
    d.T_floor[i] = ((state.T_zone[i] - state.T_floor[i]) / z.R_af +
                    (state.T_water[i] - state.T_floor[i]) / z.R_fw) /
                   z.C_floor;
    d.T_water[i] = ((state.T_floor[i] - state.T_water[i]) / z.R_fw +
                    ghp.c_w * inputs.q[i] * (inputs.T_supply - state.T_floor[i])) /
                   z.C_water;
  }
  if (graph.wall_states) {
    for (int e = 0; e < graph.edge_count(); ++e) {
      const Edge& ed = graph.edges[static_cast<std::size_t>(e)];
      d.T_zone[ed.i] += (state.T_wall[e] - state.T_zone[ed.i]) / ed.R /
                        graph.zones[static_cast<std::size_t>(ed.i)].C;
      d.T_zone[ed.j] += (state.T_wall[e] - state.T_zone[ed.j]) / ed.R /
                        graph.zones[static_cast<std::size_t>(ed.j)].C;
      d.T_wall[e] = ((state.T_zone[ed.i] - state.T_wall[e]) / ed.R +
                     (state.T_zone[ed.j] - state.T_wall[e]) / ed.R) /
                    graph.C_wall;
    }
  }
  return d;
}

AffineDynamics system_matrix(const BuildingGraph& graph, const GhpParams& ghp,
                             const PlantInputs& inputs, double T_out, const VectorXd& Q) {
  const int n = graph.size();
  if (inputs.q.size() != n) throw StructuralError("system_matrix: q dimension mismatch");
  if (Q.size() != n) throw StructuralError("system_matrix: Q dimension mismatch");
  const int walls = graph.wall_states ? graph.edge_count() : 0;
  const int N = 3 * n + walls;
  AffineDynamics out;
  out.A = MatrixXd::Zero(N, N);
  out.w = VectorXd::Zero(N);
  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = graph.zones[static_cast<std::size_t>(i)];
    double diag = 1.0 / z.R_out + 1.0 / z.R_af;
    for (const auto& [j, R] : graph.neighbors(i)) {
      diag += 1.0 / R;
      if (!graph.wall_states) out.A(i, j) += (1.0 / R) / z.C;
    }
    out.A(i, i) = -diag / z.C;
    out.A(i, n + i) = (1.0 / z.R_af) / z.C;
    out.A(n + i, i) = (1.0 / z.R_af) / z.C_floor;
    out.A(n + i, n + i) = -(1.0 / z.R_af + 1.0 / z.R_fw) / z.C_floor;
    out.A(n + i, 2 * n + i) = (1.0 / z.R_fw) / z.C_floor;
    out.A(2 * n + i, n + i) = (1.0 / z.R_fw - ghp.c_w * inputs.q[i]) / z.C_water;
    out.A(2 * n + i, 2 * n + i) = -(1.0 / z.R_fw) / z.C_water;
    out.w[i] = (T_out / z.R_out + Q[i]) / z.C;
    out.w[2 * n + i] = ghp.c_w * inputs.q[i] * inputs.T_supply / z.C_water;
  }
  if (graph.wall_states) {
    for (int e = 0; e < graph.edge_count(); ++e) {
      const Edge& ed = graph.edges[static_cast<std::size_t>(e)];
      out.A(ed.i, 3 * n + e) += (1.0 / ed.R) / graph.zones[static_cast<std::size_t>(ed.i)].C;
      out.A(ed.j, 3 * n + e) += (1.0 / ed.R) / graph.zones[static_cast<std::size_t>(ed.j)].C;
      out.A(3 * n + e, ed.i) = (1.0 / ed.R) / graph.C_wall;
      out.A(3 * n + e, ed.j) = (1.0 / ed.R) / graph.C_wall;
      out.A(3 * n + e, 3 * n + e) = -2.0 / ed.R / graph.C_wall;
    }
  }
  return out;
}

StabilityReport is_hurwitz(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw StructuralError("is_hurwitz: matrix must be square");
  Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericError("is_hurwitz: eigen solver failed");
  const double abscissa = es.eigenvalues().real().maxCoeff();
  return {abscissa < 0.0, abscissa};
}

PlantState steady_state(const BuildingGraph& graph, const GhpParams& ghp,
                        const PlantInputs& inputs, double T_out, const VectorXd& Q) {
  const AffineDynamics sys = system_matrix(graph, ghp, inputs, T_out, Q);
  Eigen::FullPivLU<MatrixXd> lu(sys.A);
  if (!lu.isInvertible()) {
    throw NumericError("steady_state: singular system matrix (not Hurwitz?)");
  }
  const VectorXd x = lu.solve(-sys.w);
  return unpack_state(graph, x);
}

WallReductionCheck second_order_steady_state_check(const BuildingGraph& graph_with_walls,
                                                   const GhpParams& ghp,
                                                   const PlantInputs& inputs, double T_out,
                                                   const VectorXd& Q) {
  if (!graph_with_walls.wall_states) {
    throw StructuralError("second_order_steady_state_check: wall states not enabled");
  }
  const PlantState full = steady_state(graph_with_walls, ghp, inputs, T_out, Q);
  WallReductionCheck chk;
  for (int e = 0; e < graph_with_walls.edge_count(); ++e) {
    const Edge& ed = graph_with_walls.edges[static_cast<std::size_t>(e)];
    const double mid = 0.5 * (full.T_zone[ed.i] + full.T_zone[ed.j]);
    chk.wall_midpoint_residual =
        std::max(chk.wall_midpoint_residual, std::abs(full.T_wall[e] - mid));
  }
  const BuildingGraph reduced = graph_with_walls.with_scaled_edge_resistance(2.0);
  const PlantState red = steady_state(reduced, ghp, inputs, T_out, Q);
  chk.reduced_model_agreement =
      std::max((full.T_zone - red.T_zone).cwiseAbs().maxCoeff(),
               (full.T_floor - red.T_floor).cwiseAbs().maxCoeff());
  return chk;
}

}  // namespace ghpctrl
