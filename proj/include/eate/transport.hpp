#pragma once

#include <vector>

#include <Eigen/Core>

namespace eate {

struct TransportFlow {
  int from;
  int to;
  double amount;
};

struct TransportResult {
  double cost = 0.0;
  std::vector<TransportFlow> flows;
  /// Dual potentials: cost(i,j) - u_i - v_j >= 0, with equality on basic cells.
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  long pivots = 0;
};

/// Minimum-cost transportation by the primal transportation simplex
/// (northwest-corner start, MODI potentials, block pricing). Supplies and
/// demands must be nonnegative with equal totals.
TransportResult solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                const Eigen::MatrixXd& cost, long max_pivots = 10000000);

}  // namespace eate
