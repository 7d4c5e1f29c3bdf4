#pragma once

#include <memory>

#include "eate/core.hpp"
#include "eate/dgp.hpp"
#include "eate/rng.hpp"

namespace fixtures {

using eate::AssignmentVector;
using eate::FunctionOracle;
using eate::Index;

/// y = a (z .* (1 + z)) + b + c z with random coefficients: heterogeneous
/// effects and dense spillovers.
inline std::shared_ptr<FunctionOracle> random_linear(Index n, std::uint64_t seed) {
  eate::Stream rng(seed);
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return rng.uniform(-1, 1); });
  Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(0, 2); });
  Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(0.5, 1.5); });
  return std::make_shared<FunctionOracle>(n, [a, b, c](const AssignmentVector& z) {
    const Eigen::VectorXd v = z.as_vector();
    Eigen::VectorXd y = a * v;
    y.array() = y.array() * (1.0 + v.array()) * 0.3 + b.array() + c.array() * v.array();
    return y;
  });
}

/// y_i = z_i + spill * z_{partner}; units paired 0-1, 2-3, ...
inline std::shared_ptr<FunctionOracle> mutual(Index n, double spill) {
  return std::make_shared<FunctionOracle>(n, [n, spill](const AssignmentVector& z) {
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) y[i] = z[i] + spill * z[i ^ 1];
    return y;
  });
}

/// y_i = c_i z_i + b_i, no interference.
inline std::shared_ptr<FunctionOracle> no_interference(Index n) {
  return std::make_shared<FunctionOracle>(
      n,
      [n](const AssignmentVector& z) {
        Eigen::VectorXd y(n);
        for (Index i = 0; i < n; ++i) y[i] = (1.0 + 0.5 * i) * z[i] + 0.25 * i;
        return y;
      },
      eate::InterferenceGraph::identity(n));
}

}  // namespace fixtures
