#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "eate/core.hpp"

namespace eate::detail {

/// Every response y(z) for z in {0,1}^n, indexed by bit mask.
class CubeTable {
 public:
  explicit CubeTable(const PotentialOutcomeOracle& oracle) : n_(oracle.size()) {
    const std::uint64_t count = std::uint64_t{1} << n_;
    rows_.resize(count);
    for (std::uint64_t m = 0; m < count; ++m)
      rows_[m] = oracle.evaluate(AssignmentVector::from_mask(n_, m));
  }

  Index size() const noexcept { return n_; }
  std::uint64_t count() const noexcept { return rows_.size(); }
  double y(std::uint64_t mask, Index i) const { return rows_[mask][i]; }
  const Eigen::VectorXd& row(std::uint64_t mask) const { return rows_[mask]; }

 private:
  Index n_;
  std::vector<Eigen::VectorXd> rows_;
};

inline std::uint64_t with_bit(std::uint64_t mask, Index i, bool on) {
  const std::uint64_t b = std::uint64_t{1} << i;
  return on ? (mask | b) : (mask & ~b);
}

/// Product-measure probability of a mask.
inline double bernoulli_mass(std::uint64_t mask, const Eigen::VectorXd& p) {
  double pr = 1.0;
  for (Index i = 0; i < p.size(); ++i) pr *= ((mask >> i) & 1u) ? p[i] : 1.0 - p[i];
  return pr;
}

}  // namespace eate::detail
