#pragma once

#include <vector>

#include "eate/core.hpp"
#include "eate/designs.hpp"
#include "eate/rng.hpp"

namespace eate {

/// Discrete law on {0,1}^n with distinct support points.
class DesignDistribution {
 public:
  DesignDistribution(std::vector<AssignmentVector> support, std::vector<double> probs);
  static DesignDistribution from_design(const Design& design, double limit = 1 << 20);

  Index dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return support_.size(); }
  const std::vector<AssignmentVector>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }

 private:
  Index n_;
  std::vector<AssignmentVector> support_;
  std::vector<double> probs_;
};

/// (1/2) sum |p - q| over the union support.
double total_variation(const DesignDistribution& P, const DesignDistribution& Q);
/// max over events A of |P(A) - Q(A)| by brute force over the union support.
double total_variation_sup(const DesignDistribution& P, const DesignDistribution& Q,
                           int max_points = 20);

/// L_r distance between assignments: Hamming^(1/r).
double assignment_distance(const AssignmentVector& a, const AssignmentVector& b, double r);

/// Exact order-1 Wasserstein distance under the L_r ground metric. Throws
/// ProblemTooLarge when |supp P| x |supp Q| exceeds max_entries.
double wasserstein(const DesignDistribution& P, const DesignDistribution& Q, double r,
                   double max_entries = 1e6);

/// 2 k_tau n^(-1/r) C_(r/(r-1)), with C_(inf) when r = 1.
double lipschitz_bound(const InterferenceGraph& graph, double r, double k_tau);

struct DistanceReport {
  double tv = 0.0;
  double w_r = 0.0;
  double r = 1.0;
  double eate_gap_bound_tv = 0.0;
  double eate_gap_bound_wasserstein = 0.0;
  double k_tau = 2.0;
};

DistanceReport eate_gap_bounds(const DesignDistribution& P, const DesignDistribution& Q,
                               double k_tau, const InterferenceGraph& graph, double r);

/// Largest |tau_ATE(z') - tau_ATE(z'')| / ||z' - z''||_r over random pairs of
/// fair-coin assignments.
double lipschitz_check(const PotentialOutcomeOracle& oracle, double r, long trials, Stream& rng);

}  // namespace eate
