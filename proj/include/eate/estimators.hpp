#pragma once

#include <cstdint>
#include <variant>

#include <Eigen/Core>

#include "eate/core.hpp"
#include "eate/designs.hpp"

namespace eate {

enum class EstimatorKind { HT, Hajek };

const char* estimator_name(EstimatorKind kind);

struct EstimateResult {
  double point = 0.0;
  double arm_mean_treated = 0.0;   // mu_1 = n^-1 sum Z_i Y_i / p_i
  double arm_mean_control = 0.0;   // mu_0 = n^-1 sum (1 - Z_i) Y_i / (1 - p_i)
  double weight_sum_treated = 0.0; // n_1 = sum Z_i / p_i
  double weight_sum_control = 0.0; // n_0 = sum (1 - Z_i) / (1 - p_i)
  EstimatorKind estimator = EstimatorKind::HT;
};

/// Horvitz-Thompson contrast. An empty arm contributes zero.
EstimateResult ht_estimate(const ExperimentData& data);
EstimateResult ht_estimate(const AssignmentVector& z, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& p);

/// Hajek contrast (n/n_1) mu_1 - (n/n_0) mu_0. Throws DegenerateAssignment
/// when either arm is empty.
EstimateResult hajek_estimate(const ExperimentData& data);
EstimateResult hajek_estimate(const AssignmentVector& z, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& p);

EstimateResult estimate(EstimatorKind kind, const AssignmentVector& z, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& p);

struct Exact {
  double limit = 1 << 20;
};

struct MonteCarlo {
  long reps = 10000;
  std::uint64_t seed = 1;
};

using EstimandMode = std::variant<Exact, MonteCarlo>;

struct EstimandValues {
  double eate = 0.0;
  double adse = 0.0;
  double tau_msq = 0.0;
  /// Standard error of eate; zero in exact mode.
  double eate_se = 0.0;
  long reps = 0;
  bool exact = true;
};

EstimandValues estimands(const PotentialOutcomeOracle& oracle, const Design& design,
                         const EstimandMode& mode = Exact{});

double eate(const PotentialOutcomeOracle& oracle, const Design& design,
            const EstimandMode& mode = Exact{});
double adse(const PotentialOutcomeOracle& oracle, const Design& design,
            const EstimandMode& mode = Exact{});
double tau_msq(const PotentialOutcomeOracle& oracle, const Design& design,
               const EstimandMode& mode = Exact{});

struct SpilloverTerms {
  double xi1 = 0.0;     // xi_ij(1)
  double xi0 = 0.0;     // xi_ij(0)
  double xi_breve = 0.0;
  double y_breve = 0.0; // Y-breve of unit i
};

/// Exact spillover quantities from j to i under a Bernoulli design.
SpilloverTerms spillover_terms(const PotentialOutcomeOracle& oracle, const Design& design, Index i,
                               Index j, double limit = 1 << 20);

struct VarianceDecomposition {
  double tau_msq = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double d_avg = 1.0;
  /// tau_msq / d_avg - b1 - b2
  double limit() const { return tau_msq / d_avg - b1 - b2; }
};

/// Exact tau_msq, B1 and B2 under a Bernoulli design. d_avg comes from the
/// oracle's declared graph, or from exact detection when none is declared.
VarianceDecomposition variance_limit_decomposition(const PotentialOutcomeOracle& oracle,
                                                   const Design& design, double limit = 1 << 20);

}  // namespace eate
