#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eate/core.hpp"
#include "eate/designs.hpp"
#include "eate/estimators.hpp"
#include "eate/metrics.hpp"

namespace eate {

/// n^-2 sum Z_i Y_i^2 / p_i^2 + n^-2 sum (1 - Z_i) Y_i^2 / (1 - p_i)^2.
double var_est_conventional(const ExperimentData& data);
double var_est_conventional(const AssignmentVector& z, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& p);

enum class InflationKind { None, Avg, Max, SpectralRadius, Custom };

const char* inflation_name(InflationKind kind);
/// Accepts ber, avg, max, sr.
InflationKind parse_inflation(const std::string& name);

struct VarianceEstimate {
  double v_ber = 0.0;
  InflationKind kind = InflationKind::None;
  double factor = 1.0;
  double value = 0.0;
};

/// Scales v_ber by d_avg, d_max or lambda1 from the summary. Throws
/// InvalidArgument when the requested factor is missing.
VarianceEstimate inflate(double v_ber, const InterferenceSummary& summary, InflationKind kind);
VarianceEstimate inflate_by(double v_ber, double factor);
std::vector<VarianceEstimate> sensitivity_sweep(double v_ber, const std::vector<double>& factors);

enum class IntervalMethod { Chebyshev, Normal };

struct ConfidenceInterval {
  double center = 0.0;
  double half_width = 0.0;
  double alpha = 0.05;
  IntervalMethod method = IntervalMethod::Chebyshev;

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
  bool contains(double x) const { return lo() <= x && x <= hi(); }
};

/// half width sqrt(V / alpha).
ConfidenceInterval chebyshev_interval(double point, const VarianceEstimate& v, double alpha);
ConfidenceInterval chebyshev_interval(double point, double variance, double alpha);
/// half width z_{1 - alpha/2} sqrt(V).
ConfidenceInterval normal_interval(double point, double variance, double alpha);

/// Standard normal quantile.
double normal_quantile(double prob);

struct VarianceMoments {
  double mean_ht = 0.0;
  double var_ht = 0.0;
  double mean_v_ber = 0.0;
  /// Standard error of var_ht in Monte Carlo mode; zero when exact.
  double var_se = 0.0;
  bool exact = true;
};

/// Law of the HT estimator and of V_ber under the design.
VarianceMoments variance_moments(const PotentialOutcomeOracle& oracle, const Design& design,
                                 const EstimandMode& mode = Exact{});

double true_variance(const PotentialOutcomeOracle& oracle, const Design& design,
                     const EstimandMode& mode = Exact{});

}  // namespace eate
