#include "eate/variance.hpp"

#include <cmath>

#include "eate/kahan.hpp"

namespace eate {

double var_est_conventional(const AssignmentVector& z, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& p) {
  const Index n = z.size();
  if (y.size() != n || p.size() != n) throw DimensionMismatch("z, y and p must have the same length");
  CompensatedSum s;
  for (Index i = 0; i < n; ++i) {
    const double w = z[i] ? p[i] : 1.0 - p[i];
    s += (y[i] * y[i]) / (w * w);
  }
  const double nn = static_cast<double>(n);
  return s.value() / (nn * nn);
}

double var_est_conventional(const ExperimentData& data) {
  return var_est_conventional(data.z, data.y, data.p);
}

const char* inflation_name(InflationKind kind) {
  switch (kind) {
    case InflationKind::None: return "ber";
    case InflationKind::Avg: return "avg";
    case InflationKind::Max: return "max";
    case InflationKind::SpectralRadius: return "sr";
    case InflationKind::Custom: return "custom";
  }
  return "?";
}

InflationKind parse_inflation(const std::string& name) {
  if (name == "ber" || name == "none") return InflationKind::None;
  if (name == "avg") return InflationKind::Avg;
  if (name == "max") return InflationKind::Max;
  if (name == "sr") return InflationKind::SpectralRadius;
  throw InvalidArgument("unknown variance kind `" + name + "`");
}

VarianceEstimate inflate(double v_ber, const InterferenceSummary& summary, InflationKind kind) {
  VarianceEstimate v;
  v.v_ber = v_ber;
  v.kind = kind;
  switch (kind) {
    case InflationKind::None: v.factor = 1.0; break;
    case InflationKind::Avg: v.factor = summary.d_avg; break;
    case InflationKind::Max: v.factor = static_cast<double>(summary.d_max); break;
    case InflationKind::SpectralRadius:
      if (!summary.lambda1) throw InvalidArgument("spectral radius missing from interference summary");
      v.factor = *summary.lambda1;
      break;
    case InflationKind::Custom:
      throw InvalidArgument("custom inflation needs an explicit factor");
  }
  v.value = v.factor * v_ber;
  return v;
}

VarianceEstimate inflate_by(double v_ber, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("inflation factor must be positive");
  return {v_ber, InflationKind::Custom, factor, factor * v_ber};
}

std::vector<VarianceEstimate> sensitivity_sweep(double v_ber, const std::vector<double>& factors) {
  std::vector<VarianceEstimate> out;
  out.reserve(factors.size());
  for (double f : factors) out.push_back(inflate_by(v_ber, f));
  return out;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
}

}  // namespace

ConfidenceInterval chebyshev_interval(double point, double variance, double alpha) {
  check_alpha(alpha);
  if (variance < 0.0) throw InvalidArgument("variance must be nonnegative");
  return {point, std::sqrt(variance / alpha), alpha, IntervalMethod::Chebyshev};
}

ConfidenceInterval chebyshev_interval(double point, const VarianceEstimate& v, double alpha) {
  return chebyshev_interval(point, v.value, alpha);
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("quantile level must lie in (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < prob)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ConfidenceInterval normal_interval(double point, double variance, double alpha) {
  check_alpha(alpha);
  if (variance < 0.0) throw InvalidArgument("variance must be nonnegative");
  return {point, normal_quantile(1.0 - alpha / 2.0) * std::sqrt(variance), alpha,
          IntervalMethod::Normal};
}

VarianceMoments variance_moments(const PotentialOutcomeOracle& oracle, const Design& design,
                                 const EstimandMode& mode) {
  const Index n = oracle.size();
  if (design.size() != n) throw DimensionMismatch("oracle and design sizes differ");
  const Eigen::VectorXd p = marginal_probs(design);
  VarianceMoments m;
  if (const auto* ex = std::get_if<Exact>(&mode)) {
    const auto support = enumerate_support(design, ex->limit);
    std::vector<double> ht(support.size());
    CompensatedSum mean, vb;
    for (std::size_t k = 0; k < support.size(); ++k) {
      const auto y = oracle.evaluate(support[k].z);
      ht[k] = ht_estimate(support[k].z, y, p).point;
      mean += support[k].probability * ht[k];
      vb += support[k].probability * var_est_conventional(support[k].z, y, p);
    }
    m.mean_ht = mean.value();
    CompensatedSum var;
    for (std::size_t k = 0; k < support.size(); ++k) {
      const double d = ht[k] - m.mean_ht;
      var += support[k].probability * d * d;
    }
    m.var_ht = var.value();
    m.mean_v_ber = vb.value();
    m.exact = true;
    return m;
  }
  const auto& mc = std::get<MonteCarlo>(mode);
  if (mc.reps < 2) throw InvalidArgument("monte carlo mode needs at least 2 draws");
  Stream rng(mc.seed);
  AssignmentVector z(n);
  std::vector<double> ht(static_cast<std::size_t>(mc.reps));
  CompensatedSum mean, vb;
  for (long r = 0; r < mc.reps; ++r) {
    sample_into(design, rng, z);
    const auto y = oracle.evaluate(z);
    ht[r] = ht_estimate(z, y, p).point;
    mean += ht[r];
    vb += var_est_conventional(z, y, p);
  }
  const double reps = static_cast<double>(mc.reps);
  m.mean_ht = mean.value() / reps;
  CompensatedSum var, fourth;
  for (double h : ht) {
    const double d = (h - m.mean_ht) * (h - m.mean_ht);
    var += d;
    fourth += d * d;
  }
  m.var_ht = var.value() / (reps - 1.0);
  const double m4 = fourth.value() / reps;
  m.var_se = std::sqrt(std::max(m4 - m.var_ht * m.var_ht, 0.0) / reps);
  m.mean_v_ber = vb.value() / reps;
  m.exact = false;
  return m;
}

double true_variance(const PotentialOutcomeOracle& oracle, const Design& design,
                     const EstimandMode& mode) {
  return variance_moments(oracle, design, mode).var_ht;
}

}  // namespace eate
