#include "eate/estimators.hpp"

#include <cmath>

#include "cube.hpp"
#include "eate/kahan.hpp"
#include "eate/metrics.hpp"

namespace eate {

const char* estimator_name(EstimatorKind kind) {
  return kind == EstimatorKind::HT ? "ht" : "hajek";
}

namespace {

EstimateResult arms(const AssignmentVector& z, const Eigen::VectorXd& y, const Eigen::VectorXd& p) {
  const Index n = z.size();
  if (y.size() != n || p.size() != n) throw DimensionMismatch("z, y and p must have the same length");
  CompensatedSum s1, s0, w1, w0;
  for (Index i = 0; i < n; ++i) {
    if (z[i]) {
      s1 += y[i] / p[i];
      w1 += 1.0 / p[i];
    } else {
      s0 += y[i] / (1.0 - p[i]);
      w0 += 1.0 / (1.0 - p[i]);
    }
  }
  const double nn = static_cast<double>(n);
  EstimateResult r;
  r.arm_mean_treated = s1.value() / nn;
  r.arm_mean_control = s0.value() / nn;
  r.weight_sum_treated = w1.value();
  r.weight_sum_control = w0.value();
  return r;
}

}  // namespace

EstimateResult ht_estimate(const AssignmentVector& z, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& p) {
  auto r = arms(z, y, p);
  r.point = r.arm_mean_treated - r.arm_mean_control;
  r.estimator = EstimatorKind::HT;
  return r;
}

EstimateResult ht_estimate(const ExperimentData& data) { return ht_estimate(data.z, data.y, data.p); }

EstimateResult hajek_estimate(const AssignmentVector& z, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& p) {
  auto r = arms(z, y, p);
  const Index treated = z.treated_count();
  if (treated == 0) throw DegenerateAssignment("hajek estimator undefined: treatment arm is empty");
  if (treated == z.size()) throw DegenerateAssignment("hajek estimator undefined: control arm is empty");
  const double nn = static_cast<double>(z.size());
  r.point = (nn / r.weight_sum_treated) * r.arm_mean_treated -
            (nn / r.weight_sum_control) * r.arm_mean_control;
  r.estimator = EstimatorKind::Hajek;
  return r;
}

EstimateResult hajek_estimate(const ExperimentData& data) {
  return hajek_estimate(data.z, data.y, data.p);
}

EstimateResult estimate(EstimatorKind kind, const AssignmentVector& z, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& p) {
  return kind == EstimatorKind::HT ? ht_estimate(z, y, p) : hajek_estimate(z, y, p);
}

// ---------------------------------------------------------------------------

namespace {

struct Accumulator {
  explicit Accumulator(Index n)
      : tau(Eigen::VectorXd::Zero(n)),
        s1(Eigen::VectorXd::Zero(n)),
        s0(Eigen::VectorXd::Zero(n)),
        p1(Eigen::VectorXd::Zero(n)),
        p0(Eigen::VectorXd::Zero(n)) {}

  void add(double w, const AssignmentVector& z, const Eigen::VectorXd& y, const Eigen::VectorXd& t) {
    const double ate = t.mean();
    ate_sum += w * ate;
    ate_sq += w * ate * ate;
    tau += w * t;
    for (Index i = 0; i < z.size(); ++i) {
      if (z[i]) {
        s1[i] += w * y[i];
        p1[i] += w;
      } else {
        s0[i] += w * y[i];
        p0[i] += w;
      }
    }
    total += w;
  }

  EstimandValues finish() const {
    EstimandValues v;
    v.eate = ate_sum / total;
    const Eigen::VectorXd mean_tau = tau / total;
    v.tau_msq = mean_tau.squaredNorm() / static_cast<double>(mean_tau.size());
    double a = 0.0;
    for (Index i = 0; i < s1.size(); ++i) {
      if (p1[i] <= 0.0 || p0[i] <= 0.0) throw DegenerateAssignment("unit never observed in one arm");
      a += s1[i] / p1[i] - s0[i] / p0[i];
    }
    v.adse = a / static_cast<double>(s1.size());
    return v;
  }

  double ate_sum = 0.0, ate_sq = 0.0, total = 0.0;
  Eigen::VectorXd tau, s1, s0, p1, p0;
};

}  // namespace

EstimandValues estimands(const PotentialOutcomeOracle& oracle, const Design& design,
                         const EstimandMode& mode) {
  const Index n = oracle.size();
  if (design.size() != n) throw DimensionMismatch("oracle and design sizes differ");
  Accumulator acc(n);
  if (const auto* ex = std::get_if<Exact>(&mode)) {
    for (const auto& pt : enumerate_support(design, ex->limit))
      acc.add(pt.probability, pt.z, oracle.evaluate(pt.z), oracle.unit_effects(pt.z));
    auto v = acc.finish();
    v.exact = true;
    v.reps = 0;
    return v;
  }
  const auto& mc = std::get<MonteCarlo>(mode);
  if (mc.reps < 2) throw InvalidArgument("monte carlo mode needs at least 2 draws");
  Stream rng(mc.seed);
  AssignmentVector z(n);
  for (long r = 0; r < mc.reps; ++r) {
    sample_into(design, rng, z);
    acc.add(1.0, z, oracle.evaluate(z), oracle.unit_effects(z));
  }
  auto v = acc.finish();
  const double reps = static_cast<double>(mc.reps);
  const double var = (acc.ate_sq / reps - v.eate * v.eate) * reps / (reps - 1.0);
  v.eate_se = std::sqrt(std::max(var, 0.0) / reps);
  v.exact = false;
  v.reps = mc.reps;
  return v;
}

double eate(const PotentialOutcomeOracle& oracle, const Design& design, const EstimandMode& mode) {
  return estimands(oracle, design, mode).eate;
}

double adse(const PotentialOutcomeOracle& oracle, const Design& design, const EstimandMode& mode) {
  return estimands(oracle, design, mode).adse;
}

double tau_msq(const PotentialOutcomeOracle& oracle, const Design& design, const EstimandMode& mode) {
  return estimands(oracle, design, mode).tau_msq;
}

// ---------------------------------------------------------------------------

namespace {

const Bernoulli& require_bernoulli(const Design& design, Index n, double limit) {
  const auto* b = std::get_if<Bernoulli>(&design.variant());
  if (!b) throw InvalidArgument("spillover terms are defined for Bernoulli designs");
  if (design.size() != n) throw DimensionMismatch("oracle and design sizes differ");
  if (support_size(design) > limit) throw SupportTooLarge(support_size(design), limit);
  return *b;
}

struct BernoulliTerms {
  const detail::CubeTable& cube;
  const Eigen::VectorXd& p;
  std::vector<double> mass;

  BernoulliTerms(const detail::CubeTable& c, const Eigen::VectorXd& pp) : cube(c), p(pp) {
    mass.resize(cube.count());
    for (std::uint64_t m = 0; m < cube.count(); ++m) mass[m] = detail::bernoulli_mass(m, p);
  }

  double xi(Index i, Index j, bool a) const {
    double s = 0.0;
    for (std::uint64_t m = 0; m < cube.count(); ++m) {
      const auto base = detail::with_bit(m, i, a);
      s += mass[m] * (cube.y(detail::with_bit(base, j, true), i) -
                      cube.y(detail::with_bit(base, j, false), i));
    }
    return s;
  }

  double cond_mean(Index i, bool a) const {
    double s = 0.0;
    for (std::uint64_t m = 0; m < cube.count(); ++m)
      if ((((m >> i) & 1u) != 0) == a) s += mass[m] * cube.y(m, i);
    return s / (a ? p[i] : 1.0 - p[i]);
  }

  double y_breve(Index i) const {
    return (1.0 - p[i]) * cond_mean(i, true) + p[i] * cond_mean(i, false);
  }

  double cond_cov(Index i, Index j, bool a, bool b) const {
    const double w = (a ? p[i] : 1.0 - p[i]) * (b ? p[j] : 1.0 - p[j]);
    double ei = 0.0, ej = 0.0, eij = 0.0;
    for (std::uint64_t m = 0; m < cube.count(); ++m) {
      if ((((m >> i) & 1u) != 0) != a || (((m >> j) & 1u) != 0) != b) continue;
      const double q = mass[m] / w;
      const double yi = cube.y(m, i), yj = cube.y(m, j);
      ei += q * yi;
      ej += q * yj;
      eij += q * yi * yj;
    }
    return eij - ei * ej;
  }
};

}  // namespace

SpilloverTerms spillover_terms(const PotentialOutcomeOracle& oracle, const Design& design, Index i,
                               Index j, double limit) {
  const Index n = oracle.size();
  const auto& b = require_bernoulli(design, n, limit);
  if (i < 0 || i >= n) throw IndexOutOfRange(static_cast<std::size_t>(i), n);
  if (j < 0 || j >= n) throw IndexOutOfRange(static_cast<std::size_t>(j), n);
  detail::CubeTable cube(oracle);
  BernoulliTerms t(cube, b.p);
  SpilloverTerms s;
  s.xi1 = t.xi(i, j, true);
  s.xi0 = t.xi(i, j, false);
  s.xi_breve = (1.0 - b.p[i]) * s.xi1 + b.p[i] * s.xi0;
  s.y_breve = t.y_breve(i);
  return s;
}

VarianceDecomposition variance_limit_decomposition(const PotentialOutcomeOracle& oracle,
                                                   const Design& design, double limit) {
  const Index n = oracle.size();
  const auto& b = require_bernoulli(design, n, limit);
  detail::CubeTable cube(oracle);
  BernoulliTerms t(cube, b.p);

  const auto graph = oracle.declared_graph() ? *oracle.declared_graph() : detect_interference(oracle, 24);
  VarianceDecomposition d;
  d.d_avg = dependence_matrix(graph).average();

  double msq = 0.0;
  for (Index i = 0; i < n; ++i) {
    double e = 0.0;
    for (std::uint64_t m = 0; m < cube.count(); ++m)
      e += t.mass[m] * (cube.y(detail::with_bit(m, i, true), i) - cube.y(detail::with_bit(m, i, false), i));
    msq += e * e;
  }
  d.tau_msq = msq / static_cast<double>(n);

  Eigen::MatrixXd xi1(n, n), xi0(n, n);
  Eigen::VectorXd yb(n);
  for (Index i = 0; i < n; ++i) {
    yb[i] = t.y_breve(i);
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      xi1(i, j) = t.xi(i, j, true);
      xi0(i, j) = t.xi(i, j, false);
    }
  }
  double b1 = 0.0, b2 = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double xb_ij = (1.0 - b.p[i]) * xi1(i, j) + b.p[i] * xi0(i, j);
      const double xb_ji = (1.0 - b.p[j]) * xi1(j, i) + b.p[j] * xi0(j, i);
      b1 += xb_ij * xb_ji + 2.0 * yb[j] * (xi1(i, j) - xi0(i, j));
      for (int a = 0; a <= 1; ++a)
        for (int c = 0; c <= 1; ++c)
          b2 += ((a + c) % 2 == 0 ? 1.0 : -1.0) * t.cond_cov(i, j, a == 1, c == 1);
    }
  const double scale = static_cast<double>(n) * d.d_avg;
  d.b1 = b1 / scale;
  d.b2 = b2 / scale;
  return d;
}

}  // namespace eate
