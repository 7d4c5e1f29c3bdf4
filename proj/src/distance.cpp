#include "eate/distance.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "eate/kahan.hpp"
#include "eate/metrics.hpp"
#include "eate/transport.hpp"

namespace eate {

DesignDistribution::DesignDistribution(std::vector<AssignmentVector> support,
                                       std::vector<double> probs) {
  if (support.empty()) throw InvalidArgument("distribution needs support points");
  if (support.size() != probs.size()) throw DimensionMismatch("support and probabilities differ in length");
  n_ = support.front().size();
  double total = 0.0;
  std::unordered_set<std::string> keys;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k].size() != n_) throw DimensionMismatch("support points differ in length");
    if (!(probs[k] >= 0.0)) throw InvalidArgument("probabilities must be nonnegative");
    if (!keys.insert(support[k].key()).second) throw InvalidArgument("support points must be distinct");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("probabilities must sum to 1");
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double p = probs[k] / total;
    if (p < 1e-15) continue;
    support_.push_back(std::move(support[k]));
    probs_.push_back(p);
  }
}

DesignDistribution DesignDistribution::from_design(const Design& design, double limit) {
  auto pts = enumerate_support(design, limit);
  std::vector<AssignmentVector> s;
  std::vector<double> p;
  s.reserve(pts.size());
  p.reserve(pts.size());
  for (auto& pt : pts) {
    s.push_back(std::move(pt.z));
    p.push_back(pt.probability);
  }
  return DesignDistribution(std::move(s), std::move(p));
}

namespace {

// Union support: (p, q) per distinct point.
std::vector<std::pair<double, double>> align(const DesignDistribution& P, const DesignDistribution& Q) {
  if (P.dimension() != Q.dimension()) throw DimensionMismatch("distributions live on different n");
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < P.size(); ++k) {
    index.emplace(P.support()[k].key(), out.size());
    out.emplace_back(P.probs()[k], 0.0);
  }
  for (std::size_t k = 0; k < Q.size(); ++k) {
    auto [it, fresh] = index.emplace(Q.support()[k].key(), out.size());
    if (fresh)
      out.emplace_back(0.0, Q.probs()[k]);
    else
      out[it->second].second = Q.probs()[k];
  }
  return out;
}

}  // namespace

double total_variation(const DesignDistribution& P, const DesignDistribution& Q) {
  CompensatedSum s;
  for (auto [p, q] : align(P, Q)) s += std::abs(p - q);
  return 0.5 * s.value();
}

double total_variation_sup(const DesignDistribution& P, const DesignDistribution& Q, int max_points) {
  const auto u = align(P, Q);
  if (u.size() > static_cast<std::size_t>(max_points))
    throw SupportTooLarge(static_cast<double>(u.size()), max_points);
  double best = 0.0;
  const std::uint64_t count = std::uint64_t{1} << u.size();
  for (std::uint64_t a = 0; a < count; ++a) {
    double pa = 0.0, qa = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
      if ((a >> k) & 1u) {
        pa += u[k].first;
        qa += u[k].second;
      }
    best = std::max(best, std::abs(pa - qa));
  }
  return best;
}

double assignment_distance(const AssignmentVector& a, const AssignmentVector& b, double r) {
  if (a.size() != b.size()) throw DimensionMismatch("assignments differ in length");
  if (!(r >= 1.0)) throw InvalidArgument("order r must be at least 1");
  const double h = static_cast<double>((a.bits() != b.bits()).count());
  if (std::isinf(r)) return h > 0.0 ? 1.0 : 0.0;
  return std::pow(h, 1.0 / r);
}

double wasserstein(const DesignDistribution& P, const DesignDistribution& Q, double r,
                   double max_entries) {
  if (P.dimension() != Q.dimension()) throw DimensionMismatch("distributions live on different n");
  const double entries = static_cast<double>(P.size()) * static_cast<double>(Q.size());
  if (entries > max_entries)
    throw ProblemTooLarge("transport problem has " + std::to_string(static_cast<long long>(entries)) +
                          " cost entries");
  Eigen::MatrixXd cost(static_cast<Index>(P.size()), static_cast<Index>(Q.size()));
  for (std::size_t a = 0; a < P.size(); ++a)
    for (std::size_t b = 0; b < Q.size(); ++b)
      cost(static_cast<Index>(a), static_cast<Index>(b)) = assignment_distance(P.support()[a], Q.support()[b], r);
  const Eigen::VectorXd sp = Eigen::Map<const Eigen::VectorXd>(P.probs().data(), static_cast<Index>(P.size()));
  Eigen::VectorXd sq = Eigen::Map<const Eigen::VectorXd>(Q.probs().data(), static_cast<Index>(Q.size()));
  sq *= sp.sum() / sq.sum();
  return std::max(0.0, solve_transport(sp, sq, cost).cost);
}

double lipschitz_bound(const InterferenceGraph& graph, double r, double k_tau) {
  if (!(r >= 1.0)) throw InvalidArgument("order r must be at least 1");
  const double n = static_cast<double>(graph.size());
  const double c = r == 1.0 ? c_moment(graph, RegularityConstants::kInfinity)
                            : c_moment(graph, std::isinf(r) ? 1.0 : r / (r - 1.0));
  const double scale = std::isinf(r) ? 1.0 : std::pow(n, -1.0 / r);
  return 2.0 * k_tau * scale * c;
}

DistanceReport eate_gap_bounds(const DesignDistribution& P, const DesignDistribution& Q,
                               double k_tau, const InterferenceGraph& graph, double r) {
  if (!(k_tau >= 0.0)) throw InvalidArgument("k_tau must be nonnegative");
  if (graph.size() != P.dimension()) throw DimensionMismatch("graph and designs differ in n");
  DistanceReport rep;
  rep.k_tau = k_tau;
  rep.r = r;
  rep.tv = total_variation(P, Q);
  rep.w_r = wasserstein(P, Q, r);
  rep.eate_gap_bound_tv = 2.0 * k_tau * rep.tv;
  rep.eate_gap_bound_wasserstein = lipschitz_bound(graph, r, k_tau) * rep.w_r;
  return rep;
}

double lipschitz_check(const PotentialOutcomeOracle& oracle, double r, long trials, Stream& rng) {
  const Index n = oracle.size();
  double worst = 0.0;
  AssignmentVector a(n), b(n);
  for (long t = 0; t < trials; ++t) {
    for (Index i = 0; i < n; ++i) {
      a.set(i, rng.bernoulli(0.5));
      b.set(i, rng.bernoulli(0.5));
    }
    const double d = assignment_distance(a, b, r);
    if (d == 0.0) continue;
    worst = std::max(worst, std::abs(assignment_ate(oracle, a) - assignment_ate(oracle, b)) / d);
  }
  return worst;
}

}  // namespace eate
