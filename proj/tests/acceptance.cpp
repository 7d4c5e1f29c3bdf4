// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "eate/distance.hpp"
#include "eate/dgp.hpp"
#include "eate/estimators.hpp"
#include "eate/metrics.hpp"
#include "eate/mixing.hpp"
#include "eate/montecarlo.hpp"
#include "eate/variance.hpp"
#include "fixtures.hpp"

using namespace eate;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(const char* f, double a) {
  char b[128];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

std::vector<Design> balanced_designs(Index n, const Eigen::VectorXd& x) {
  return {Design::bernoulli(n, 0.5), Design::complete(n, n / 2), Design::paired(adjacent_pairs(x))};
}

// max_i,z |tau_i(z)|
double k_tau(const PotentialOutcomeOracle& o) {
  const Index n = o.size();
  double k = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
    k = std::max(k, o.unit_effects(AssignmentVector::from_mask(n, m)).cwiseAbs().maxCoeff());
  return k;
}

InterferenceGraph random_graph(Index n, double p, Stream& rng) {
  std::vector<std::pair<Index, Index>> e;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && rng.bernoulli(p)) e.emplace_back(i, j);
  return InterferenceGraph::from_edges(n, e);
}

// ---------------------------------------------------------------------------

Outcome estimand_ground_truth() {
  const Index n = 200;
  const std::pair<DgpKind, double> dgps[] = {
      {DgpKind::Group, 25.0}, {DgpKind::Random, 5.0}, {DgpKind::RandomWeighted, 5.0}, {DgpKind::OneUnit, 69.0}};
  double worst = 0;
  for (const auto& [kind, a] : dgps) {
    const auto inst = make_dgp({kind, n, a, 2024});
    for (const auto& d : balanced_designs(n, inst.x)) {
      const auto v = estimands(*inst.oracle, d, MonteCarlo{200000, 17});
      worst = std::max(worst, std::abs(v.eate - 1.0) / v.eate_se);
    }
  }
  return {worst <= 4.0, "max |eate - 1| / se = " + fmt("%.2f", worst)};
}

Outcome exact_identities() {
  double worst_adse = 0, worst_eate = 0;
  std::vector<std::shared_ptr<const PotentialOutcomeOracle>> oracles;
  for (std::uint64_t s : {1u, 2u, 3u}) oracles.push_back(fixtures::random_linear(8, s));
  for (auto kind : {DgpKind::Group, DgpKind::Random, DgpKind::RandomWeighted, DgpKind::OneUnit})
    oracles.push_back(make_dgp({kind, 10, 4.0, 5}).oracle);
  for (const auto& o : oracles) {
    const Index n = o->size();
    std::vector<Design> designs = balanced_designs(n, Eigen::VectorXd::LinSpaced(n, 0, 1));
    designs.push_back(Design::bernoulli(Eigen::VectorXd::LinSpaced(n, 0.2, 0.7)));
    designs.push_back(Design::complete(n, 3));
    for (const auto& d : designs) {
      const auto p = marginal_probs(d);
      double mean = 0;
      for (const auto& pt : enumerate_support(d)) mean += pt.probability * ht_estimate(pt.z, o->evaluate(pt.z), p).point;
      const auto v = estimands(*o, d);
      const double scale = std::max(1.0, std::abs(v.adse));
      worst_adse = std::max(worst_adse, std::abs(mean - v.adse) / scale);
      if (d.kind() == DesignKind::Bernoulli) worst_eate = std::max(worst_eate, std::abs(mean - v.eate) / scale);
    }
  }
  return {worst_adse <= 1e-12 && worst_eate <= 1e-12,
          "max gap to adse " + fmt("%.1e", worst_adse) + ", to eate (Bernoulli) " + fmt("%.1e", worst_eate)};
}

Outcome estimator_collapse() {
  const Index n = 100;
  const auto inst = make_group_dgp({DgpKind::Group, n, 25.0, 3});
  Stream rng(99);
  long mismatches = 0, draws = 0;
  for (const auto& d : {Design::complete(n, n / 2), Design::paired(adjacent_pairs(inst.x))}) {
    const auto p = marginal_probs(d);
    for (int t = 0; t < 10000; ++t, ++draws) {
      const auto z = sample(d, rng);
      const auto y = inst.oracle->evaluate(z);
      const double a = ht_estimate(z, y, p).point, b = hajek_estimate(z, y, p).point;
      if (std::memcmp(&a, &b, sizeof a) != 0) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(draws) + " draws"};
}

Outcome moment_inequalities() {
  Stream rng(4);
  long bad = 0;
  const double eps = 1e-12;
  for (int t = 0; t < 1000; ++t) {
    const Index n = 2 * (1 + static_cast<Index>(rng.below(32)));
    const auto g = random_graph(n, rng.uniform(0.0, 0.3), rng);
    std::vector<Index> rho(n);
    for (Index i = 0; i < n; i += 2) rho[i] = i + 1, rho[i + 1] = i;
    SummaryOptions opt;
    opt.spectral = false;
    opt.pairing = rho;
    const auto s = summarize_interference(g, opt);
    const double c1 = s.c_moments.at(1.0), c2 = s.c_moments.at(2.0), ci = s.c_moments.at(RegularityConstants::kInfinity);
    const bool ok = std::max(c1, ci * ci / n) <= s.d_avg + eps && s.d_avg <= c2 * c2 + eps && c2 * c2 <= ci * ci + eps &&
                    *s.e_avg <= c2 * c2 + eps;
    bad += !ok;
  }
  return {bad == 0, std::to_string(bad) + " violations on 1000 graphs"};
}

Outcome closed_form_davg() {
  double worst = 0;
  for (double a : {1.0, 2.0, 4.0, 5.0, 10.0, 20.0, 25.0, 50.0, 100.0})
    worst = std::max(worst, std::abs(summarize_interference(make_group_dgp({DgpKind::Group, 100, a, 1}).graph()).d_avg - a));
  for (Index n : {50, 101})
    for (double a : {1.0, 3.5, 7.0, 0.5 * n, static_cast<double>(n)}) {
      const double K = std::floor(a);
      const double got = summarize_interference(make_oneunit_dgp({DgpKind::OneUnit, n, a, 1}).graph()).d_avg;
      worst = std::max(worst, std::abs(got - (1 + K * (K - 1) / n)));
    }
  Stream rng(8);
  const Index n = 60;
  const double a = 5.0;
  double m = 0, m2 = 0;
  const int draws = 2000;
  SummaryOptions opt;
  opt.spectral = false;
  for (int t = 0; t < draws; ++t) {
    const double d =
        summarize_interference(InterferenceGraph::from_interference_sets(random_g_sets(n, a, rng)), opt).d_avg;
    m += d;
    m2 += d * d;
  }
  m /= draws;
  const double se = std::sqrt((m2 / draws - m * m) / draws);
  const double z = std::abs(m - expected_davg_random(n, a)) / se;
  return {worst <= 1e-12 && z <= 4.0, "closed-form gap " + fmt("%.1e", worst) + ", random draws z = " + fmt("%.2f", z)};
}

Outcome variance_decomposition() {
  const auto d = Design::bernoulli(6, 0.5);
  std::vector<std::shared_ptr<const PotentialOutcomeOracle>> cases{
      fixtures::no_interference(6), fixtures::mutual(6, 1.5), make_group_dgp({DgpKind::Group, 6, 3.0, 4}).oracle};
  double worst = 0;
  for (const auto& o : cases) {
    const auto dec = variance_limit_decomposition(*o, d);
    const auto m = variance_moments(*o, d);
    worst = std::max(worst, std::abs(6.0 / dec.d_avg * (m.mean_v_ber - m.var_ht) - dec.limit()));
  }
  const auto none = variance_moments(*cases[0], d);
  const double special = std::abs(none.mean_v_ber - none.var_ht - tau_msq(*cases[0], d) / 6.0);
  return {worst <= 1e-10 && special <= 1e-10,
          "max gap " + fmt("%.1e", worst) + ", no-interference gap " + fmt("%.1e", special)};
}

Outcome conservativeness() {
  long bad = 0, fixtures_checked = 0;
  const auto d = Design::bernoulli(8, 0.5);
  std::vector<DgpInstance> insts;
  for (double a : {2.0, 4.0, 8.0}) insts.push_back(make_group_dgp({DgpKind::Group, 8, a, 6}));
  for (double a : {2.0, 3.0}) insts.push_back(make_random_dgp({DgpKind::Random, 8, a, 6}, false));
  for (double a : {3.0, 5.0}) insts.push_back(make_oneunit_dgp({DgpKind::OneUnit, 8, a, 6}));
  for (const auto& inst : insts) {
    if (tau_msq(*inst.oracle, d) <= 0) continue;
    ++fixtures_checked;
    const auto s = summarize_interference(inst.graph());
    const auto m = variance_moments(*inst.oracle, d);
    bad += inflate(m.mean_v_ber, s, InflationKind::SpectralRadius).value < m.var_ht;
    bad += inflate(m.mean_v_ber, s, InflationKind::Max).value < m.var_ht;
  }
  // y1 = z1 + 3 z2, y2 = z2 + 3 z1
  FunctionOracle anti(2, [](const AssignmentVector& z) {
    return Eigen::Vector2d(z[0] + 3.0 * z[1], z[1] + 3.0 * z[0]).eval();
  });
  const auto am = variance_moments(anti, Design::bernoulli(2, 0.5));
  const bool anti_ok = am.mean_v_ber < am.var_ht;
  return {bad == 0 && anti_ok && fixtures_checked > 0,
          std::to_string(bad) + " violations on " + std::to_string(fixtures_checked) +
              " fixtures; anti-conservative fixture E[V_ber] = " + fmt("%.3f", am.mean_v_ber) +
              " < Var = " + fmt("%.3f", am.var_ht)};
}

Outcome chebyshev_coverage() {
  SimConfig c;
  c.kind = DgpKind::Group;
  c.a_rules = {parse_a_rule("25")};
  c.designs = {DesignChoice::Bernoulli};
  c.n_grid = {1000};
  c.reps = 10000;
  c.seed = 8;
  c.estimators = {EstimatorKind::HT};
  c.variance_kinds = {InflationKind::SpectralRadius};
  c.alpha = 0.05;
  const auto rows = summarize(c, run_experiment(c, workers()));
  const double cov = rows.at(0).cov_sr;
  const double floor = 0.95 - 4.0 * std::sqrt(0.95 * 0.05 / c.reps);
  return {cov >= floor, "coverage " + fmt("%.4f", cov) + " (floor " + fmt("%.4f", floor) + ")"};
}

Outcome figure_b1() {
  const auto cfg = cli::figure_configs("figB1", cli::Scale::Medium, 20240101).at(0);
  const auto rows = summarize(cfg, run_experiment(cfg, workers()));
  const Index upper = 1000;
  std::ostringstream detail;
  bool ok = true;
  for (const char* design : {"bernoulli", "complete", "paired"}) {
    std::vector<double> slope;
    for (const auto& rule : cfg.a_rules) {
      std::vector<double> x, y;
      for (const auto& r : rows)
        if (r.design == design && r.a_rule == rule.label && r.estimator == "hajek" && r.n >= upper) {
          x.push_back(static_cast<double>(r.n));
          y.push_back(r.rmse);
        }
      slope.push_back(loglog_slope(x, y));
    }
    auto in = [](double s, double lo, double hi) { return lo <= s && s <= hi; };
    const double lo = std::max(slope[0], slope[1]);
    ok = ok && in(slope[0], -0.55, -0.45) && in(slope[1], -0.55, -0.45) && in(slope[4], -0.1, 0.1) &&
         lo < slope[2] && slope[2] < slope[4] && lo < slope[3] && slope[3] < slope[4];
    detail << design << " [";
    for (std::size_t k = 0; k < slope.size(); ++k) detail << (k ? " " : "") << fmt("%.3f", slope[k]);
    detail << "] ";
  }
  return {ok, "slopes " + detail.str()};
}

Outcome adversarial() {
  SimConfig c;
  c.kind = DgpKind::Adversarial;
  c.lambda = 0.25;
  c.designs = {DesignChoice::Bernoulli, DesignChoice::Complete, DesignChoice::Paired};
  c.n_grid = {10, 20, 50, 100, 200, 500, 1000};
  c.reps = 200;
  c.estimators = {EstimatorKind::HT};
  const auto r = run_experiment(c, workers());
  // |HT - EATE| / min(p, 1 - p), with EATE = p
  auto ratio = [](double est, double p) { return std::abs(est - p) / std::min(p, 1.0 - p); };
  double worst = INFINITY;
  for (const auto& rec : r.records) worst = std::min(worst, ratio(rec.estimates[0], rec.eate_reference));
  Stream rng(3);
  for (Index n : {10, 100, 1000}) {
    const auto d = Design::bernoulli(n, 0.3);
    const auto inst = make_adversarial_dgp(n, 0.25, d);
    const auto p = marginal_probs(d);
    for (int t = 0; t < 200; ++t) {
      const auto z = sample(d, rng);
      worst = std::min(worst, ratio(ht_estimate(z, inst.oracle->evaluate(z), p).point, 0.3));
    }
  }
  return {worst >= 1.0 - 1e-9, "smallest |HT - EATE| / min(p, 1-p) = " + fmt("%.9f", worst)};
}

Outcome distance_bounds() {
  long bad = 0;
  const std::vector<Design> designs{Design::bernoulli(6, 0.5), Design::bernoulli(6, 0.3), Design::complete(6, 3),
                                    Design::complete(6, 2), Design::paired({1, 0, 3, 2, 5, 4})};
  std::vector<std::shared_ptr<const PotentialOutcomeOracle>> oracles{fixtures::random_linear(6, 1),
                                                                     fixtures::random_linear(6, 2)};
  for (auto kind : {DgpKind::Group, DgpKind::Random, DgpKind::OneUnit}) oracles.push_back(make_dgp({kind, 6, 3.0, 2}).oracle);
  for (const auto& o : oracles) {
    const double k = k_tau(*o);
    const auto g = detect_interference(*o);
    for (std::size_t i = 0; i < designs.size(); ++i)
      for (std::size_t j = i + 1; j < designs.size(); ++j) {
        const double gap = std::abs(eate::eate(*o, designs[i]) - eate::eate(*o, designs[j]));
        for (double r : {1.0, 2.0, 3.0}) {
          const auto b = eate_gap_bounds(DesignDistribution::from_design(designs[i]),
                                         DesignDistribution::from_design(designs[j]), k, g, r);
          bad += gap > b.eate_gap_bound_tv + 1e-12;
          bad += gap > b.eate_gap_bound_wasserstein + 1e-12;
        }
      }
  }
  const double tv = total_variation(DesignDistribution::from_design(Design::bernoulli(4, 0.5)),
                                    DesignDistribution::from_design(Design::complete(4, 2)));
  std::vector<double> ns, ws;
  for (Index n : {4, 6, 8, 10}) {
    ns.push_back(static_cast<double>(n));
    ws.push_back(wasserstein(DesignDistribution::from_design(Design::bernoulli(n, 0.5)),
                             DesignDistribution::from_design(Design::complete(n, n / 2)), 2.0));
  }
  const double slope = loglog_slope(ns, ws);
  const bool ok = bad == 0 && std::abs(tv - 0.625) <= 1e-12 && slope >= 0.15 && slope <= 0.35;
  return {ok, std::to_string(bad) + " bound violations; TV = " + fmt("%.6f", tv) + "; W_2 = " + fmt("%.5f", ws[0]) + " " +
                  fmt("%.5f", ws[1]) + " " + fmt("%.5f", ws[2]) + " " + fmt("%.5f", ws[3]) + ", slope " + fmt("%.4f", slope) +
                  " (required [0.15, 0.35])"};
}

Outcome mixing() {
  double worst = 0;
  Stream rng(12);
  for (Index n : {4, 8, 12}) {
    const auto g = random_graph(n, 0.1, rng);
    const auto b = mixing_coefficients(Design::bernoulli(n, 0.5), g);
    worst = std::max({worst, b.alpha_ext, b.alpha_int});
  }
  long checked = 0;
  for (int t = 0; t < 30; ++t) {
    const Index n = 2 * (2 + static_cast<Index>(rng.below(5)));
    const auto g = random_graph(n, 0.1, rng);
    std::vector<Index> rho(n);
    for (Index i = 0; i < n; i += 2) rho[i] = i + 1, rho[i + 1] = i;
    const auto rep = mixing_coefficients(Design::paired(rho), g);
    const auto pm = pair_metrics(g, rho);
    worst = std::max({worst, std::abs(rep.alpha_int - pm.r_sum / 4.0), std::abs(rep.alpha_ext - pm.e_avg / 4.0)});
    ++checked;
  }
  return {worst <= 1e-12, "max deviation " + fmt("%.1e", worst) + " over Bernoulli and " + std::to_string(checked) +
                              " paired fixtures"};
}

Outcome determinism() {
  SimConfig c;
  c.kind = DgpKind::Random;
  c.a_rules = {parse_a_rule("1"), parse_a_rule("2.5^0.5*n^0.25"), parse_a_rule("0.05*n")};
  c.designs = {DesignChoice::Bernoulli, DesignChoice::Complete, DesignChoice::Paired};
  c.n_grid = {40, 100, 250};
  c.reps = 300;
  c.seed = 13;
  c.variance_kinds = {InflationKind::None, InflationKind::Avg, InflationKind::Max, InflationKind::SpectralRadius};
  auto render = [&](int w) {
    const auto r = run_experiment(c, w);
    std::ostringstream s;
    write_summary(s, summarize(c, r));
    write_records(s, c, r);
    return s.str();
  };
  const auto one = render(1), eight = render(8);
  return {one == eight, std::to_string(one.size()) + " bytes, " + (one == eight ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"estimand ground truth", estimand_ground_truth},
      {"exact unbiasedness identities", exact_identities},
      {"Hajek equals HT on balanced designs", estimator_collapse},
      {"interference moment inequalities", moment_inequalities},
      {"closed-form d_avg", closed_form_davg},
      {"variance decomposition", variance_decomposition},
      {"conservative variance estimators", conservativeness},
      {"Chebyshev coverage", chebyshev_coverage},
      {"group DGP RMSE slopes", figure_b1},
      {"non-consistency construction", adversarial},
      {"distance bounds", distance_bounds},
      {"mixing coefficients", mixing},
      {"determinism across workers", determinism},
  };
  int failed = 0, k = 0;
  for (const auto& [name, fn] : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", k - failed, k);
  return failed == 0 ? 0 : 1;
}
