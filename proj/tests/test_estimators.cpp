#include <doctest.h>

#include <cstring>

#include "eate/dgp.hpp"
#include "eate/estimators.hpp"
#include "eate/metrics.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace eate;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("HT arithmetic") {
  const auto r = ht_estimate(AssignmentVector{1, 0}, Eigen::Vector2d(3, 1), Eigen::Vector2d(0.5, 0.5));
  CHECK(r.point == 2.0);
  CHECK(r.arm_mean_treated == 3.0);
  CHECK(r.arm_mean_control == 1.0);
  CHECK(ht_estimate(AssignmentVector{1, 0, 1}, Eigen::Vector3d::Zero(), Eigen::Vector3d::Constant(0.3)).point == 0.0);
  // an empty arm contributes zero
  CHECK(ht_estimate(AssignmentVector{1, 1}, Eigen::Vector2d(1, 3), Eigen::Vector2d(0.5, 0.5)).point == 4.0);
}

TEST_CASE("Hajek arithmetic") {
  const auto r = hajek_estimate(AssignmentVector{1, 1, 0, 0}, Eigen::Vector4d(2, 4, 1, 3), Eigen::Vector4d::Constant(0.5));
  CHECK(r.point == doctest::Approx(1.0));
  CHECK(r.weight_sum_treated == 4.0);
  CHECK_THROWS_AS(hajek_estimate(AssignmentVector{1, 1}, Eigen::Vector2d(1, 3), Eigen::Vector2d(0.5, 0.5)),
                  DegenerateAssignment);
}

TEST_CASE("Hajek equals HT bit for bit on balanced designs") {
  Stream rng(17);
  for (Index n : {2, 10, 50, 400}) {
    const auto c = Design::complete(n, n / 2);
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(); });
    const auto pr = Design::paired(adjacent_pairs(x));
    for (const Design* d : {&c, &pr}) {
      const auto p = marginal_probs(*d);
      for (int t = 0; t < 200; ++t) {
        const auto z = sample(*d, rng);
        Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(-5, 20); });
        CHECK(same_bits(ht_estimate(z, y, p).point, hajek_estimate(z, y, p).point));
      }
    }
  }
}

TEST_CASE("scale equivariance") {
  Stream rng(3);
  const Index n = 20;
  const auto z = sample(Design::bernoulli(n, 0.4), rng);
  Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(); });
  Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 0.4);
  for (double c : {-2.0, 0.5, 8.0}) {
    CHECK(ht_estimate(z, c * y, p).point == doctest::Approx(c * ht_estimate(z, y, p).point));
    CHECK(hajek_estimate(z, c * y, p).point == doctest::Approx(c * hajek_estimate(z, y, p).point));
  }
}

TEST_CASE("exact estimands match direct enumeration") {
  const std::vector<Index> rho{1, 0, 3, 2, 5, 4};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto o = fixtures::random_linear(6, seed);
    const std::pair<Design, std::vector<oracle::Point>> cases[] = {
        {Design::bernoulli(6, 0.5), oracle::bernoulli(6, 0.5)},
        {Design::bernoulli(Eigen::VectorXd::LinSpaced(6, 0.2, 0.7)), oracle::bernoulli(6, {0.2, 0.3, 0.4, 0.5, 0.6, 0.7})},
        {Design::complete(6, 2), oracle::complete(6, 2)},
        {Design::paired(rho), oracle::paired(rho)},
    };
    for (const auto& [d, pts] : cases) {
      const auto v = estimands(*o, d);
      CHECK(v.exact);
      CHECK(v.eate == doctest::Approx(oracle::eate(*o, pts)).epsilon(1e-13));
      CHECK(v.adse == doctest::Approx(oracle::adse(*o, pts)).epsilon(1e-13));
      CHECK(v.tau_msq == doctest::Approx(oracle::tau_msq(*o, pts)).epsilon(1e-13));
      // HT is unbiased for ADSE on every design
      CHECK(oracle::moments(*o, pts).mean_ht == doctest::Approx(v.adse).epsilon(1e-12));
      if (d.kind() == DesignKind::Bernoulli) CHECK(v.adse == doctest::Approx(v.eate).epsilon(1e-13));
    }
  }
}

TEST_CASE("estimand special cases") {
  FunctionOracle c(4, [](const AssignmentVector& z) { return Eigen::VectorXd(3.0 * z.as_vector()); });
  CHECK(eate::eate(c, Design::complete(4, 1)) == doctest::Approx(3.0));
  CHECK(tau_msq(c, Design::paired({1, 0, 3, 2})) == doctest::Approx(9.0));
  FunctionOracle zero(3, [](const AssignmentVector&) { return Eigen::VectorXd::Zero(3).eval(); });
  CHECK(tau_msq(zero, Design::bernoulli(3, 0.5)) == 0.0);

  FunctionOracle total(6, [](const AssignmentVector& z) {
    return Eigen::VectorXd::Constant(6, static_cast<double>(z.treated_count())).eval();
  });
  CHECK(eate::eate(total, Design::complete(6, 3)) == doctest::Approx(1.0));
  // every draw has three treated units, so HT is constant at zero
  for (const auto& pt : enumerate_support(Design::complete(6, 3)))
    CHECK(ht_estimate(pt.z, total.evaluate(pt.z), Eigen::VectorXd::Constant(6, 0.5)).point == doctest::Approx(0.0));

  // zero unit effects, pure spillover, negatively dependent treatments
  FunctionOracle swap(2, [](const AssignmentVector& z) { return Eigen::Vector2d(z[1], z[0]).eval(); });
  const auto v = estimands(swap, Design::complete(2, 1));
  CHECK(v.eate == 0.0);
  CHECK(v.adse == doctest::Approx(-1.0));
}

TEST_CASE("adversarial construction at n = 8") {
  const auto d = Design::bernoulli(8, 0.5);
  const auto inst = make_adversarial_dgp(8, 0.25, d);
  const auto v = estimands(*inst.oracle, d);
  const auto pts = oracle::bernoulli(8, 0.5);
  CHECK(v.eate == doctest::Approx(oracle::eate(*inst.oracle, pts)));
  CHECK(v.adse == doctest::Approx(oracle::adse(*inst.oracle, pts)));
  CHECK(v.eate == doctest::Approx(0.5));
  for (const auto& pt : enumerate_support(d)) {
    const double est = ht_estimate(pt.z, inst.oracle->evaluate(pt.z), marginal_probs(d)).point;
    CHECK(std::abs(est - v.eate) >= 0.5 - 1e-12);
  }
}

TEST_CASE("Monte Carlo estimands agree with exact values") {
  const auto o = fixtures::random_linear(8, 5);
  const auto d = Design::complete(8, 4);
  const auto exact = estimands(*o, d);
  const auto mc = estimands(*o, d, MonteCarlo{20000, 99});
  CHECK_FALSE(mc.exact);
  CHECK(mc.eate_se > 0.0);
  CHECK(std::abs(mc.eate - exact.eate) < 4 * mc.eate_se);
  const auto again = estimands(*o, d, MonteCarlo{20000, 99});
  CHECK(again.eate == mc.eate);
}

TEST_CASE("spillover terms") {
  const auto d = Design::bernoulli(4, 0.5);
  const auto none = fixtures::no_interference(4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      if (i != j) {
        const auto s = spillover_terms(*none, d, i, j);
        CHECK(s.xi1 == 0.0);
        CHECK(s.xi0 == 0.0);
      }
  FunctionOracle follow(3, [](const AssignmentVector& z) { return Eigen::Vector3d(z[2], 0, 0).eval(); });
  const auto s = spillover_terms(follow, Design::bernoulli(3, 0.5), 0, 2);
  CHECK(s.xi1 == doctest::Approx(1.0));
  CHECK(s.xi0 == doctest::Approx(1.0));
  CHECK_THROWS(spillover_terms(follow, Design::complete(3, 1), 0, 2));
}

TEST_CASE("variance decomposition identity") {
  const auto d = Design::bernoulli(6, 0.5);
  const auto pts = oracle::bernoulli(6, 0.5);
  auto grp = make_group_dgp({DgpKind::Group, 6, 3.0, 4});
  std::vector<std::shared_ptr<const PotentialOutcomeOracle>> cases{
      fixtures::no_interference(6), fixtures::mutual(6, 1.5), grp.oracle, fixtures::random_linear(6, 8)};
  for (const auto& o : cases) {
    const auto dec = variance_limit_decomposition(*o, d);
    const auto m = oracle::moments(*o, pts);
    const double lhs = 6.0 / dec.d_avg * (m.mean_vber - m.var_ht);
    CHECK(lhs == doctest::Approx(dec.limit()).epsilon(1e-10));
    CHECK(dec.d_avg == doctest::Approx(oracle::d_avg(oracle::detect(*o))));
  }
  const auto none = variance_limit_decomposition(*fixtures::no_interference(6), d);
  CHECK(none.b1 == 0.0);
  CHECK(none.b2 == 0.0);
  const auto m = oracle::moments(*fixtures::no_interference(6), pts);
  CHECK(m.mean_vber - m.var_ht == doctest::Approx(none.tau_msq / 6));
}
