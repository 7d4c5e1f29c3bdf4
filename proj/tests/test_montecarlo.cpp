#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eate/montecarlo.hpp"

using namespace eate;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.kind = DgpKind::Group;
  c.a_rules = {parse_a_rule("1"), parse_a_rule("0.25*n")};
  c.designs = {DesignChoice::Bernoulli, DesignChoice::Complete, DesignChoice::Paired};
  c.n_grid = {8, 20};
  c.reps = 60;
  c.seed = 5;
  c.variance_kinds = {InflationKind::None, InflationKind::Avg, InflationKind::Max, InflationKind::SpectralRadius};
  return c;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("a_n rules") {
  CHECK(parse_a_rule("1")(1000) == 1.0);
  CHECK(parse_a_rule("25")(1000) == 25.0);
  CHECK(parse_a_rule("25")(10) == 10.0);
  CHECK(parse_a_rule("8*n^0.25")(10000) == doctest::Approx(80.0));
  CHECK(parse_a_rule("2.5^0.5*n^0.25")(10000) == doctest::Approx(std::sqrt(2.5) * 10.0));
  CHECK(parse_a_rule("0.25*n")(400) == doctest::Approx(100.0));
  CHECK(parse_a_rule("n")(64) == 64.0);
  CHECK(parse_a_rule("n^0.5")(64) == doctest::Approx(8.0));
  CHECK(parse_a_rule("0.01")(50) == 1.0);
  CHECK(parse_a_rule("3*n")(50) == 50.0);
  CHECK(parse_a_rule("8*n^0.25").label == "8*n^0.25");
  for (const char* bad : {"", "x", "2*m", "n^", "*n", "-1"}) CHECK_THROWS(parse_a_rule(bad));
}

TEST_CASE("grids") {
  CHECK(round_even(133.35) == 134);
  CHECK(round_even(100.0) == 100);
  const auto g = log_grid(2, 3, 8);
  REQUIRE(g.size() == 9);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const double v = std::pow(10.0, 2.0 + x / 8.0);
    CHECK(g[x] % 2 == 0);
    CHECK(std::abs(static_cast<double>(g[x]) - v) <= 1.0);
  }
  CHECK(g.front() == 100);
  CHECK(g.back() == 1000);
  CHECK(log_grid(2, 5, 8).size() == 25);
}

TEST_CASE("designs for cells") {
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, 1, 0);
  CHECK(build_design(DesignChoice::Complete, 6, x).kind() == DesignKind::Complete);
  const auto p = build_design(DesignChoice::Paired, 6, x);
  REQUIRE(p.kind() == DesignKind::Paired);
  CHECK(std::get<Paired>(p.variant()).partner == std::vector<Index>{1, 0, 3, 2, 5, 4});
  CHECK(parse_design_choice("paired") == DesignChoice::Paired);
  CHECK_THROWS(parse_design_choice("cluster"));
}

TEST_CASE("config parsing") {
  const std::string ok = R"({
  "schema": 1,
  "dgp": {"kind": "random", "a_rules": ["1", "5"], "weighted": true},
  "designs": ["bernoulli", "complete"],
  "n_grid": {"from_exp": 2, "to_exp": 3, "per_decade": 2},
  "reps": 10,
  "seed": 9,
  "estimators": ["hajek"],
  "variance_kinds": ["ber", "sr"]
})";
  const auto c = parse_sim_config(ok);
  CHECK(c.kind == DgpKind::RandomWeighted);
  CHECK(c.a_rules.size() == 2);
  CHECK(c.n_grid == std::vector<Index>{100, 316, 1000});
  CHECK(c.estimators == std::vector<EstimatorKind>{EstimatorKind::Hajek});
  CHECK(c.variance_kinds.size() == 2);
  CHECK(c.reps == 10);

  auto line_of_error = [](const std::string& text) -> std::size_t {
    try {
      parse_sim_config(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 999;
  };
  CHECK(line_of_error("{\n \"schema\": 1,\n \"dgp\": {\"kind\": \"group\"},\n \"bogus\": 3\n}") == 4);
  CHECK(line_of_error("{\n \"schema\": 1,\n \"dgp\": {\"kind\": \"group\",\n  \"extra\": 1}\n}") == 4);
  CHECK(line_of_error("{\n \"schema\": 1,\n \"dgp\": {\"kind\": \"blob\"}\n}") == 3);
  CHECK(line_of_error("{\n \"schema\": 1,\n \"dgp\": {\"kind\": \"group\"},\n\n \"reps\": \"many\"\n}") == 5);
  CHECK(line_of_error("{\n \"schema\": 2,\n \"dgp\": {\"kind\": \"group\"}\n}") == 2);
  CHECK(line_of_error("{\n \"schema\": 1,\n \"dgp\": {\"kind\": \"group\"},\n \"reps\": 3,,\n}") == 4);
  CHECK_THROWS_AS(parse_sim_config(R"({"schema": 1, "dgp": {"kind": "group"}, "n_grid": [7]})"), ParseError);
  CHECK_THROWS_AS(parse_sim_config(R"({"schema": 1, "dgp": {"kind": "group"}, "alpha": 1.5})"), ParseError);
  CHECK_THROWS_AS(parse_sim_config(R"({"schema": 1, "dgp": {"kind": "group", "weighted": true}})"), ParseError);
  CHECK_THROWS_AS(parse_sim_config(R"({"dgp": {"kind": "group"}})"), ParseError);
}

TEST_CASE("cell expansion") {
  const auto c = small_config();
  const auto cells = expand_cells(c);
  REQUIRE(cells.size() == 12);
  CHECK(cells[0].label == "dgp=group;a=1;design=bernoulli;n=8");
  CHECK(cells[0].label == cell_label(DgpKind::Group, "1", DesignChoice::Bernoulli, 8));
  CHECK(cells[1].n == 20);
  CHECK(cells[2].design == DesignChoice::Complete);
  CHECK(cells[6].a_n == doctest::Approx(2.0));
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = i + 1; j < cells.size(); ++j) CHECK(cells[i].id != cells[j].id);

  SimConfig adv;
  adv.kind = DgpKind::Adversarial;
  adv.lambda = 0.25;
  adv.n_grid = {10, 40};
  const auto a = expand_cells(adv);
  REQUIRE(a.size() == 2);
  CHECK(a[0].a_rule == "lambda=0.25");
  CHECK(a[1].a_n == 20.0);
}

TEST_CASE("summary statistics") {
  SimConfig c;
  c.estimators = {EstimatorKind::HT};
  c.n_grid = {10};
  c.reps = 2;
  ExperimentResult r;
  r.cells = expand_cells(c);
  r.records = {{0, 0, {0.0}, 0.5, {}, 1.0}, {0, 1, {2.0}, 0.5, {}, 1.0}};
  r.baseline_rmse = {2.0};
  const auto rows = summarize(c, r);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].bias == 0.0);
  CHECK(rows[0].sd == doctest::Approx(1.0));
  CHECK(rows[0].rmse == doctest::Approx(1.0));
  CHECK(rows[0].rmse_norm == doctest::Approx(0.5));
  CHECK(std::isnan(rows[0].cov_sr));
  CHECK(rows[0].reps == 2);

  c.variance_kinds = {InflationKind::None};
  c.alpha = 0.5;
  // half width sqrt(0.5 / 0.5) = 1, so both intervals reach the reference
  r.records[0].variances = {0.5};
  r.records[1].variances = {0.5};
  CHECK(summarize(c, r)[0].cov_ber == 1.0);
  r.records[1].estimates = {2.5};
  CHECK(summarize(c, r)[0].cov_ber == 0.5);
}

TEST_CASE("simulation runs are reproducible and internally consistent") {
  const auto c = small_config();
  const auto one = run_experiment(c, 1);
  const auto many = run_experiment(c, 8);
  REQUIRE(one.records.size() == many.records.size());
  REQUIRE(one.records.size() == 12u * 60u);
  for (std::size_t k = 0; k < one.records.size(); ++k) {
    CHECK(one.records[k].cell == many.records[k].cell);
    CHECK(one.records[k].rep == many.records[k].rep);
    for (std::size_t e = 0; e < one.records[k].estimates.size(); ++e)
      CHECK(same(one.records[k].estimates[e], many.records[k].estimates[e]));
    CHECK(one.records[k].v_ber == many.records[k].v_ber);
  }
  CHECK(one.baseline_rmse == many.baseline_rmse);

  // one cell on its own replays the same draws
  const auto cells = expand_cells(c);
  const auto solo = run_cell(c, cells[5], 5, 3);
  for (long r = 0; r < c.reps; ++r) CHECK(solo[r].estimates == one.records[5 * c.reps + r].estimates);

  const auto rows = summarize(c, one);
  CHECK(rows.size() == 24);
  for (const auto& row : rows) {
    CHECK(row.rmse * row.rmse == doctest::Approx(row.bias * row.bias + row.sd * row.sd).epsilon(1e-9));
    CHECK(row.cov_ber <= row.cov_avg);
    CHECK(row.cov_avg <= row.cov_sr);
    CHECK(row.cov_sr <= row.cov_max);
  }
  // no interference: HT and Hajek coincide under complete randomization
  for (std::size_t k = 0; k < rows.size(); k += 2)
    if (rows[k].design == "complete") CHECK(rows[k].rmse == doctest::Approx(rows[k + 1].rmse));

  // variances are ordered like their factors
  for (const auto& rec : one.records) {
    CHECK(rec.variances[0] == rec.v_ber);
    CHECK(rec.variances[1] <= rec.variances[3] + 1e-12);
    CHECK(rec.variances[3] <= rec.variances[2] + 1e-12);
  }

  SimConfig other = c;
  other.seed = 6;
  CHECK(run_experiment(other).records[0].estimates != one.records[0].estimates);
}

TEST_CASE("empty arms give NaN for Hajek only") {
  SimConfig c;
  c.n_grid = {2};
  c.reps = 200;
  const auto r = run_experiment(c);
  int nan = 0;
  for (const auto& rec : r.records)
    if (rec.cell == 0) {
      CHECK_FALSE(std::isnan(rec.estimates[0]));
      nan += std::isnan(rec.estimates[1]);
    }
  CHECK(nan > 50);
  CHECK(nan < 150);
}

TEST_CASE("output tables") {
  SimConfig c;
  c.n_grid = {10};
  c.reps = 5;
  c.variance_kinds = {InflationKind::Avg};
  const auto r = run_experiment(c);
  std::ostringstream s, rec;
  write_summary(s, summarize(c, r));
  std::string header;
  std::istringstream in(s.str());
  std::getline(in, header);
  CHECK(header == "dgp,design,n,a_rule,estimator,bias,sd,rmse,rmse_norm,cov_ber,cov_avg,cov_max,cov_sr,reps");
  write_records(rec, c, r);
  std::istringstream rin(rec.str());
  std::getline(rin, header);
  CHECK(header == "dgp,design,n,a_rule,rep,ht,hajek,v_ber,v_avg,eate_reference");
  int lines = 0;
  for (std::string l; std::getline(rin, l);) ++lines;
  CHECK(lines == 5);
}

TEST_CASE("log-log slope") {
  std::vector<double> x{10, 100, 1000, 1e4}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5));
  CHECK_THROWS(loglog_slope({1.0}, {1.0}));
}
