#include "eate/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "eate/io.hpp"
#include "eate/kahan.hpp"

namespace eate {

std::string cell_label(DgpKind kind, const std::string& a_rule, DesignChoice design, Index n) {
  return std::string("dgp=") + dgp_name(kind) + ";a=" + a_rule + ";design=" + design_choice_name(design) +
         ";n=" + std::to_string(n);
}

std::vector<CellSpec> expand_cells(const SimConfig& config) {
  config.validate();
  std::vector<CellSpec> cells;
  if (config.kind == DgpKind::Adversarial) {
    const std::string rule = "lambda=" + format_real(config.lambda);
    for (DesignChoice d : config.designs)
      for (Index n : config.n_grid) {
        const double k = std::min(static_cast<double>(n), std::ceil(std::sqrt(config.lambda) * static_cast<double>(n)));
        const auto label = cell_label(config.kind, rule, d, n);
        cells.push_back({config.kind, 0, rule, k, d, n, label, label_id(label)});
      }
    return cells;
  }
  for (std::size_t r = 0; r < config.a_rules.size(); ++r)
    for (DesignChoice d : config.designs)
      for (Index n : config.n_grid) {
        const auto& rule = config.a_rules[r];
        const auto label = cell_label(config.kind, rule.label, d, n);
        cells.push_back({config.kind, r, rule.label, rule(n), d, n, label, label_id(label)});
      }
  return cells;
}

namespace {

constexpr std::uint64_t kCellStream = ~std::uint64_t{0};

bool needs_summary(const SimConfig& c) {
  return std::any_of(c.variance_kinds.begin(), c.variance_kinds.end(),
                     [](InflationKind k) { return k != InflationKind::None; });
}

struct CellContext {
  const SimConfig& config;
  const CellSpec& cell;
  DgpSpec spec;
  bool summary_needed;
  // Shared across reps when the instance or design does not change.
  std::optional<DgpInstance> fixed;
  std::optional<std::vector<std::vector<Index>>> fixed_sets;
  std::optional<Design> fixed_design;
  std::optional<Eigen::VectorXd> fixed_p;
  std::optional<InterferenceSummary> fixed_summary;

  CellContext(const SimConfig& c, const CellSpec& cs) : config(c), cell(cs) {
    spec.kind = cs.kind;
    spec.n = cs.n;
    spec.a_n = cs.a_n;
    spec.seed = c.seed;
    summary_needed = needs_summary(c);
    if (cs.design != DesignChoice::Paired) {
      fixed_design = build_design(cs.design, cs.n, Eigen::VectorXd::Zero(cs.n));
      fixed_p = marginal_probs(*fixed_design);
    }
    if (cs.kind == DgpKind::Adversarial) {
      if (!fixed_design) {
        fixed_design = build_design(cs.design, cs.n, Eigen::VectorXd::Zero(cs.n));
        fixed_p = marginal_probs(*fixed_design);
      }
      fixed = make_adversarial_dgp(cs.n, c.lambda, *fixed_design);
    } else if (c.fixed_latents) {
      Stream rng(c.seed, cs.id, kCellStream);
      fixed = make_dgp(spec, rng);
    } else if (!c.redraw_graph && (cs.kind == DgpKind::Random || cs.kind == DgpKind::RandomWeighted)) {
      Stream rng(c.seed, cs.id, kCellStream);
      fixed_sets = random_g_sets(cs.n, cs.a_n, rng);
    }
    if (fixed) {
      if (!fixed_design) {
        fixed_design = build_design(cs.design, cs.n, fixed->x);
        fixed_p = marginal_probs(*fixed_design);
      }
      if (summary_needed) fixed_summary = fixed->summary(true);
    } else if (summary_needed && cs.kind != DgpKind::Random && cs.kind != DgpKind::RandomWeighted) {
      // group and one-unit structures do not depend on the draw
      fixed_summary = make_dgp(spec).summary(true);
    }
  }

  DgpInstance draw_instance(Stream& rng) const {
    if (!fixed_sets) return make_dgp(spec, rng);
    DgpInstance inst;
    inst.spec = spec;
    const Index n = spec.n;
    inst.x.resize(n);
    inst.eps.resize(n);
    for (Index i = 0; i < n; ++i) inst.x[i] = rng.uniform(0.0, 3.0);
    for (Index i = 0; i < n; ++i) inst.eps[i] = rng.uniform(0.0, 7.0);
    if (spec.kind == DgpKind::RandomWeighted) {
      Eigen::VectorXd lam(n);
      for (Index i = 0; i < n; ++i) lam[i] = rng.lognormal();
      inst.lambda = lam;
    }
    auto o = BalanceOracle::sets(*fixed_sets, inst.x, inst.eps, inst.lambda);
    inst.balance_oracle = o;
    inst.oracle = std::move(o);
    return inst;
  }

  ReplicationRecord run(std::size_t cell_index, long rep) const {
    Stream rng(config.seed, cell.id, static_cast<std::uint64_t>(rep));
    std::optional<DgpInstance> own;
    if (!fixed) own = draw_instance(rng);
    const DgpInstance& inst = fixed ? *fixed : *own;

    std::optional<Design> own_design;
    Eigen::VectorXd own_p;
    if (!fixed_design) {
      own_design = build_design(cell.design, cell.n, inst.x);
      own_p = marginal_probs(*own_design);
    }
    const Design& design = fixed_design ? *fixed_design : *own_design;
    const Eigen::VectorXd& p = fixed_p ? *fixed_p : own_p;

    const AssignmentVector z = sample(design, rng);
    const Eigen::VectorXd y = inst.oracle->evaluate(z);

    ReplicationRecord rec;
    rec.cell = cell_index;
    rec.rep = rep;
    rec.estimates.reserve(config.estimators.size());
    for (EstimatorKind k : config.estimators) {
      try {
        rec.estimates.push_back(estimate(k, z, y, p).point);
      } catch (const DegenerateAssignment&) {
        rec.estimates.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    rec.v_ber = var_est_conventional(z, y, p);
    if (!config.variance_kinds.empty()) {
      std::optional<InterferenceSummary> own_summary;
      if (summary_needed && !fixed_summary) own_summary = inst.summary(true);
      for (InflationKind k : config.variance_kinds) {
        if (k == InflationKind::None) {
          rec.variances.push_back(rec.v_ber);
        } else {
          rec.variances.push_back(inflate(rec.v_ber, fixed_summary ? *fixed_summary : *own_summary, k).value);
        }
      }
    }
    if (config.eate_reference)
      rec.eate_reference = *config.eate_reference;
    else
      rec.eate_reference = cell.kind == DgpKind::Adversarial ? p[0] : 1.0;
    return rec;
  }
};

}  // namespace

std::vector<ReplicationRecord> run_cell(const SimConfig& config, const CellSpec& cell,
                                        std::size_t cell_index, int workers) {
  const CellContext ctx(config, cell);
  const long reps = config.reps;
  std::vector<ReplicationRecord> out(static_cast<std::size_t>(reps));
  const long w = std::clamp<long>(workers, 1, reps);
  if (w == 1) {
    for (long r = 0; r < reps; ++r) out[r] = ctx.run(cell_index, r);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (long t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      const long lo = reps * t / w, hi = reps * (t + 1) / w;
      try {
        for (long r = lo; r < hi; ++r) out[r] = ctx.run(cell_index, r);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace {

double rmse_of(const std::vector<ReplicationRecord>& recs, std::size_t e) {
  CompensatedSum s;
  long count = 0;
  for (const auto& r : recs) {
    const double v = r.estimates[e];
    if (std::isnan(v)) continue;
    s += (v - r.eate_reference) * (v - r.eate_reference);
    ++count;
  }
  return count ? std::sqrt(s.value() / static_cast<double>(count)) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ExperimentResult run_experiment(const SimConfig& config, int workers) {
  ExperimentResult res;
  res.cells = expand_cells(config);
  res.records.reserve(res.cells.size() * static_cast<std::size_t>(config.reps));
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    auto recs = run_cell(config, res.cells[c], c, workers);
    std::move(recs.begin(), recs.end(), std::back_inserter(res.records));
  }

  const std::string base_label = cell_label(DgpKind::Group, "1", DesignChoice::Bernoulli, 100);
  std::vector<ReplicationRecord> base;
  const std::size_t reps = static_cast<std::size_t>(config.reps);
  for (std::size_t c = 0; c < res.cells.size(); ++c)
    if (res.cells[c].label == base_label) {
      base.assign(res.records.begin() + static_cast<long>(c * reps),
                  res.records.begin() + static_cast<long>((c + 1) * reps));
      break;
    }
  if (base.empty()) {
    SimConfig bc = config;
    bc.kind = DgpKind::Group;
    bc.variance_kinds.clear();
    bc.eate_reference.reset();
    bc.fixed_latents = false;
    const CellSpec cell{DgpKind::Group, 0, "1", 1.0, DesignChoice::Bernoulli, 100, base_label, label_id(base_label)};
    base = run_cell(bc, cell, 0, workers);
  }
  for (std::size_t e = 0; e < config.estimators.size(); ++e) res.baseline_rmse.push_back(rmse_of(base, e));
  return res;
}

std::vector<SummaryRow> summarize(const SimConfig& config, const ExperimentResult& result) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t reps = static_cast<std::size_t>(config.reps);
  std::vector<SummaryRow> rows;
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    const auto& cell = result.cells[c];
    const auto first = result.records.begin() + static_cast<long>(c * reps);
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      CompensatedSum err, err2, val;
      long count = 0;
      std::vector<long> covered(config.variance_kinds.size(), 0);
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& rec = *(first + static_cast<long>(r));
        const double v = rec.estimates[e];
        if (std::isnan(v)) continue;
        ++count;
        const double d = v - rec.eate_reference;
        err += d;
        err2 += d * d;
        val += v;
        for (std::size_t k = 0; k < config.variance_kinds.size(); ++k)
          if (chebyshev_interval(v, rec.variances[k], config.alpha).contains(rec.eate_reference)) ++covered[k];
      }
      SummaryRow row;
      row.dgp = dgp_name(cell.kind);
      row.design = design_choice_name(cell.design);
      row.n = cell.n;
      row.a_rule = cell.a_rule;
      row.a_n = cell.a_n;
      row.estimator = estimator_name(config.estimators[e]);
      row.reps = count;
      row.cov_ber = row.cov_avg = row.cov_max = row.cov_sr = nan;
      if (count == 0) {
        row.bias = row.sd = row.rmse = row.rmse_norm = nan;
        rows.push_back(row);
        continue;
      }
      const double m = static_cast<double>(count);
      row.bias = err.value() / m;
      const double mean = val.value() / m;
      CompensatedSum dev;
      for (std::size_t r = 0; r < reps; ++r) {
        const double v = (first + static_cast<long>(r))->estimates[e];
        if (!std::isnan(v)) dev += (v - mean) * (v - mean);
      }
      row.sd = std::sqrt(dev.value() / m);
      row.rmse = std::sqrt(err2.value() / m);
      row.rmse_norm = e < result.baseline_rmse.size() ? row.rmse / result.baseline_rmse[e] : nan;
      for (std::size_t k = 0; k < config.variance_kinds.size(); ++k) {
        const double cov = static_cast<double>(covered[k]) / m;
        switch (config.variance_kinds[k]) {
          case InflationKind::None: row.cov_ber = cov; break;
          case InflationKind::Avg: row.cov_avg = cov; break;
          case InflationKind::Max: row.cov_max = cov; break;
          case InflationKind::SpectralRadius: row.cov_sr = cov; break;
          case InflationKind::Custom: break;
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "dgp,design,n,a_rule,estimator,bias,sd,rmse,rmse_norm,cov_ber,cov_avg,cov_max,cov_sr,reps\n";
  for (const auto& r : rows) {
    out << r.dgp << ',' << r.design << ',' << r.n << ',' << r.a_rule << ',' << r.estimator
        << ',' << format_real(r.bias) << ',' << format_real(r.sd) << ',' << format_real(r.rmse)
        << ',' << format_real(r.rmse_norm) << ',' << format_real(r.cov_ber) << ',' << format_real(r.cov_avg)
        << ',' << format_real(r.cov_max) << ',' << format_real(r.cov_sr) << ',' << r.reps << '\n';
  }
}

void write_records(std::ostream& out, const SimConfig& config, const ExperimentResult& result) {
  out << "dgp,design,n,a_rule,rep";
  for (EstimatorKind k : config.estimators) out << ',' << estimator_name(k);
  out << ",v_ber";
  for (InflationKind k : config.variance_kinds) out << ",v_" << inflation_name(k);
  out << ",eate_reference\n";
  for (const auto& rec : result.records) {
    const auto& cell = result.cells[rec.cell];
    out << dgp_name(cell.kind) << ',' << design_choice_name(cell.design) << ',' << cell.n << ',' << cell.a_rule
        << ',' << rec.rep;
    for (double v : rec.estimates) out << ',' << format_real(v);
    out << ',' << format_real(rec.v_ber);
    for (double v : rec.variances) out << ',' << format_real(v);
    out << ',' << format_real(rec.eate_reference) << '\n';
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("slope inputs differ in length");
  if (x.size() < 2) throw InvalidArgument("slope needs two points");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw InvalidArgument("slope needs positive values");
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidArgument("slope needs distinct x values");
  return sxy / sxx;
}

}  // namespace eate
