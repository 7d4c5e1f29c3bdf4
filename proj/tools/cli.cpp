#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "eate/distance.hpp"
#include "eate/io.hpp"
#include "eate/metrics.hpp"
#include "eate/mixing.hpp"

namespace eate::cli {

namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20240101;

Scale parse_scale(const std::string& name) {
  if (name == "small") return Scale::Small;
  if (name == "medium") return Scale::Medium;
  if (name == "paper") return Scale::Paper;
  throw InvalidArgument("unknown scale `" + name + "`");
}

std::vector<SimConfig> figure_configs(const std::string& figure, Scale scale, std::uint64_t seed) {
  SimConfig base;
  base.seed = seed;
  base.designs = {DesignChoice::Bernoulli, DesignChoice::Complete, DesignChoice::Paired};
  base.estimators = {EstimatorKind::HT, EstimatorKind::Hajek};
  switch (scale) {
    case Scale::Small:
      base.n_grid = log_grid(2.0, 3.0, 8);
      base.reps = 200;
      break;
    case Scale::Medium:
      base.n_grid = log_grid(2.0, 4.0, 8);
      base.reps = 2000;
      break;
    case Scale::Paper:
      base.n_grid = log_grid(2.0, 5.0, 8);
      base.reps = 50000;
      break;
  }
  auto rules = [](std::initializer_list<const char*> r) {
    std::vector<ARule> out;
    for (const char* s : r) out.push_back(parse_a_rule(s));
    return out;
  };
  std::vector<SimConfig> out;
  if (figure == "figB1") {
    base.kind = DgpKind::Group;
    base.a_rules = rules({"1", "25", "8*n^0.25", "2.5*n^0.5", "0.25*n"});
    out.push_back(base);
  } else if (figure == "figB2") {
    base.kind = DgpKind::Random;
    base.a_rules = rules({"1", "5", "8^0.5*n^0.125", "2.5^0.5*n^0.25", "0.05*n"});
    out.push_back(base);
    base.kind = DgpKind::RandomWeighted;
    out.push_back(base);
  } else if (figure == "figB3") {
    base.kind = DgpKind::OneUnit;
    base.a_rules = rules({"1", "24^0.5*n^0.5", "8^0.5*n^0.625", "2.5^0.5*n^0.75", "0.5*n"});
    out.push_back(base);
  } else {
    throw InvalidArgument("unknown figure `" + figure + "` (expected figB1, figB2 or figB3)");
  }
  return out;
}

double estimated_seconds(const SimConfig& config) {
  // ~30 ns per unit and replication, plus set construction for random graphs
  double work = 0.0;
  for (const auto& cell : expand_cells(config)) {
    double per = static_cast<double>(cell.n);
    if (cell.kind == DgpKind::Random || cell.kind == DgpKind::RandomWeighted) per *= 1.0 + cell.a_n;
    work += per;
  }
  return 3e-8 * work * static_cast<double>(config.reps);
}

// ---------------------------------------------------------------------------
// SVG

namespace {

const char* kColors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"};

std::string num(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

}  // namespace

void write_svg(std::ostream& out, const std::string& title, const std::vector<SummaryRow>& rows,
               const std::string& estimator) {
  std::vector<std::string> designs, rules;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : rows) {
    if (r.estimator != estimator || !(r.rmse_norm > 0.0)) continue;
    if (std::find(designs.begin(), designs.end(), r.design) == designs.end()) designs.push_back(r.design);
    if (std::find(rules.begin(), rules.end(), r.a_rule) == rules.end()) rules.push_back(r.a_rule);
    xmin = std::min(xmin, std::log10(static_cast<double>(r.n)));
    xmax = std::max(xmax, std::log10(static_cast<double>(r.n)));
    ymin = std::min(ymin, std::log10(r.rmse_norm));
    ymax = std::max(ymax, std::log10(r.rmse_norm));
  }
  const double pw = 300, ph = 260, margin = 45, top = 40;
  const double width = margin + designs.size() * (pw + margin), height = top + ph + 40 + 18.0 * rules.size();
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"" << num(margin) << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  if (designs.empty()) {
    out << "</svg>\n";
    return;
  }
  if (xmax == xmin) xmax = xmin + 1;
  ymin = std::floor(ymin * 4) / 4;
  ymax = std::ceil(ymax * 4) / 4;
  if (ymax == ymin) ymax = ymin + 0.25;
  for (std::size_t d = 0; d < designs.size(); ++d) {
    const double x0 = margin + d * (pw + margin), y0 = top;
    auto px = [&](double lx) { return x0 + (lx - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ly) { return y0 + ph - (ly - ymin) / (ymax - ymin) * ph; };
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(pw) << "\" height=\""
        << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << num(x0 + 4) << "\" y=\"" << num(y0 - 6) << "\">" << designs[d] << "</text>\n";
    for (double t = std::ceil(xmin); t <= xmax + 1e-9; t += 1.0)
      out << "<text x=\"" << num(px(t) - 10) << "\" y=\"" << num(y0 + ph + 14) << "\">1e" << static_cast<int>(t)
          << "</text>\n";
    for (double t = ymin; t <= ymax + 1e-9; t += 0.25)
      out << "<text x=\"" << num(x0 - 40) << "\" y=\"" << num(py(t) + 4) << "\">" << num(std::pow(10.0, t))
          << "</text>\n";
    for (std::size_t k = 0; k < rules.size(); ++k) {
      std::vector<std::pair<Index, double>> pts;
      for (const auto& r : rows)
        if (r.estimator == estimator && r.design == designs[d] && r.a_rule == rules[k] && r.rmse_norm > 0.0)
          pts.emplace_back(r.n, r.rmse_norm);
      std::sort(pts.begin(), pts.end());
      out << "<polyline fill=\"none\" stroke=\"" << kColors[k % 7] << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [n, y] : pts) out << num(px(std::log10(static_cast<double>(n)))) << ',' << num(py(std::log10(y))) << ' ';
      out << "\"/>\n";
    }
  }
  for (std::size_t k = 0; k < rules.size(); ++k) {
    const double y = top + ph + 34 + 18.0 * k;
    out << "<line x1=\"" << num(margin) << "\" y1=\"" << num(y - 4) << "\" x2=\"" << num(margin + 20) << "\" y2=\""
        << num(y - 4) << "\" stroke=\"" << kColors[k % 7] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(margin + 26) << "\" y=\"" << num(y) << "\">a_n = " << rules[k] << "</text>\n";
  }
  out << "</svg>\n";
}

// ---------------------------------------------------------------------------

namespace {

struct ConfigError : Error {
  using Error::Error;
};

std::vector<double> parse_factor_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || !(v >= 1.0)) throw ConfigError("bad inflation factor `" + tok + "`");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--factors needs at least one value");
  return out;
}

std::ostream& open_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw ConfigError("cannot write " + path);
  return file;
}

// ---- simulate

struct SimulateArgs {
  std::string config, out, dump;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  SimConfig cfg;
  try {
    cfg = read_sim_config(a.config);
  } catch (const Error& e) {
    throw ConfigError(a.config + ": " + e.what());
  }
  if (a.seed) cfg.seed = *a.seed;
  const auto res = run_experiment(cfg, a.workers);
  std::ofstream f;
  write_summary(open_out(a.out, f, out), summarize(cfg, res));
  if (!a.dump.empty()) {
    std::ofstream d(a.dump);
    if (!d) throw ConfigError("cannot write " + a.dump);
    write_records(d, cfg, res);
  }
  return kOk;
}

// ---- analyze

struct AnalyzeArgs {
  std::string data, design, graph, variance = "ber", factors, estimator = "both";
  double alpha = 0.05;
};

void interval_row(std::ostream& out, const char* est, double point, const VarianceEstimate& v, double alpha) {
  const auto ci = chebyshev_interval(point, v, alpha);
  out << est << ',' << format_real(point) << ',' << format_real(v.v_ber) << ',' << inflation_name(v.kind) << ','
      << format_real(v.factor) << ',' << format_real(v.value) << ',' << format_real(alpha) << ','
      << format_real(ci.lo()) << ',' << format_real(ci.hi()) << '\n';
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const InflationKind kind = [&] {
    try {
      return parse_inflation(a.variance);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }();
  if (kind != InflationKind::None && a.graph.empty() && a.factors.empty())
    throw ConfigError("inflation factor requires graph or explicit factor");
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (a.estimator != "ht" && a.estimator != "hajek" && a.estimator != "both")
    throw ConfigError("unknown estimator `" + a.estimator + "` (expected ht, hajek or both)");
  const std::vector<double> factors = a.factors.empty() ? std::vector<double>{} : parse_factor_list(a.factors);

  ExperimentData data = [&] {
    try {
      return read_experiment_data_file(a.data);
    } catch (const Error& e) {
      throw ConfigError(a.data + ": " + e.what());
    }
  }();
  bool bernoulli = true;
  if (!a.design.empty()) {
    try {
      const Design d = read_design_file(a.design);
      if (d.size() != data.size()) throw ConfigError("design and data differ in n");
      bernoulli = d.kind() == DesignKind::Bernoulli;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(a.design + ": " + e.what());
    }
  }
  std::optional<InterferenceSummary> summary;
  if (!a.graph.empty() && factors.empty()) {
    InterferenceGraph g = [&] {
      try {
        return read_edge_list_file(a.graph, data.size());
      } catch (const Error& e) {
        throw ConfigError(a.graph + ": " + e.what());
      }
    }();
    SummaryOptions opt;
    opt.spectral = kind == InflationKind::SpectralRadius;
    summary = summarize_interference(g, opt);
  }

  const auto ht = ht_estimate(data);
  std::optional<EstimateResult> ha;
  try {
    ha = hajek_estimate(data);
  } catch (const DegenerateAssignment& e) {
    if (a.estimator != "ht") {
      err << "error: " << e.what() << '\n';
      return kDegenerate;
    }
  }
  const double ha_point = ha ? ha->point : std::numeric_limits<double>::quiet_NaN();
  const double v_ber = var_est_conventional(data);

  if (!bernoulli) out << "warning: variance formula assumes a Bernoulli design\n";
  out << "n=" << data.size() << '\n'
      << "treated=" << data.z.treated_count() << '\n'
      << "ht=" << format_real(ht.point) << '\n'
      << "hajek=" << format_real(ha_point) << '\n'
      << "mu1=" << format_real(ht.arm_mean_treated) << '\n'
      << "mu0=" << format_real(ht.arm_mean_control) << '\n'
      << "n1_hat=" << format_real(ht.weight_sum_treated) << '\n'
      << "n0_hat=" << format_real(ht.weight_sum_control) << '\n'
      << "v_ber=" << format_real(v_ber) << '\n';
  out << "estimator,point,v_ber,factor_kind,factor,value,alpha,lo,hi\n";
  const std::pair<const char*, double> points[] = {{"ht", ht.point}, {"hajek", ha_point}};
  for (const auto& [name, point] : points) {
    if (a.estimator != "both" && a.estimator != name) continue;
    if (!factors.empty()) {
      for (const auto& v : sensitivity_sweep(v_ber, factors)) interval_row(out, name, point, v, a.alpha);
    } else {
      const auto v = inflate(v_ber, summary ? *summary : InterferenceSummary{}, kind);
      interval_row(out, name, point, v, a.alpha);
    }
  }
  return kOk;
}

// ---- metrics

struct MetricsArgs {
  std::string graph, design;
  long n = 0;
  bool no_spectral = false;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  std::optional<Index> n;
  if (a.n > 0) n = a.n;
  const auto g = read_edge_list_file(a.graph, n);
  SummaryOptions opt;
  opt.spectral = !a.no_spectral;
  if (!a.design.empty()) {
    const Design d = read_design_file(a.design);
    if (const auto* p = std::get_if<Paired>(&d.variant())) opt.pairing = p->partner;
  }
  const auto s = summarize_interference(g, opt);
  out << "n=" << g.size() << '\n'
      << "edges=" << g.edge_count() << '\n'
      << "d_avg=" << format_real(s.d_avg) << '\n'
      << "d_max=" << s.d_max << '\n'
      << "d_rms=" << format_real(s.d_rms) << '\n';
  if (s.lambda1) out << "lambda1=" << format_real(*s.lambda1) << '\n';
  for (const auto& [p, v] : s.c_moments)
    out << "C_" << (std::isinf(p) ? std::string("inf") : format_real(p)) << '=' << format_real(v) << '\n';
  if (s.e_avg) out << "e_avg=" << format_real(*s.e_avg) << '\n';
  if (s.r_sum) out << "r_sum=" << *s.r_sum << '\n';
  return kOk;
}

// ---- mixing

struct MixingArgs {
  std::string design, graph;
  double q = RegularityConstants::kInfinity, s = RegularityConstants::kInfinity;
};

int cmd_mixing(const MixingArgs& a, std::ostream& out) {
  const Design d = read_design_file(a.design);
  const auto g = a.graph.empty() ? InterferenceGraph::identity(d.size()) : read_edge_list_file(a.graph, d.size());
  RegularityConstants rc;
  rc.q = a.q;
  rc.s = a.s;
  rc.validate();
  const auto rep = mixing_coefficients(d, g, rc);
  out << "i,j,alpha\n";
  for (const auto& [ij, v] : rep.pair_alphas) out << ij.first + 1 << ',' << ij.second + 1 << ',' << format_real(v) << '\n';
  out << "alpha_ext=" << format_real(rep.alpha_ext) << '\n' << "alpha_int=" << format_real(rep.alpha_int) << '\n';
  return kOk;
}

// ---- distance

struct DistanceArgs {
  std::string a, b, metric = "tv", graph;
  double k_tau = 2.0;
};

int cmd_distance(const DistanceArgs& a, std::ostream& out) {
  if (a.metric != "tv" && a.metric != "w1" && a.metric != "w2")
    throw ConfigError("unknown metric `" + a.metric + "` (expected tv, w1 or w2)");
  if (!(a.k_tau >= 0.0)) throw ConfigError("k-tau must be nonnegative");
  const auto P = DesignDistribution::from_design(read_design_file(a.a));
  const auto Q = DesignDistribution::from_design(read_design_file(a.b));
  if (P.dimension() != Q.dimension()) throw ConfigError("designs differ in n");
  out << "metric,value,k_tau,eate_gap_bound\n";
  if (a.metric == "tv") {
    const double tv = total_variation(P, Q);
    out << "tv," << format_real(tv) << ',' << format_real(a.k_tau) << ',' << format_real(2.0 * a.k_tau * tv) << '\n';
    return kOk;
  }
  const double r = a.metric == "w1" ? 1.0 : 2.0;
  const auto g = a.graph.empty() ? InterferenceGraph::identity(P.dimension())
                                 : read_edge_list_file(a.graph, P.dimension());
  const double w = wasserstein(P, Q, r);
  out << a.metric << ',' << format_real(w) << ',' << format_real(a.k_tau) << ','
      << format_real(lipschitz_bound(g, r, a.k_tau) * w) << '\n';
  return kOk;
}

// ---- reproduce

struct ReproduceArgs {
  std::string figure, scale = "small", out = "reproduce_out";
  std::uint64_t seed = kDefaultSeed;
  int workers = 1;
  bool confirm = false;
};

int cmd_reproduce(const ReproduceArgs& a, std::ostream& out, std::ostream& err) {
  const Scale scale = [&] {
    try {
      return parse_scale(a.scale);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }();
  std::vector<SimConfig> cfgs;
  try {
    cfgs = figure_configs(a.figure, scale, a.seed);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  double secs = 0.0;
  for (const auto& c : cfgs) secs += estimated_seconds(c);
  secs /= std::max(1, a.workers);
  if (scale == Scale::Paper) {
    err << "estimated runtime: about " << static_cast<long long>(std::ceil(secs / 3600.0)) << " hour(s) with "
        << a.workers << " worker(s)\n";
    if (!a.confirm) {
      err << "scale `paper` needs --confirm\n";
      return kConfig;
    }
  }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw ConfigError("cannot create " + a.out + ": " + ec.message());
  for (const auto& cfg : cfgs) {
    const auto res = run_experiment(cfg, a.workers);
    const auto rows = summarize(cfg, res);
    const std::string stem = a.figure + "_" + dgp_name(cfg.kind);
    const fs::path dir(a.out);
    {
      std::ofstream f(dir / (stem + "_summary.csv"));
      if (!f) throw ConfigError("cannot write into " + a.out);
      write_summary(f, rows);
    }
    std::set<std::string> written;
    for (DesignChoice d : cfg.designs)
      for (std::size_t k = 0; k < cfg.a_rules.size(); ++k) {
        const std::string name = stem + "_" + design_choice_name(d) + "_a" + std::to_string(k + 1) + ".dat";
        std::ofstream f(dir / name);
        f << "# a_n = " << cfg.a_rules[k].label << ", design = " << design_choice_name(d) << ", hajek\n";
        f << "# n rmse_norm\n";
        for (const auto& r : rows)
          if (r.design == design_choice_name(d) && r.a_rule == cfg.a_rules[k].label && r.estimator == "hajek")
            f << r.n << ' ' << format_real(r.rmse_norm) << '\n';
        written.insert(name);
      }
    {
      std::ofstream f(dir / (stem + ".svg"));
      write_svg(f, stem + " (Hajek RMSE, normalized)", rows, "hajek");
    }
    out << stem << ": " << written.size() << " series, " << res.cells.size() << " cells, " << cfg.reps
        << " reps\n";
  }
  return kOk;
}

template <class F>
int guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const DegenerateAssignment& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design-based causal inference under interference"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a Monte Carlo study from a config file");
  s->add_option("--config", sim.config, "Simulation config (JSON)")->required();
  s->add_option("--out", sim.out, "Summary table path (default stdout)");
  s->add_option("--seed", sim.seed, "Override the master seed");
  s->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);
  s->add_option("--dump-reps", sim.dump, "Write per-replication records here");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Point estimates and intervals for one experiment");
  a->add_option("--data", an.data, "unit,z,y,p table")->required();
  a->add_option("--design", an.design, "Design description (JSON)");
  a->add_option("--variance", an.variance, "ber, avg, max or sr");
  a->add_option("--graph", an.graph, "src,dst edge list");
  a->add_option("--alpha", an.alpha, "Interval level");
  a->add_option("--estimator", an.estimator, "ht, hajek or both");
  a->add_option("--factors", an.factors, "Comma-separated inflation factors for a sensitivity sweep");

  MetricsArgs me;
  auto* m = app.add_subcommand("metrics", "Interference summaries of a graph");
  m->add_option("--graph", me.graph, "src,dst edge list")->required();
  m->add_option("--n", me.n, "Number of units (default: largest index)");
  m->add_option("--design", me.design, "Paired design for e_avg and R_sum");
  m->add_flag("--no-spectral", me.no_spectral, "Skip the spectral radius");

  MixingArgs mx;
  auto* x = app.add_subcommand("mixing", "Exact mixing coefficients of a design");
  x->add_option("--design", mx.design, "Design description (JSON)")->required();
  x->add_option("--graph", mx.graph, "src,dst edge list (default: no interference)");
  x->add_option("--q", mx.q, "Moment constant q");
  x->add_option("--s", mx.s, "Moment constant s");

  DistanceArgs di;
  auto* d = app.add_subcommand("distance", "Distance between two designs and the implied EATE gap bound");
  d->add_option("--design-a", di.a, "First design")->required();
  d->add_option("--design-b", di.b, "Second design")->required();
  d->add_option("--metric", di.metric, "tv, w1 or w2");
  d->add_option("--k-tau", di.k_tau, "Bound on unit effects");
  d->add_option("--graph", di.graph, "src,dst edge list for the Wasserstein bound");

  ReproduceArgs re;
  auto* r = app.add_subcommand("reproduce", "Regenerate one of the simulation figures");
  r->add_option("figure", re.figure, "figB1, figB2 or figB3")->required();
  r->add_option("--scale", re.scale, "small, medium or paper");
  r->add_option("--out", re.out, "Output directory");
  r->add_option("--seed", re.seed, "Master seed");
  r->add_option("--workers", re.workers, "Worker threads")->check(CLI::PositiveNumber);
  r->add_flag("--confirm", re.confirm, "Allow the 50,000-replication scale");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }

  if (s->parsed()) return guarded([&] { return cmd_simulate(sim, out); }, err);
  if (a->parsed()) return guarded([&] { return cmd_analyze(an, out, err); }, err);
  if (m->parsed()) return guarded([&] { return cmd_metrics(me, out); }, err);
  if (x->parsed()) return guarded([&] { return cmd_mixing(mx, out); }, err);
  if (d->parsed()) return guarded([&] { return cmd_distance(di, out); }, err);
  if (r->parsed()) return guarded([&] { return cmd_reproduce(re, out, err); }, err);
  return kConfig;
}

}  // namespace eate::cli
