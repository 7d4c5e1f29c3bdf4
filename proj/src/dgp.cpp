#include "eate/dgp.hpp"

#include <algorithm>
#include <cmath>

namespace eate {

const char* dgp_name(DgpKind kind) {
  switch (kind) {
    case DgpKind::Group: return "group";
    case DgpKind::Random: return "random";
    case DgpKind::RandomWeighted: return "random_weighted";
    case DgpKind::OneUnit: return "oneunit";
    case DgpKind::Adversarial: return "adversarial";
  }
  return "?";
}

DgpKind parse_dgp_kind(const std::string& name) {
  if (name == "group") return DgpKind::Group;
  if (name == "random") return DgpKind::Random;
  if (name == "random_weighted") return DgpKind::RandomWeighted;
  if (name == "oneunit") return DgpKind::OneUnit;
  if (name == "adversarial") return DgpKind::Adversarial;
  throw InvalidArgument("unknown dgp kind `" + name + "`");
}

double balance(std::span<const Index> g_set, const AssignmentVector& z, const Eigen::VectorXd* weights) {
  double b = 0.0;
  for (Index j : g_set) {
    const double s = z[j] ? 1.0 : -1.0;
    b += weights ? (*weights)[j] * s : s;
  }
  return b;
}

namespace {

inline double effect_of(double bal) { return bal > 0.0 ? 2.0 : (bal == 0.0 ? 1.0 : 0.0); }

void check_latents(const Eigen::VectorXd& x, const Eigen::VectorXd& eps, Index n) {
  if (n <= 0) throw InvalidArgument("dgp needs at least one unit");
  if (x.size() != n || eps.size() != n) throw DimensionMismatch("latent draws have the wrong length");
}

}  // namespace

std::shared_ptr<BalanceOracle> BalanceOracle::groups(std::vector<Index> labels, Eigen::VectorXd x,
                                                     Eigen::VectorXd eps) {
  check_latents(x, eps, static_cast<Index>(labels.size()));
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] < labels[i - 1]) throw InvalidArgument("group labels must be nondecreasing");
  std::shared_ptr<BalanceOracle> o(new BalanceOracle());
  o->labels_ = std::move(labels);
  o->x_ = std::move(x);
  o->eps_ = std::move(eps);
  return o;
}

std::shared_ptr<BalanceOracle> BalanceOracle::sets(std::vector<std::vector<Index>> g_sets,
                                                   Eigen::VectorXd x, Eigen::VectorXd eps,
                                                   std::optional<Eigen::VectorXd> weights) {
  const Index n = static_cast<Index>(g_sets.size());
  check_latents(x, eps, n);
  if (weights && weights->size() != n) throw DimensionMismatch("weights have the wrong length");
  for (Index i = 0; i < n; ++i)
    for (Index j : g_sets[i]) {
      if (j < 0 || j >= n) throw IndexOutOfRange(static_cast<std::size_t>(j), n);
      if (j == i) throw InvalidArgument("a unit cannot be in its own interference set");
    }
  std::shared_ptr<BalanceOracle> o(new BalanceOracle());
  o->sets_ = std::move(g_sets);
  o->x_ = std::move(x);
  o->eps_ = std::move(eps);
  o->weights_ = std::move(weights);
  return o;
}

Eigen::VectorXd BalanceOracle::balances(const AssignmentVector& z) const {
  const Index n = size();
  if (z.size() != n) throw DimensionMismatch("assignment length differs from oracle size");
  Eigen::VectorXd bal(n);
  if (is_grouped()) {
    Index start = 0;
    while (start < n) {
      Index stop = start;
      double sum = 0.0;
      while (stop < n && labels_[stop] == labels_[start]) sum += z[stop++] ? 1.0 : -1.0;
      for (Index i = start; i < stop; ++i) bal[i] = sum - (z[i] ? 1.0 : -1.0);
      start = stop;
    }
    return bal;
  }
  const Eigen::VectorXd* w = weights_ ? &*weights_ : nullptr;
  for (Index i = 0; i < n; ++i) bal[i] = balance(sets_[i], z, w);
  return bal;
}

Eigen::VectorXd BalanceOracle::evaluate(const AssignmentVector& z) const {
  const Eigen::VectorXd bal = balances(z);
  Eigen::VectorXd y(size());
  for (Index i = 0; i < size(); ++i) y[i] = effect_of(bal[i]) * (z[i] ? 1.0 : 0.0) + x_[i] + eps_[i];
  return y;
}

Eigen::VectorXd BalanceOracle::unit_effects(const AssignmentVector& z) const {
  const Eigen::VectorXd bal = balances(z);
  return bal.unaryExpr([](double b) { return effect_of(b); });
}

std::vector<std::vector<Index>> BalanceOracle::g_sets() const {
  if (!is_grouped()) return sets_;
  const Index n = size();
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  Index start = 0;
  while (start < n) {
    Index stop = start;
    while (stop < n && labels_[stop] == labels_[start]) ++stop;
    for (Index i = start; i < stop; ++i)
      for (Index j = start; j < stop; ++j)
        if (j != i) out[i].push_back(j);
    start = stop;
  }
  return out;
}

InterferenceGraph BalanceOracle::graph() const { return InterferenceGraph::from_interference_sets(g_sets()); }

// ---------------------------------------------------------------------------

AdversarialOracle::AdversarialOracle(Eigen::VectorXd p, double lambda) : p_(std::move(p)) {
  const Index n = p_.size();
  if (n <= 0) throw InvalidArgument("adversarial construction needs at least one unit");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in (0,1]");
  for (Index i = 0; i < n; ++i)
    if (!(p_[i] > 0.0 && p_[i] < 1.0)) throw InvalidArgument("marginal probabilities must lie in (0,1)");
  k_ = std::min<Index>(n, static_cast<Index>(std::ceil(std::sqrt(lambda) * static_cast<double>(n))));
  scale_ = static_cast<double>(n) / static_cast<double>(k_);
}

Eigen::VectorXd AdversarialOracle::evaluate(const AssignmentVector& z) const {
  if (z.size() != size()) throw DimensionMismatch("assignment length differs from oracle size");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(size());
  if (!z[0]) return y;
  for (Index i = 0; i < k_; ++i) y[i] = z[i] ? scale_ * p_[i] : -scale_ * (1.0 - p_[i]);
  return y;
}

Eigen::VectorXd AdversarialOracle::unit_effects(const AssignmentVector& z) const {
  if (z.size() != size()) throw DimensionMismatch("assignment length differs from oracle size");
  Eigen::VectorXd t = Eigen::VectorXd::Zero(size());
  t[0] = scale_ * p_[0];
  if (z[0])
    for (Index i = 1; i < k_; ++i) t[i] = scale_;
  return t;
}

std::optional<InterferenceGraph> AdversarialOracle::declared_graph() const {
  std::vector<std::pair<Index, Index>> edges;
  for (Index j = 1; j < k_; ++j) edges.emplace_back(0, j);
  return InterferenceGraph::from_edges(size(), edges);
}

// ---------------------------------------------------------------------------

InterferenceGraph DgpInstance::graph() const { return *oracle->declared_graph(); }

std::vector<std::vector<Index>> DgpInstance::g_sets() const {
  if (balance_oracle) return balance_oracle->g_sets();
  const auto g = graph();
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(g.size()));
  for (Index i = 0; i < g.size(); ++i)
    for (Index j : g.interferers_of(i))
      if (j != i) out[i].push_back(j);
  return out;
}

InterferenceSummary DgpInstance::summary(bool spectral) const {
  if (balance_oracle && balance_oracle->is_grouped()) {
    const auto& labels = balance_oracle->labels();
    const double n = static_cast<double>(labels.size());
    std::vector<double> sizes;
    Index start = 0;
    const Index count = static_cast<Index>(labels.size());
    while (start < count) {
      Index stop = start;
      while (stop < count && labels[stop] == labels[start]) ++stop;
      sizes.push_back(static_cast<double>(stop - start));
      start = stop;
    }
    InterferenceSummary s;
    double s2 = 0.0, s3 = 0.0, mx = 0.0;
    for (double g : sizes) {
      s2 += g * g;
      s3 += g * g * g;
      mx = std::max(mx, g);
    }
    s.d_avg = s2 / n;
    s.d_max = static_cast<Index>(mx);
    s.d_rms = std::sqrt(s3 / n);
    if (spectral) s.lambda1 = mx;
    s.c_moments[1.0] = s2 / n;
    s.c_moments[2.0] = std::sqrt(s3 / n);
    s.c_moments[RegularityConstants::kInfinity] = mx;
    return s;
  }
  if (spec.kind == DgpKind::OneUnit && balance_oracle) {
    // unit 0 reaches units 0..K-1; everyone else is isolated
    const double n = static_cast<double>(spec.n);
    const double k = std::max(1.0, std::floor(spec.a_n));
    InterferenceSummary s;
    s.d_avg = (k * k + n - k) / n;
    s.d_max = static_cast<Index>(k);
    s.d_rms = std::sqrt((k * k * k + n - k) / n);
    if (spectral) s.lambda1 = k;
    s.c_moments[1.0] = (k + n - 1.0) / n;
    s.c_moments[2.0] = std::sqrt((k * k + n - 1.0) / n);
    s.c_moments[RegularityConstants::kInfinity] = k;
    return s;
  }
  SummaryOptions opt;
  opt.spectral = spectral;
  return summarize_interference(graph(), opt);
}

std::vector<Index> group_labels(Index n, double a_n) {
  if (!(a_n >= 1.0)) throw InvalidArgument("a_n must be at least 1");
  std::vector<Index> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[i] = static_cast<Index>(std::ceil(static_cast<double>(i + 1) / a_n)) - 1;
  return labels;
}

namespace {

void check_spec(const DgpSpec& spec) {
  if (spec.n <= 0) throw InvalidArgument("dgp needs at least one unit");
  if (!(spec.a_n >= 1.0) || spec.a_n > static_cast<double>(spec.n))
    throw InvalidArgument("a_n must lie in [1, n]");
}

void draw_latents(DgpInstance& inst, Stream& rng) {
  const Index n = inst.spec.n;
  inst.x.resize(n);
  inst.eps.resize(n);
  for (Index i = 0; i < n; ++i) inst.x[i] = rng.uniform(0.0, 3.0);
  for (Index i = 0; i < n; ++i) inst.eps[i] = rng.uniform(0.0, 7.0);
}

DgpInstance finish(DgpInstance inst, std::shared_ptr<BalanceOracle> o) {
  inst.balance_oracle = o;
  inst.oracle = std::move(o);
  inst.k_tau = 2.0;
  return inst;
}

}  // namespace

DgpInstance make_group_dgp(const DgpSpec& spec, Stream& rng) {
  check_spec(spec);
  DgpInstance inst;
  inst.spec = spec;
  inst.spec.kind = DgpKind::Group;
  draw_latents(inst, rng);
  auto o = BalanceOracle::groups(group_labels(spec.n, spec.a_n), inst.x, inst.eps);
  return finish(std::move(inst), std::move(o));
}

DgpInstance make_group_dgp(const DgpSpec& spec) {
  Stream rng(spec.seed);
  return make_group_dgp(spec, rng);
}

std::vector<std::vector<Index>> random_g_sets(Index n, double a_n, Stream& rng) {
  std::vector<std::vector<Index>> sets(static_cast<std::size_t>(n));
  if (n <= 1) return sets;
  const double p = (a_n - 1.0) / static_cast<double>(n - 1);
  if (p <= 0.0) return sets;
  const Index m = n - 1;
  for (Index i = 0; i < n; ++i) {
    auto& g = sets[i];
    if (p >= 1.0) {
      for (Index j = 0; j < n; ++j)
        if (j != i) g.push_back(j);
      continue;
    }
    // Geometric gaps between successive members among the n - 1 candidates.
    const double log_q = std::log1p(-p);
    Index pos = -1;
    for (;;) {
      const double u = rng.uniform();
      const double gap = std::floor(std::log1p(-u) / log_q);
      if (gap >= static_cast<double>(m)) break;
      pos += 1 + static_cast<Index>(gap);
      if (pos >= m) break;
      g.push_back(pos < i ? pos : pos + 1);
    }
  }
  return sets;
}

DgpInstance make_random_dgp(const DgpSpec& spec, bool weighted, Stream& rng) {
  check_spec(spec);
  DgpInstance inst;
  inst.spec = spec;
  inst.spec.kind = weighted ? DgpKind::RandomWeighted : DgpKind::Random;
  draw_latents(inst, rng);
  if (weighted) {
    Eigen::VectorXd lam(spec.n);
    for (Index i = 0; i < spec.n; ++i) lam[i] = rng.lognormal();
    inst.lambda = lam;
  }
  auto sets = random_g_sets(spec.n, spec.a_n, rng);
  auto o = BalanceOracle::sets(std::move(sets), inst.x, inst.eps, inst.lambda);
  return finish(std::move(inst), std::move(o));
}

DgpInstance make_random_dgp(const DgpSpec& spec, bool weighted) {
  Stream rng(spec.seed);
  return make_random_dgp(spec, weighted, rng);
}

DgpInstance make_oneunit_dgp(const DgpSpec& spec, Stream& rng) {
  check_spec(spec);
  DgpInstance inst;
  inst.spec = spec;
  inst.spec.kind = DgpKind::OneUnit;
  draw_latents(inst, rng);
  const Index top = static_cast<Index>(std::floor(spec.a_n));
  std::vector<std::vector<Index>> sets(static_cast<std::size_t>(spec.n));
  for (Index i = 1; i < top; ++i) sets[i] = {0};
  auto o = BalanceOracle::sets(std::move(sets), inst.x, inst.eps);
  return finish(std::move(inst), std::move(o));
}

DgpInstance make_oneunit_dgp(const DgpSpec& spec) {
  Stream rng(spec.seed);
  return make_oneunit_dgp(spec, rng);
}

DgpInstance make_adversarial_dgp(Index n, double lambda, const Design& design) {
  if (design.size() != n) throw DimensionMismatch("design size differs from n");
  auto o = std::make_shared<AdversarialOracle>(marginal_probs(design), lambda);
  DgpInstance inst;
  inst.spec.kind = DgpKind::Adversarial;
  inst.spec.n = n;
  inst.spec.a_n = static_cast<double>(o->block());
  inst.x = Eigen::VectorXd::Zero(n);
  inst.eps = Eigen::VectorXd::Zero(n);
  inst.k_tau = o->scale();
  inst.oracle = std::move(o);
  return inst;
}

DgpInstance make_dgp(const DgpSpec& spec, Stream& rng) {
  switch (spec.kind) {
    case DgpKind::Group: return make_group_dgp(spec, rng);
    case DgpKind::Random: return make_random_dgp(spec, false, rng);
    case DgpKind::RandomWeighted: return make_random_dgp(spec, true, rng);
    case DgpKind::OneUnit: return make_oneunit_dgp(spec, rng);
    case DgpKind::Adversarial: break;
  }
  throw InvalidArgument("the adversarial construction needs a design; use make_adversarial_dgp");
}

DgpInstance make_dgp(const DgpSpec& spec) {
  Stream rng(spec.seed);
  return make_dgp(spec, rng);
}

double expected_davg_random(Index n, double a_n) {
  if (n <= 0) throw InvalidArgument("n must be positive");
  if (!(a_n >= 1.0) || a_n > static_cast<double>(n)) throw InvalidArgument("a_n must lie in [1, n]");
  if (n == 1) return 1.0;
  const double nn = static_cast<double>(n);
  const double p = (a_n - 1.0) / (nn - 1.0);
  return nn - (nn - 1.0) * std::pow(1.0 - p, nn) * std::pow(1.0 + p, nn - 2.0);
}

}  // namespace eate
