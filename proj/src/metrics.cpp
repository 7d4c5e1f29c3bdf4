#include "eate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "text_io.hpp"

namespace eate {

DependenceMatrix::DependenceMatrix(std::vector<std::vector<Index>> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw InvalidArgument("dependence matrix needs at least one unit");
}

bool DependenceMatrix::contains(Index i, Index j) const {
  const auto& r = rows_[i];
  return std::binary_search(r.begin(), r.end(), j);
}

double DependenceMatrix::average() const {
  return static_cast<double>(nonzeros()) / static_cast<double>(size());
}

Index DependenceMatrix::max_degree() const {
  Index m = 0;
  for (const auto& r : rows_) m = std::max(m, static_cast<Index>(r.size()));
  return m;
}

double DependenceMatrix::rms() const {
  double s = 0.0;
  for (const auto& r : rows_) s += static_cast<double>(r.size()) * static_cast<double>(r.size());
  return std::sqrt(s / static_cast<double>(size()));
}

std::size_t DependenceMatrix::nonzeros() const {
  std::size_t s = 0;
  for (const auto& r : rows_) s += r.size();
  return s;
}

Eigen::MatrixXd DependenceMatrix::to_dense() const {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(size(), size());
  for (Index i = 0; i < size(); ++i)
    for (Index j : rows_[i]) D(i, j) = 1.0;
  return D;
}

// ---------------------------------------------------------------------------

InterferenceGraph detect_interference(const PotentialOutcomeOracle& oracle, Index limit) {
  const Index n = oracle.size();
  if (n > limit || n > 30)
    throw TooLargeForExactDetection("exact detection needs n <= " + std::to_string(limit) +
                                    ", got " + std::to_string(n));
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<Eigen::VectorXd> table(count);
  for (std::uint64_t m = 0; m < count; ++m) table[m] = oracle.evaluate(AssignmentVector::from_mask(n, m));
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> I =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t m = 0; m < count; ++m) {
      if (m & bit) continue;
      const auto& a = table[m];
      const auto& b = table[m | bit];
      for (Index j = 0; j < n; ++j)
        if (a[j] != b[j]) I(i, j) = true;
    }
  }
  return InterferenceGraph::from_dense(I);
}

DependenceMatrix dependence_matrix(const InterferenceGraph& graph) {
  const Index n = graph.size();
  std::vector<std::vector<Index>> rows(static_cast<std::size_t>(n));
  std::vector<Index> stamp(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    auto& row = rows[i];
    for (Index l : graph.interferers_of(i))
      for (Index j : graph.affected_by(l))
        if (stamp[j] != i) {
          stamp[j] = i;
          row.push_back(j);
        }
    std::sort(row.begin(), row.end());
  }
  return DependenceMatrix(std::move(rows));
}

double c_moment(const InterferenceGraph& graph, double p) {
  if (std::isnan(p) || p < 1.0) throw InvalidArgument("moment order must be at least 1");
  const Index n = graph.size();
  if (std::isinf(p)) {
    Index m = 0;
    for (Index i = 0; i < n; ++i) m = std::max(m, graph.count(i));
    return static_cast<double>(m);
  }
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += std::pow(static_cast<double>(graph.count(i)), p);
  return std::pow(s / static_cast<double>(n), 1.0 / p);
}

PairMetrics pair_metrics(const InterferenceGraph& graph, const std::vector<Index>& partner) {
  return pair_metrics(graph, dependence_matrix(graph), partner);
}

PairMetrics pair_metrics(const InterferenceGraph& graph, const DependenceMatrix& D,
                         const std::vector<Index>& partner) {
  const Index n = graph.size();
  if (static_cast<Index>(partner.size()) != n) throw DimensionMismatch("pairing length differs from n");
  for (Index i = 0; i < n; ++i) {
    const Index j = partner[i];
    if (j < 0 || j >= n || j == i || partner[j] != i)
      throw InvalidArgument("pairing must be a fixed-point-free involution");
  }
  std::vector<Index> stamp(static_cast<std::size_t>(n), -1);
  std::size_t e_total = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index l : graph.interferers_of(i))
      for (Index j : graph.affected_by(partner[l]))
        if (stamp[j] != i) {
          stamp[j] = i;
          if (!D.contains(i, j)) ++e_total;
        }
  }
  Index r_sum = 0;
  for (Index i = 0; i < n; ++i)
    if (graph.interferes(partner[i], i)) ++r_sum;
  return {static_cast<double>(e_total) / static_cast<double>(n), r_sum};
}

double spectral_radius(const DependenceMatrix& D, double tol, long max_iter) {
  const Index n = D.size();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd y(n);
  double prev = -1.0;
  for (long it = 0; it < max_iter; ++it) {
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j : D.row(i)) s += x[j];
      y[i] = s;
    }
    const double rq = x.dot(y);
    if (std::abs(rq - prev) < tol * std::max(1.0, rq)) return rq;
    prev = rq;
    x = y / y.norm();
  }
  throw NotConverged(max_iter);
}

InterferenceSummary summarize_interference(const InterferenceGraph& graph,
                                           const SummaryOptions& options) {
  const auto D = dependence_matrix(graph);
  InterferenceSummary s;
  s.d_avg = D.average();
  s.d_max = D.max_degree();
  s.d_rms = D.rms();
  if (options.spectral) s.lambda1 = spectral_radius(D);
  for (double p : options.c_powers) s.c_moments[p] = c_moment(graph, p);
  if (options.pairing) {
    const auto pm = pair_metrics(graph, D, *options.pairing);
    s.e_avg = pm.e_avg;
    s.r_sum = pm.r_sum;
  }
  return s;
}

// ---------------------------------------------------------------------------

InterferenceGraph read_edge_list(std::istream& in, std::optional<Index> n) {
  auto table = detail::read_csv(in, {"src", "dst"});
  std::vector<std::pair<Index, Index>> edges;
  Index max_seen = 0;
  for (const auto& row : table.rows) {
    const long s = detail::parse_int(row.fields[0], row.line);
    const long d = detail::parse_int(row.fields[1], row.line);
    if (s < 1 || d < 1) throw ParseError("unit indices are 1-based", row.line);
    if (n && (s > *n || d > *n)) throw ParseError("unit index exceeds n = " + std::to_string(*n), row.line);
    max_seen = std::max<Index>(max_seen, std::max<Index>(s, d));
    edges.emplace_back(s - 1, d - 1);
  }
  const Index size = n ? *n : max_seen;
  if (size <= 0) throw ParseError("cannot infer n from an empty edge list", 0);
  return InterferenceGraph::from_edges(size, edges);
}

InterferenceGraph read_edge_list_file(const std::string& path, std::optional<Index> n) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_edge_list(f, n);
}

void write_edge_list(std::ostream& out, const InterferenceGraph& graph) {
  out << "src,dst\n";
  for (Index i = 0; i < graph.size(); ++i)
    for (Index j : graph.affected_by(i)) out << i + 1 << ',' << j + 1 << '\n';
}

}  // namespace eate
