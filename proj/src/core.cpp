#include "eate/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "text_io.hpp"

namespace eate {

AssignmentVector::AssignmentVector(Index n) {
  if (n <= 0) throw InvalidArgument("assignment needs at least one unit");
  bits_ = Bits::Zero(n);
}

AssignmentVector::AssignmentVector(Bits bits) : bits_(std::move(bits)) {
  if (bits_.size() <= 0) throw InvalidArgument("assignment needs at least one unit");
  for (Index i = 0; i < bits_.size(); ++i)
    if (bits_[i] > 1) throw InvalidArgument("assignment entries must be 0 or 1");
}

AssignmentVector::AssignmentVector(std::initializer_list<int> bits) {
  if (bits.size() == 0) throw InvalidArgument("assignment needs at least one unit");
  bits_.resize(static_cast<Index>(bits.size()));
  Index i = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw InvalidArgument("assignment entries must be 0 or 1");
    bits_[i++] = static_cast<std::uint8_t>(b);
  }
}

AssignmentVector AssignmentVector::from_mask(Index n, std::uint64_t mask) {
  if (n > 64) throw InvalidArgument("mask form limited to 64 units");
  AssignmentVector z(n);
  for (Index i = 0; i < n; ++i) z.bits_[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
  return z;
}

bool AssignmentVector::at(Index i) const {
  if (i < 0 || i >= size()) throw IndexOutOfRange(static_cast<std::size_t>(i), size());
  return bits_[i] != 0;
}

void AssignmentVector::set(Index i, bool treated) {
  if (i < 0 || i >= size()) throw IndexOutOfRange(static_cast<std::size_t>(i), size());
  bits_[i] = treated ? 1 : 0;
}

AssignmentVector AssignmentVector::with(Index i, bool treated) const {
  AssignmentVector out = *this;
  out.set(i, treated);
  return out;
}

Index AssignmentVector::treated_count() const { return bits_.cast<Index>().sum(); }

std::uint64_t AssignmentVector::mask() const {
  if (size() > 64) throw InvalidArgument("mask form limited to 64 units");
  std::uint64_t m = 0;
  for (Index i = 0; i < size(); ++i)
    if (bits_[i]) m |= std::uint64_t{1} << i;
  return m;
}

std::string AssignmentVector::key() const {
  std::string k(static_cast<std::size_t>(size()), '0');
  for (Index i = 0; i < size(); ++i)
    if (bits_[i]) k[static_cast<std::size_t>(i)] = '1';
  return k;
}

// ---------------------------------------------------------------------------

InterferenceGraph::InterferenceGraph(Index n) {
  if (n <= 0) throw InvalidArgument("graph needs at least one unit");
  out_.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out_[i] = {i};
  in_ = out_;
}

void InterferenceGraph::rebuild_in() {
  in_.assign(out_.size(), {});
  for (std::size_t i = 0; i < out_.size(); ++i)
    for (Index j : out_[i]) in_[static_cast<std::size_t>(j)].push_back(static_cast<Index>(i));
}

InterferenceGraph InterferenceGraph::from_edges(Index n,
                                                std::span<const std::pair<Index, Index>> edges) {
  InterferenceGraph g(n);
  for (auto [s, d] : edges) {
    if (s < 0 || s >= n) throw IndexOutOfRange(static_cast<std::size_t>(s), n);
    if (d < 0 || d >= n) throw IndexOutOfRange(static_cast<std::size_t>(d), n);
    g.out_[s].push_back(d);
  }
  for (auto& row : g.out_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  g.rebuild_in();
  return g;
}

InterferenceGraph InterferenceGraph::from_dense(
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& I) {
  if (I.rows() != I.cols()) throw DimensionMismatch("interference matrix must be square");
  InterferenceGraph g(I.rows());
  for (Index i = 0; i < I.rows(); ++i) {
    g.out_[i].clear();
    for (Index j = 0; j < I.cols(); ++j)
      if (I(i, j) || i == j) g.out_[i].push_back(j);
  }
  g.rebuild_in();
  return g;
}

InterferenceGraph InterferenceGraph::from_interference_sets(
    const std::vector<std::vector<Index>>& sets) {
  const Index n = static_cast<Index>(sets.size());
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j : sets[i]) edges.emplace_back(j, i);
  return from_edges(n, edges);
}

bool InterferenceGraph::interferes(Index i, Index j) const {
  if (i < 0 || i >= size()) throw IndexOutOfRange(static_cast<std::size_t>(i), size());
  if (j < 0 || j >= size()) throw IndexOutOfRange(static_cast<std::size_t>(j), size());
  const auto& row = out_[i];
  return std::binary_search(row.begin(), row.end(), j);
}

std::size_t InterferenceGraph::edge_count() const {
  std::size_t e = 0;
  for (const auto& row : out_) e += row.size();
  return e;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> InterferenceGraph::to_dense() const {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> I =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(size(), size(), false);
  for (Index i = 0; i < size(); ++i)
    for (Index j : out_[i]) I(i, j) = true;
  return I;
}

// ---------------------------------------------------------------------------

void RegularityConstants::validate() const {
  if (!std::isfinite(k) || k < 2.0) throw InvalidArgument("k must be finite and at least 2");
  if (std::isnan(q) || q < 2.0) throw InvalidArgument("q must be at least 2");
  if (std::isnan(s) || s < 1.0) throw InvalidArgument("s must be at least 1");
}

ExperimentData::ExperimentData(AssignmentVector z_, Eigen::VectorXd y_, Eigen::VectorXd p_)
    : z(std::move(z_)), y(std::move(y_)), p(std::move(p_)) {
  if (y.size() != z.size() || p.size() != z.size())
    throw DimensionMismatch("z, y and p must have the same length");
  for (Index i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0 && p[i] < 1.0))
      throw InvalidArgument("marginal probability of unit " + std::to_string(i + 1) +
                            " must lie in (0,1)");
    if (!std::isfinite(y[i]))
      throw InvalidArgument("outcome of unit " + std::to_string(i + 1) + " is not finite");
  }
}

ExperimentData::ExperimentData(AssignmentVector z_, Eigen::VectorXd y_, Eigen::VectorXd p_,
                               const RegularityConstants& constants)
    : ExperimentData(std::move(z_), std::move(y_), std::move(p_)) {
  constants.validate();
  const double lo = 1.0 / constants.k;
  for (Index i = 0; i < p.size(); ++i)
    if (p[i] < lo || p[i] > 1.0 - lo)
      throw InvalidArgument("marginal probability of unit " + std::to_string(i + 1) +
                            " violates the regularity bound");
}

ExperimentData read_experiment_data(std::istream& in) {
  auto table = detail::read_csv(in, {"unit", "z", "y", "p"});
  const Index n = static_cast<Index>(table.rows.size());
  if (n == 0) throw ParseError("no data rows", 0);
  Bits z = Bits::Zero(n);
  Eigen::VectorXd y(n), p(n);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const auto& row : table.rows) {
    const long unit = detail::parse_int(row.fields[0], row.line);
    if (unit < 1 || unit > n) throw ParseError("unit index out of 1.." + std::to_string(n), row.line);
    if (seen[unit - 1]) throw ParseError("duplicate unit " + std::to_string(unit), row.line);
    seen[unit - 1] = true;
    const long zi = detail::parse_int(row.fields[1], row.line);
    if (zi != 0 && zi != 1) throw ParseError("z must be 0 or 1", row.line);
    z[unit - 1] = static_cast<std::uint8_t>(zi);
    y[unit - 1] = detail::parse_double(row.fields[2], row.line);
    p[unit - 1] = detail::parse_double(row.fields[3], row.line);
  }
  return ExperimentData(AssignmentVector(std::move(z)), std::move(y), std::move(p));
}

ExperimentData read_experiment_data_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_experiment_data(f);
}

// ---------------------------------------------------------------------------

double PotentialOutcomeOracle::outcome(Index i, const AssignmentVector& z) const {
  if (i < 0 || i >= size()) throw IndexOutOfRange(static_cast<std::size_t>(i), size());
  return evaluate(z)[i];
}

Eigen::VectorXd PotentialOutcomeOracle::unit_effects(const AssignmentVector& z) const {
  const Index n = size();
  if (z.size() != n) throw DimensionMismatch("assignment length differs from oracle size");
  Eigen::VectorXd tau(n);
  AssignmentVector w = z;
  for (Index i = 0; i < n; ++i) {
    const bool orig = w[i];
    w.set(i, true);
    const double y1 = evaluate(w)[i];
    w.set(i, false);
    const double y0 = evaluate(w)[i];
    w.set(i, orig);
    tau[i] = y1 - y0;
  }
  return tau;
}

FunctionOracle::FunctionOracle(Index n, Response response, std::optional<InterferenceGraph> graph)
    : n_(n), response_(std::move(response)), graph_(std::move(graph)) {
  if (n_ <= 0) throw InvalidArgument("oracle needs at least one unit");
  if (!response_) throw InvalidArgument("oracle needs a response function");
  if (graph_ && graph_->size() != n_) throw DimensionMismatch("declared graph size differs");
}

Eigen::VectorXd FunctionOracle::evaluate(const AssignmentVector& z) const {
  if (z.size() != n_) throw DimensionMismatch("assignment length differs from oracle size");
  Eigen::VectorXd y = response_(z);
  if (y.size() != n_) throw DimensionMismatch("response returned wrong length");
  return y;
}

double unit_effect(const PotentialOutcomeOracle& oracle, Index i, const AssignmentVector& z_rest) {
  if (z_rest.size() != oracle.size())
    throw DimensionMismatch("assignment length differs from oracle size");
  if (i < 0 || i >= oracle.size()) throw IndexOutOfRange(static_cast<std::size_t>(i), oracle.size());
  return oracle.outcome(i, z_rest.with(i, true)) - oracle.outcome(i, z_rest.with(i, false));
}

double assignment_ate(const PotentialOutcomeOracle& oracle, const AssignmentVector& z) {
  if (z.size() != oracle.size())
    throw DimensionMismatch("assignment length differs from oracle size");
  return oracle.unit_effects(z).mean();
}

}  // namespace eate
