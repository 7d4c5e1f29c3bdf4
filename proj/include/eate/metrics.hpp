#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eate/core.hpp"

namespace eate {

/// d_ij = 1 iff some unit interferes with both i and j. Symmetric, diagonal
/// set, stored as sorted rows.
class DependenceMatrix {
 public:
  explicit DependenceMatrix(std::vector<std::vector<Index>> rows);

  Index size() const noexcept { return static_cast<Index>(rows_.size()); }
  std::span<const Index> row(Index i) const { return rows_[i]; }
  bool contains(Index i, Index j) const;
  /// d_i: number of units i is dependent with, itself included.
  Index degree(Index i) const { return static_cast<Index>(rows_[i].size()); }
  double average() const;
  Index max_degree() const;
  double rms() const;
  std::size_t nonzeros() const;

  Eigen::MatrixXd to_dense() const;

 private:
  std::vector<std::vector<Index>> rows_;
};

/// Exact I by toggling every coordinate in every context. Throws
/// TooLargeForExactDetection when n > limit.
InterferenceGraph detect_interference(const PotentialOutcomeOracle& oracle, Index limit = 12);

DependenceMatrix dependence_matrix(const InterferenceGraph& graph);

/// C_(p) = (n^-1 sum c_i^p)^(1/p); p = infinity gives max c_i.
double c_moment(const InterferenceGraph& graph, double p);

struct PairMetrics {
  double e_avg;
  Index r_sum;
};

PairMetrics pair_metrics(const InterferenceGraph& graph, const std::vector<Index>& partner);
PairMetrics pair_metrics(const InterferenceGraph& graph, const DependenceMatrix& D,
                         const std::vector<Index>& partner);

/// Largest eigenvalue of D by power iteration from the all-ones vector.
double spectral_radius(const DependenceMatrix& D, double tol = 1e-13, long max_iter = 100000);

struct InterferenceSummary {
  double d_avg = 1.0;
  Index d_max = 1;
  double d_rms = 1.0;
  std::optional<double> lambda1;
  std::map<double, double> c_moments;
  std::optional<double> e_avg;
  std::optional<Index> r_sum;
};

struct SummaryOptions {
  bool spectral = true;
  std::vector<double> c_powers{1.0, 2.0, RegularityConstants::kInfinity};
  std::optional<std::vector<Index>> pairing;
};

InterferenceSummary summarize_interference(const InterferenceGraph& graph,
                                           const SummaryOptions& options = {});

/// `src,dst` edge list, 1-based. When n is absent it is the largest index seen.
InterferenceGraph read_edge_list(std::istream& in, std::optional<Index> n = std::nullopt);
InterferenceGraph read_edge_list_file(const std::string& path, std::optional<Index> n = std::nullopt);
void write_edge_list(std::ostream& out, const InterferenceGraph& graph);

}  // namespace eate
