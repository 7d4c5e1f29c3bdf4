#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eate/error.hpp"

namespace eate {

using Index = Eigen::Index;
using Bits = Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>;

/// Binary treatment vector z in {0,1}^n. Units are 0-based in the API and
/// 1-based in every text format.
class AssignmentVector {
 public:
  /// All-control assignment of n >= 1 units.
  explicit AssignmentVector(Index n);
  explicit AssignmentVector(Bits bits);
  AssignmentVector(std::initializer_list<int> bits);

  /// Bit i of `mask` becomes unit i. Requires n <= 64.
  static AssignmentVector from_mask(Index n, std::uint64_t mask);

  Index size() const noexcept { return bits_.size(); }
  bool operator[](Index i) const { return bits_[i] != 0; }
  bool at(Index i) const;
  void set(Index i, bool treated);
  AssignmentVector with(Index i, bool treated) const;

  Index treated_count() const;
  const Bits& bits() const noexcept { return bits_; }
  Eigen::VectorXd as_vector() const { return bits_.cast<double>().matrix(); }
  std::uint64_t mask() const;
  /// Byte string usable as a hash key.
  std::string key() const;

  friend bool operator==(const AssignmentVector& a, const AssignmentVector& b) {
    return a.bits_.size() == b.bits_.size() && (a.bits_ == b.bits_).all();
  }

 private:
  Bits bits_;
};

/// I[i][j] = true means unit i interferes with unit j. Stored as sorted
/// adjacency lists in both directions; the diagonal is always present.
class InterferenceGraph {
 public:
  /// Identity graph (no interference).
  explicit InterferenceGraph(Index n);

  static InterferenceGraph identity(Index n) { return InterferenceGraph(n); }
  /// Edges are (src, dst) pairs, 0-based; duplicates are ignored.
  static InterferenceGraph from_edges(Index n, std::span<const std::pair<Index, Index>> edges);
  static InterferenceGraph from_dense(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& I);
  /// Builds the graph from interference sets: j in sets[i] means I[j][i].
  static InterferenceGraph from_interference_sets(const std::vector<std::vector<Index>>& sets);

  Index size() const noexcept { return static_cast<Index>(out_.size()); }
  bool interferes(Index i, Index j) const;
  /// Units that i interferes with, including i.
  std::span<const Index> affected_by(Index i) const { return out_[i]; }
  /// Units that interfere with j, including j.
  std::span<const Index> interferers_of(Index j) const { return in_[j]; }
  /// c_i: how many units i interferes with.
  Index count(Index i) const { return static_cast<Index>(out_[i].size()); }
  std::size_t edge_count() const;

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> to_dense() const;

  friend bool operator==(const InterferenceGraph& a, const InterferenceGraph& b) {
    return a.out_ == b.out_;
  }

 private:
  InterferenceGraph() = default;
  void rebuild_in();

  std::vector<std::vector<Index>> out_;
  std::vector<std::vector<Index>> in_;
};

struct RegularityConstants {
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  double k = 2.0;
  double q = kInfinity;
  double s = kInfinity;

  /// Throws InvalidArgument unless k is finite and >= 2, q >= 2, s >= 1.
  void validate() const;
};

/// Observed experiment: assignment, outcomes and marginal probabilities.
struct ExperimentData {
  AssignmentVector z;
  Eigen::VectorXd y;
  Eigen::VectorXd p;

  ExperimentData(AssignmentVector z, Eigen::VectorXd y, Eigen::VectorXd p);
  /// Also enforces k^-1 <= p_i <= 1 - k^-1.
  ExperimentData(AssignmentVector z, Eigen::VectorXd y, Eigen::VectorXd p,
                 const RegularityConstants& constants);

  Index size() const noexcept { return z.size(); }
};

/// Strict `unit,z,y,p` reader. Units are 1-based and must cover 1..n once.
ExperimentData read_experiment_data(std::istream& in);
ExperimentData read_experiment_data_file(const std::string& path);

/// Ground-truth response surface y(z). Implementations must be re-entrant.
class PotentialOutcomeOracle {
 public:
  virtual ~PotentialOutcomeOracle() = default;

  virtual Index size() const = 0;
  virtual Eigen::VectorXd evaluate(const AssignmentVector& z) const = 0;

  virtual std::optional<InterferenceGraph> declared_graph() const { return std::nullopt; }

  /// y_i(z). Defaults to a view of evaluate().
  virtual double outcome(Index i, const AssignmentVector& z) const;

  /// tau_i(z_{-i}) for every unit; coordinate i of z is ignored for unit i.
  /// The default toggles each coordinate, costing 2n evaluations.
  virtual Eigen::VectorXd unit_effects(const AssignmentVector& z) const;
};

/// Oracle backed by a callable.
class FunctionOracle final : public PotentialOutcomeOracle {
 public:
  using Response = std::function<Eigen::VectorXd(const AssignmentVector&)>;

  FunctionOracle(Index n, Response response, std::optional<InterferenceGraph> graph = std::nullopt);

  Index size() const override { return n_; }
  Eigen::VectorXd evaluate(const AssignmentVector& z) const override;
  std::optional<InterferenceGraph> declared_graph() const override { return graph_; }

 private:
  Index n_;
  Response response_;
  std::optional<InterferenceGraph> graph_;
};

/// tau_i(z_{-i}) = y_i(1; z_{-i}) - y_i(0; z_{-i}).
double unit_effect(const PotentialOutcomeOracle& oracle, Index i, const AssignmentVector& z_rest);

/// tau_ATE(z): the unit-average of unit_effect.
double assignment_ate(const PotentialOutcomeOracle& oracle, const AssignmentVector& z);

}  // namespace eate
