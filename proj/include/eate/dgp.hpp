#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eate/core.hpp"
#include "eate/designs.hpp"
#include "eate/metrics.hpp"
#include "eate/rng.hpp"

namespace eate {

enum class DgpKind { Group, Random, RandomWeighted, OneUnit, Adversarial };

const char* dgp_name(DgpKind kind);
DgpKind parse_dgp_kind(const std::string& name);

struct DgpSpec {
  DgpKind kind = DgpKind::Group;
  Index n = 100;
  double a_n = 1.0;
  std::uint64_t seed = 1;
};

/// sum_{j in G} w_j (2 z_j - 1); unit weights when `weights` is null.
double balance(std::span<const Index> g_set, const AssignmentVector& z,
               const Eigen::VectorXd* weights = nullptr);

/// y_i = e(bal(G_i)) z_i + X_i + eps_i with e = 2, 1, 0 for positive, zero
/// and negative balance. Interference sets are either contiguous groups or
/// explicit lists.
class BalanceOracle final : public PotentialOutcomeOracle {
 public:
  /// Group labels must be nondecreasing in the unit index.
  static std::shared_ptr<BalanceOracle> groups(std::vector<Index> labels, Eigen::VectorXd x,
                                               Eigen::VectorXd eps);
  static std::shared_ptr<BalanceOracle> sets(std::vector<std::vector<Index>> g_sets,
                                             Eigen::VectorXd x, Eigen::VectorXd eps,
                                             std::optional<Eigen::VectorXd> weights = std::nullopt);

  Index size() const override { return x_.size(); }
  Eigen::VectorXd evaluate(const AssignmentVector& z) const override;
  Eigen::VectorXd unit_effects(const AssignmentVector& z) const override;
  std::optional<InterferenceGraph> declared_graph() const override { return graph(); }

  /// bal(G_i) for every unit.
  Eigen::VectorXd balances(const AssignmentVector& z) const;
  std::vector<std::vector<Index>> g_sets() const;
  InterferenceGraph graph() const;
  bool is_grouped() const noexcept { return !labels_.empty(); }
  const std::vector<Index>& labels() const noexcept { return labels_; }

 private:
  BalanceOracle() = default;

  Eigen::VectorXd x_, eps_;
  std::vector<Index> labels_;
  std::vector<std::vector<Index>> sets_;
  std::optional<Eigen::VectorXd> weights_;
};

/// Outcomes of the non-consistency construction: the first K = ceil(sqrt(lambda) n)
/// units carry (n/K) z_1 (z_i p_i - (1 - z_i)(1 - p_i)); the rest are zero.
class AdversarialOracle final : public PotentialOutcomeOracle {
 public:
  AdversarialOracle(Eigen::VectorXd p, double lambda);

  Index size() const override { return p_.size(); }
  Eigen::VectorXd evaluate(const AssignmentVector& z) const override;
  Eigen::VectorXd unit_effects(const AssignmentVector& z) const override;
  std::optional<InterferenceGraph> declared_graph() const override;

  Index block() const noexcept { return k_; }
  double scale() const noexcept { return scale_; }

 private:
  Eigen::VectorXd p_;
  Index k_;
  double scale_;
};

struct DgpInstance {
  DgpSpec spec;
  std::shared_ptr<const PotentialOutcomeOracle> oracle;
  /// Set for every kind except Adversarial.
  std::shared_ptr<const BalanceOracle> balance_oracle;
  Eigen::VectorXd x;
  Eigen::VectorXd eps;
  std::optional<Eigen::VectorXd> lambda;
  /// Bound on |tau_i(z)|.
  double k_tau = 2.0;

  InterferenceGraph graph() const;
  std::vector<std::vector<Index>> g_sets() const;
  /// Interference summary; uses closed forms for grouped structures.
  InterferenceSummary summary(bool spectral = true) const;
};

/// Group labels ceil(i / a_n) for 1-based i, returned 0-based.
std::vector<Index> group_labels(Index n, double a_n);

DgpInstance make_group_dgp(const DgpSpec& spec);
DgpInstance make_group_dgp(const DgpSpec& spec, Stream& rng);
DgpInstance make_random_dgp(const DgpSpec& spec, bool weighted);
DgpInstance make_random_dgp(const DgpSpec& spec, bool weighted, Stream& rng);
DgpInstance make_oneunit_dgp(const DgpSpec& spec);
DgpInstance make_oneunit_dgp(const DgpSpec& spec, Stream& rng);
DgpInstance make_adversarial_dgp(Index n, double lambda, const Design& design);

/// Dispatches on spec.kind (Adversarial excluded).
DgpInstance make_dgp(const DgpSpec& spec, Stream& rng);
DgpInstance make_dgp(const DgpSpec& spec);

/// Random interference sets: j in G_i independently with probability (a_n - 1)/(n - 1).
std::vector<std::vector<Index>> random_g_sets(Index n, double a_n, Stream& rng);

/// n - (n-1) (1 - p)^n (1 + p)^(n-2) with p = (a_n - 1)/(n - 1).
double expected_davg_random(Index n, double a_n);

}  // namespace eate
