#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "eate/core.hpp"
#include "eate/rng.hpp"

namespace eate {

struct SupportPoint {
  AssignmentVector z;
  double probability;
};

struct Bernoulli {
  Eigen::VectorXd p;
};

struct Complete {
  Index n;
  Index m;
};

/// partner[i] = rho(i), 0-based.
struct Paired {
  std::vector<Index> partner;
};

struct Explicit {
  std::vector<SupportPoint> support;
  std::vector<double> cdf;
};

enum class DesignKind { Bernoulli, Complete, Paired, Explicit };

class Design {
 public:
  using Variant = std::variant<Bernoulli, Complete, Paired, Explicit>;

  static Design bernoulli(Index n, double p);
  static Design bernoulli(Eigen::VectorXd p);
  static Design complete(Index n, Index m);
  /// m = floor(p n).
  static Design complete_fraction(Index n, double p);
  static Design paired(std::vector<Index> partner);
  /// Zero-probability points are dropped; duplicates are rejected.
  static Design explicit_support(std::vector<SupportPoint> points);

  Index size() const noexcept { return n_; }
  DesignKind kind() const noexcept { return static_cast<DesignKind>(v_.index()); }
  const Variant& variant() const noexcept { return v_; }
  std::string name() const;

 private:
  Design(Index n, Variant v) : n_(n), v_(std::move(v)) {}
  Index n_;
  Variant v_;
};

const char* kind_name(DesignKind kind);

AssignmentVector sample(const Design& design, Stream& rng);
/// Writes into an existing vector of the right length.
void sample_into(const Design& design, Stream& rng, AssignmentVector& z);

double marginal_prob(const Design& design, Index i);
Eigen::VectorXd marginal_probs(const Design& design);

/// Number of support points (as a double so huge supports do not overflow).
double support_size(const Design& design);

/// Full support with exact probabilities. Throws SupportTooLarge when the
/// support has more than `limit` points.
std::vector<SupportPoint> enumerate_support(const Design& design, double limit = 1 << 20);

/// Ranks units by the covariate and pairs neighbours in rank order. n even.
std::vector<Index> adjacent_pairs(const Eigen::VectorXd& covariate);

/// Validates a fixed-point-free involution; throws InvalidArgument.
void validate_pairing(const std::vector<Index>& partner);

Design parse_design_json(const std::string& text);
Design read_design_file(const std::string& path);
std::string design_to_json(const Design& design);

}  // namespace eate
