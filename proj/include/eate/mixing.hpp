#pragma once

#include <map>
#include <utility>
#include <vector>

#include "eate/core.hpp"
#include "eate/designs.hpp"

namespace eate {

/// Exact alpha(X, Y) for X = Z restricted to `left`, Y = Z restricted to
/// `right`, Z drawn from `support`. Atoms with identical conditional laws are
/// merged and independent atoms dropped before the event scan; the scan runs
/// over subsets of the smaller side and throws SupportTooLarge when that side
/// still has more than `max_atoms` atoms.
double alpha_between(const std::vector<SupportPoint>& support, const std::vector<Index>& left,
                     const std::vector<Index>& right, int max_atoms = 20);

/// alpha(Z~_i, Z~_j) where Z~_i collects the treatments of units interfering with i.
double alpha_pair(const std::vector<SupportPoint>& support, const InterferenceGraph& graph,
                  Index i, Index j, int max_atoms = 20);
double alpha_pair(const Design& design, const InterferenceGraph& graph, Index i, Index j,
                  double limit = 1 << 20);

/// alpha(Z_i, Z~_{-i}); Z~_{-i} leaves out unit i itself.
double alpha_internal(const std::vector<SupportPoint>& support, const InterferenceGraph& graph,
                      Index i, int max_atoms = 20);
double alpha_internal(const Design& design, const InterferenceGraph& graph, Index i,
                      double limit = 1 << 20);

struct MixingReport {
  double alpha_ext = 0.0;
  double alpha_int = 0.0;
  /// Only pairs with d_ij = 0 are stored.
  std::map<std::pair<Index, Index>, double> pair_alphas;
  std::vector<double> unit_alphas;
  double q = RegularityConstants::kInfinity;
  double s = RegularityConstants::kInfinity;
};

/// a^e with 0^e = 0 for every e, including e = 0.
double mixing_power(double a, double e);

MixingReport mixing_coefficients(const Design& design, const InterferenceGraph& graph,
                                 const RegularityConstants& constants = {},
                                 double limit = 1 << 20);

}  // namespace eate
