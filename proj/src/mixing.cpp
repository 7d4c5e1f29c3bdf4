#include "eate/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <unordered_map>

#include "eate/metrics.hpp"

namespace eate {

namespace {

std::string project(const AssignmentVector& z, const std::vector<Index>& coords) {
  std::string k(coords.size(), '0');
  for (std::size_t c = 0; c < coords.size(); ++c)
    if (z[coords[c]]) k[c] = '1';
  return k;
}

using Table = std::vector<std::vector<double>>;

// alpha is the maximum of the bilinear form sum_{x in A, b in B} dev(x,b)
// over events A, B. Rows pointing the same way can only be taken together
// at the optimum, so they collapse into one; zero rows never matter.
Table merge_rows(const Table& dev) {
  constexpr double tol = 1e-13;
  Table merged, dirs;
  for (const auto& row : dev) {
    double norm = 0.0;
    for (double v : row) norm += std::abs(v);
    if (norm <= tol) continue;
    std::vector<double> dir(row.size());
    for (std::size_t b = 0; b < row.size(); ++b) dir[b] = row[b] / norm;
    std::size_t k = 0;
    for (; k < dirs.size(); ++k) {
      double diff = 0.0;
      for (std::size_t b = 0; b < row.size(); ++b) diff = std::max(diff, std::abs(dirs[k][b] - dir[b]));
      if (diff <= 1e-12) break;
    }
    if (k == dirs.size()) {
      dirs.push_back(std::move(dir));
      merged.emplace_back(row.size(), 0.0);
    }
    for (std::size_t b = 0; b < row.size(); ++b) merged[k][b] += row[b];
  }
  return merged;
}

Table transpose(const Table& t) {
  if (t.empty()) return {};
  Table out(t.front().size(), std::vector<double>(t.size()));
  for (std::size_t r = 0; r < t.size(); ++r)
    for (std::size_t c = 0; c < t[r].size(); ++c) out[c][r] = t[r][c];
  return out;
}

}  // namespace

double alpha_between(const std::vector<SupportPoint>& support, const std::vector<Index>& left,
                     const std::vector<Index>& right, int max_atoms) {
  if (left.empty() || right.empty()) return 0.0;
  std::unordered_map<std::string, std::size_t> xs, ys;
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  for (const auto& pt : support) {
    const auto kx = xs.emplace(project(pt.z, left), xs.size()).first->second;
    const auto ky = ys.emplace(project(pt.z, right), ys.size()).first->second;
    cells.emplace_back(kx, ky, pt.probability);
  }
  Table joint(xs.size(), std::vector<double>(ys.size(), 0.0));
  for (auto [x, y, p] : cells) joint[x][y] += p;
  std::vector<double> px(xs.size(), 0.0), py(ys.size(), 0.0);
  for (std::size_t x = 0; x < xs.size(); ++x)
    for (std::size_t b = 0; b < ys.size(); ++b) {
      px[x] += joint[x][b];
      py[b] += joint[x][b];
    }
  Table dev = joint;
  for (std::size_t x = 0; x < xs.size(); ++x)
    for (std::size_t b = 0; b < ys.size(); ++b) dev[x][b] -= px[x] * py[b];

  dev = merge_rows(dev);
  if (dev.empty()) return 0.0;
  dev = merge_rows(transpose(dev));
  if (dev.empty()) return 0.0;
  if (dev.front().size() < dev.size()) dev = transpose(dev);

  const std::size_t m = dev.size();
  const std::size_t width = dev.front().size();
  if (m > static_cast<std::size_t>(max_atoms))
    throw SupportTooLarge(static_cast<double>(m), static_cast<double>(max_atoms));

  // f(A) = f(complement of A), so the last atom stays out of A.
  std::vector<double> acc(width, 0.0);
  double best = 0.0;
  const std::uint64_t count = m <= 1 ? 1 : std::uint64_t{1} << (m - 1);
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < count; ++k) {
    const std::uint64_t g = k ^ (k >> 1);
    const std::uint64_t flip = g ^ gray;
    gray = g;
    const int atom = __builtin_ctzll(flip);
    const double sign = (g & flip) ? 1.0 : -1.0;
    double f = 0.0;
    for (std::size_t b = 0; b < width; ++b) {
      acc[b] += sign * dev[atom][b];
      if (acc[b] > 0.0) f += acc[b];
    }
    best = std::max(best, f);
  }
  return std::min(best, 0.25);
}

double alpha_pair(const std::vector<SupportPoint>& support, const InterferenceGraph& graph,
                  Index i, Index j, int max_atoms) {
  const auto li = graph.interferers_of(i);
  const auto lj = graph.interferers_of(j);
  return alpha_between(support, {li.begin(), li.end()}, {lj.begin(), lj.end()}, max_atoms);
}

double alpha_pair(const Design& design, const InterferenceGraph& graph, Index i, Index j,
                  double limit) {
  if (graph.size() != design.size()) throw DimensionMismatch("graph and design sizes differ");
  return alpha_pair(enumerate_support(design, limit), graph, i, j);
}

double alpha_internal(const std::vector<SupportPoint>& support, const InterferenceGraph& graph,
                      Index i, int max_atoms) {
  std::vector<Index> rest;
  for (Index l : graph.interferers_of(i))
    if (l != i) rest.push_back(l);
  return alpha_between(support, {i}, rest, max_atoms);
}

double alpha_internal(const Design& design, const InterferenceGraph& graph, Index i, double limit) {
  if (graph.size() != design.size()) throw DimensionMismatch("graph and design sizes differ");
  return alpha_internal(enumerate_support(design, limit), graph, i);
}

double mixing_power(double a, double e) {
  if (a <= 0.0) return 0.0;
  return std::pow(a, e);
}

MixingReport mixing_coefficients(const Design& design, const InterferenceGraph& graph,
                                 const RegularityConstants& constants, double limit) {
  constants.validate();
  if (graph.size() != design.size()) throw DimensionMismatch("graph and design sizes differ");
  const auto support = enumerate_support(design, limit);
  const auto D = dependence_matrix(graph);
  const Index n = graph.size();
  const double eq = std::isinf(constants.q) ? 1.0 : (constants.q - 2.0) / constants.q;
  const double es = std::isinf(constants.s) ? 1.0 : (constants.s - 1.0) / constants.s;

  MixingReport r;
  r.q = constants.q;
  r.s = constants.s;
  double ext = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (D.contains(i, j)) continue;
      const double a = alpha_pair(support, graph, i, j);
      r.pair_alphas[{i, j}] = a;
      ext += mixing_power(a, eq);
    }
  r.alpha_ext = ext / static_cast<double>(n);
  r.unit_alphas.resize(static_cast<std::size_t>(n));
  double in = 0.0;
  for (Index i = 0; i < n; ++i) {
    r.unit_alphas[i] = alpha_internal(support, graph, i);
    in += mixing_power(r.unit_alphas[i], es);
  }
  r.alpha_int = in;
  return r;
}

}  // namespace eate
