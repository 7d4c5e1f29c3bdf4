#include "eate/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eate/error.hpp"

namespace eate {

namespace {

struct Cell {
  int i;
  int j;
  double flow;
};

class Basis {
 public:
  Basis(int m, int k) : m_(m), k_(k), adj_(static_cast<std::size_t>(m + k)) {}

  int add(int i, int j, double flow) {
    const int id = static_cast<int>(cells_.size());
    cells_.push_back({i, j, flow});
    adj_[i].push_back(id);
    adj_[m_ + j].push_back(id);
    return id;
  }

  // Replaces cell `id` by (i, j) with the given flow.
  void replace(int id, int i, int j, double flow) {
    detach(cells_[id].i, id);
    detach(m_ + cells_[id].j, id);
    cells_[id] = {i, j, flow};
    adj_[i].push_back(id);
    adj_[m_ + j].push_back(id);
  }

  void potentials(const Eigen::MatrixXd& cost, Eigen::VectorXd& u, Eigen::VectorXd& v) {
    const int nodes = m_ + k_;
    seen_.assign(static_cast<std::size_t>(nodes), 0);
    stack_.clear();
    u.setZero(m_);
    v.setZero(k_);
    seen_[0] = 1;
    stack_.push_back(0);
    while (!stack_.empty()) {
      const int node = stack_.back();
      stack_.pop_back();
      for (int id : adj_[node]) {
        const auto& c = cells_[id];
        const int other = node < m_ ? m_ + c.j : c.i;
        if (seen_[other]) continue;
        seen_[other] = 1;
        if (node < m_)
          v[c.j] = cost(c.i, c.j) - u[c.i];
        else
          u[c.i] = cost(c.i, c.j) - v[c.j];
        stack_.push_back(other);
      }
    }
  }

  // Basic cells on the tree path from row node r to column node s, in order
  // starting at the cell touching r.
  std::vector<int> path(int r, int s) {
    const int nodes = m_ + k_;
    parent_cell_.assign(static_cast<std::size_t>(nodes), -1);
    seen_.assign(static_cast<std::size_t>(nodes), 0);
    stack_.clear();
    seen_[r] = 1;
    stack_.push_back(r);
    const int target = m_ + s;
    while (!stack_.empty() && !seen_[target]) {
      const int node = stack_.back();
      stack_.pop_back();
      for (int id : adj_[node]) {
        const auto& c = cells_[id];
        const int other = node < m_ ? m_ + c.j : c.i;
        if (seen_[other]) continue;
        seen_[other] = 1;
        parent_cell_[other] = id;
        stack_.push_back(other);
      }
    }
    if (!seen_[target]) throw Error("transport basis is not a spanning tree");
    std::vector<int> out;
    int node = target;
    while (node != r) {
      const int id = parent_cell_[node];
      out.push_back(id);
      const auto& c = cells_[id];
      node = node < m_ ? m_ + c.j : c.i;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::vector<Cell>& cells() { return cells_; }

 private:
  void detach(int node, int id) {
    auto& a = adj_[node];
    a.erase(std::find(a.begin(), a.end(), id));
  }

  int m_, k_;
  std::vector<Cell> cells_;
  std::vector<std::vector<int>> adj_;
  std::vector<char> seen_;
  std::vector<int> stack_;
  std::vector<int> parent_cell_;
};

}  // namespace

TransportResult solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                const Eigen::MatrixXd& cost, long max_pivots) {
  const int m = static_cast<int>(supply.size());
  const int k = static_cast<int>(demand.size());
  if (m == 0 || k == 0) throw InvalidArgument("transport needs nonempty supply and demand");
  if (cost.rows() != m || cost.cols() != k) throw DimensionMismatch("cost matrix shape mismatch");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any())
    throw InvalidArgument("supplies and demands must be nonnegative");
  const double total = supply.sum();
  if (std::abs(total - demand.sum()) > 1e-9 * std::max(1.0, total))
    throw InvalidArgument("supply and demand totals differ");

  Basis basis(m, k);
  {
    Eigen::VectorXd ra = supply, rb = demand;
    int i = 0, j = 0;
    for (;;) {
      const double x = std::min(ra[i], rb[j]);
      ra[i] -= x;
      rb[j] -= x;
      basis.add(i, j, x);
      if (i == m - 1 && j == k - 1) break;
      if (i == m - 1)
        ++j;
      else if (j == k - 1)
        ++i;
      else if (ra[i] <= rb[j])
        ++i;
      else
        ++j;
    }
  }

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  const long cells = static_cast<long>(m) * k;
  const long block = std::max<long>(k, static_cast<long>(std::sqrt(static_cast<double>(cells))));

  TransportResult res;
  Eigen::VectorXd u, v;
  long cursor = 0;
  long degenerate_streak = 0;
  for (;;) {
    basis.potentials(cost, u, v);
    const bool bland = degenerate_streak > 50;
    // Entering cell.
    long best_idx = -1;
    double best = -tol;
    long scanned = 0;
    while (scanned < cells) {
      const long stop = std::min(cells, scanned + block);
      for (; scanned < stop; ++scanned) {
        const long idx = bland ? scanned : (cursor + scanned) % cells;
        const int i = static_cast<int>(idx / k), j = static_cast<int>(idx % k);
        const double d = cost(i, j) - u[i] - v[j];
        if (d < best) {
          best = d;
          best_idx = idx;
          if (bland) break;
        }
      }
      if (best_idx >= 0) break;
    }
    if (best_idx < 0) break;
    if (!bland) cursor = (best_idx + 1) % cells;
    if (++res.pivots > max_pivots) throw NotConverged(max_pivots);

    const int r = static_cast<int>(best_idx / k), s = static_cast<int>(best_idx % k);
    const auto path = basis.path(r, s);
    // Path cells alternate: first gets -theta, then +theta, ...
    auto& cl = basis.cells();
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < path.size(); q += 2) {
      const int id = path[q];
      if (cl[id].flow < theta || (cl[id].flow == theta && leave >= 0 &&
                                  (cl[id].i * k + cl[id].j) < (cl[leave].i * k + cl[leave].j))) {
        theta = cl[id].flow;
        leave = id;
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t q = 0; q < path.size(); ++q) {
      auto& c = cl[path[q]];
      c.flow += (q % 2 == 0) ? -theta : theta;
      if (c.flow < 0.0) c.flow = 0.0;
    }
    degenerate_streak = theta > 0.0 ? 0 : degenerate_streak + 1;
    basis.replace(leave, r, s, theta);
  }

  res.u = u;
  res.v = v;
  double c = 0.0;
  for (const auto& cell : basis.cells()) {
    if (cell.flow > 0.0) res.flows.push_back({cell.i, cell.j, cell.flow});
    c += cell.flow * cost(cell.i, cell.j);
  }
  res.cost = c;
  return res;
}

}  // namespace eate
