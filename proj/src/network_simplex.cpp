#include "kdenoise/network_simplex.hpp"

#include "kdenoise/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace kdenoise {

namespace {

// Spanning-tree basis over m row nodes [0, m) and n column nodes [m, m + n).
class TransportTree {
 public:
  TransportTree(Eigen::Index m, Eigen::Index n)
      : m_(m), n_(n), adj_(static_cast<std::size_t>(m + n)) {}

  struct Cell {
    Eigen::Index row;
    Eigen::Index col;
    double flow;
  };

  void add(Eigen::Index i, Eigen::Index j, double flow) {
    const int id = static_cast<int>(cells_.size());
    cells_.push_back({i, j, flow});
    adj_[static_cast<std::size_t>(i)].push_back(id);
    adj_[static_cast<std::size_t>(m_ + j)].push_back(id);
  }

  // Replace cell `id` in place with (i, j) carrying `flow`.
  void replace(int id, Eigen::Index i, Eigen::Index j, double flow) {
    auto drop = [&](std::size_t node) {
      auto& v = adj_[node];
      v.erase(std::find(v.begin(), v.end(), id));
    };
    drop(static_cast<std::size_t>(cells_[static_cast<std::size_t>(id)].row));
    drop(static_cast<std::size_t>(m_ + cells_[static_cast<std::size_t>(id)].col));
    cells_[static_cast<std::size_t>(id)] = {i, j, flow};
    adj_[static_cast<std::size_t>(i)].push_back(id);
    adj_[static_cast<std::size_t>(m_ + j)].push_back(id);
  }

  // Potentials with u_0 = 0 and u_i + v_j = c_ij on basic cells; also fills
  // the parent cell / depth arrays used for cycle search.
  void compute_potentials(const Matrix& cost, Vector& u, Vector& v) {
    const auto total = static_cast<std::size_t>(m_ + n_);
    parent_cell_.assign(total, -1);
    depth_.assign(total, -1);
    pot_.assign(total, 0.0);
    order_.clear();
    order_.push_back(0);
    depth_[0] = 0;
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const int node = order_[head];
      for (int id : adj_[static_cast<std::size_t>(node)]) {
        const Cell& c = cells_[static_cast<std::size_t>(id)];
        const int other = node < m_ ? static_cast<int>(m_ + c.col) : static_cast<int>(c.row);
        if (depth_[static_cast<std::size_t>(other)] >= 0) continue;
        depth_[static_cast<std::size_t>(other)] = depth_[static_cast<std::size_t>(node)] + 1;
        parent_cell_[static_cast<std::size_t>(other)] = id;
        // Row potential u and column potential v satisfy u + v = c.
        pot_[static_cast<std::size_t>(other)] =
            cost(c.row, c.col) - pot_[static_cast<std::size_t>(node)];
        order_.push_back(other);
      }
    }
    if (order_.size() != total) {
      throw Error(ErrorCode::kInvalidConfig, "network simplex basis is not a spanning tree");
    }
    for (Eigen::Index i = 0; i < m_; ++i) u(i) = pot_[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n_; ++j) v(j) = pot_[static_cast<std::size_t>(m_ + j)];
  }

  // Cells of the tree path from row node i to column node m + j, in order
  // starting at the column side. Position parity gives the cycle sign when
  // the entering cell (i, j) closes the cycle: even positions lose flow.
  std::vector<int> path_from_col_to_row(Eigen::Index i, Eigen::Index j) const {
    int a = static_cast<int>(m_ + j);
    int b = static_cast<int>(i);
    std::vector<int> from_a;
    std::vector<int> from_b;
    while (a != b) {
      if (depth_[static_cast<std::size_t>(a)] >= depth_[static_cast<std::size_t>(b)]) {
        const int id = parent_cell_[static_cast<std::size_t>(a)];
        from_a.push_back(id);
        a = other_end(id, a);
      } else {
        const int id = parent_cell_[static_cast<std::size_t>(b)];
        from_b.push_back(id);
        b = other_end(id, b);
      }
    }
    from_a.insert(from_a.end(), from_b.rbegin(), from_b.rend());
    return from_a;
  }

  std::vector<Cell>& cells() { return cells_; }
  const std::vector<Cell>& cells() const { return cells_; }

 private:
  int other_end(int id, int node) const {
    const Cell& c = cells_[static_cast<std::size_t>(id)];
    return node < m_ ? static_cast<int>(m_ + c.col) : static_cast<int>(c.row);
  }

  Eigen::Index m_;
  Eigen::Index n_;
  std::vector<Cell> cells_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_cell_;
  std::vector<int> depth_;
  std::vector<double> pot_;
  std::vector<int> order_;
};

}  // namespace

NetworkSimplexResult solve_transportation(const Vector& supply, const Vector& demand,
                                          const Matrix& cost,
                                          const NetworkSimplexOptions& opts) {
  const Eigen::Index m = supply.size();
  const Eigen::Index n = demand.size();
  if (cost.rows() != m || cost.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrix shape does not match marginals");
  }
  if (m == 0 || n == 0) {
    throw Error(ErrorCode::kInvalidMeasure, "transportation problem with an empty side");
  }
  if (!cost.allFinite()) {
    throw Error(ErrorCode::kInvalidConfig, "cost matrix has non-finite entries");
  }

  // Northwest-corner start: exactly m + n - 1 cells forming a spanning tree
  // (degenerate zero cells included).
  TransportTree tree(m, n);
  {
    std::vector<double> a(supply.data(), supply.data() + m);
    std::vector<double> b(demand.data(), demand.data() + n);
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    while (i < m && j < n) {
      const bool last_row = i == m - 1;
      const bool last_col = j == n - 1;
      double f = std::min(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
      if (last_row && last_col) f = a[static_cast<std::size_t>(i)];
      f = std::max(f, 0.0);
      tree.add(i, j, f);
      a[static_cast<std::size_t>(i)] -= f;
      b[static_cast<std::size_t>(j)] -= f;
      if (last_row && last_col) break;
      if (last_col || (!last_row && a[static_cast<std::size_t>(i)] <= b[static_cast<std::size_t>(j)])) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double cmax = cost.cwiseAbs().maxCoeff();
  const double tol = opts.pivot_tol * (1.0 + cmax);
  const std::size_t streak_limit =
      opts.degenerate_streak_limit > 0 ? opts.degenerate_streak_limit
                                       : static_cast<std::size_t>(20 * (m + n));

  NetworkSimplexResult res;
  Vector u(m);
  Vector v(n);
  std::size_t degenerate_streak = 0;
  bool bland = false;

  while (res.pivots < opts.max_pivots) {
    tree.compute_potentials(cost, u, v);

    Eigen::Index ei = -1;
    Eigen::Index ej = -1;
    double best = -tol;
    for (Eigen::Index i = 0; i < m && !(bland && ei >= 0); ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double r = cost(i, j) - u(i) - v(j);
        if (r < best) {
          ei = i;
          ej = j;
          if (bland) break;
          best = r;
        }
      }
    }
    if (ei < 0) {
      res.optimal = true;
      break;
    }

    const std::vector<int> path = tree.path_from_col_to_row(ei, ej);
    // Even positions along the path (starting at the column end) lose flow.
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const auto& c = tree.cells()[static_cast<std::size_t>(path[k])];
      const bool smaller = c.flow < theta;
      const bool tie = c.flow == theta;
      if (smaller) {
        theta = c.flow;
        leave = path[k];
      } else if (tie && bland) {
        const auto& cur = tree.cells()[static_cast<std::size_t>(leave)];
        if (c.row * n + c.col < cur.row * n + cur.col) leave = path[k];
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
      auto& c = tree.cells()[static_cast<std::size_t>(path[k])];
      c.flow += (k % 2 == 0) ? -theta : theta;
    }
    tree.replace(leave, ei, ej, theta);
    ++res.pivots;

    if (theta == 0.0) {
      if (++degenerate_streak > streak_limit) bland = true;
    } else {
      degenerate_streak = 0;
    }
  }
  res.used_bland = bland;

  res.flow = Matrix::Zero(m, n);
  for (const auto& c : tree.cells()) res.flow(c.row, c.col) += std::max(c.flow, 0.0);
  res.cost = (res.flow.array() * cost.array()).sum();
  return res;
}

}  // namespace kdenoise
