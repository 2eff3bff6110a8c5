#include "mixest/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "mixest/error.hpp"

namespace mixest {

double Coupling::marginal_error(std::span<const double> supply,
                                std::span<const double> demand) const {
  double err = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
    err = std::max(err, std::abs(s - supply[i]));
  }
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, j);
    err = std::max(err, std::abs(s - demand[j]));
  }
  return err;
}

namespace {

// Basis of a transportation tableau. Node ids: rows are [0, m), columns [m, m+n).
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t n, std::span<const double> cost)
      : m_(m), n_(n), cost_(cost), flow_(m * n, 0.0), basic_(m * n, false) {}

  void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> s(supply.begin(), supply.end());
    std::vector<double> d(demand.begin(), demand.end());
    std::size_t i = 0, j = 0;
    while (i < m_ && j < n_) {
      const double f = std::max(0.0, std::min(s[i], d[j]));
      flow_[i * n_ + j] = f;
      basic_[i * n_ + j] = true;
      s[i] -= f;
      d[j] -= f;
      if (i == m_ - 1)
        ++j;
      else if (j == n_ - 1)
        ++i;
      else if (s[i] <= d[j])
        ++i;
      else
        ++j;
    }
  }

  // Returns false when the current basis is optimal.
  bool pivot(double tol) {
    compute_potentials();
    std::size_t enter = kNone;
    for (std::size_t c = 0; c < m_ * n_; ++c) {
      if (basic_[c]) continue;
      const double reduced = cost_[c] - u_[c / n_] - v_[c % n_];
      if (reduced < -tol) {  // Bland: first improving cell in index order
        enter = c;
        break;
      }
    }
    if (enter == kNone) return false;

    const std::vector<std::size_t> path = tree_path(enter / n_, m_ + enter % n_);
    // path[0] is adjacent to the entering column and receives -theta; signs alternate.
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) theta = std::min(theta, flow_[path[k]]);
    std::size_t leave = kNone;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (flow_[path[k]] == theta && (leave == kNone || path[k] < leave)) leave = path[k];
    }
    for (std::size_t k = 0; k < path.size(); ++k) flow_[path[k]] += (k % 2 == 0) ? -theta : theta;
    flow_[enter] = theta;
    basic_[enter] = true;
    basic_[leave] = false;
    flow_[leave] = 0.0;
    return true;
  }

  Coupling plan() const {
    Coupling q(m_, n_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) q(i, j) = std::max(0.0, flow_[i * n_ + j]);
    return q;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void compute_potentials() {
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<bool> seen(m_ + n_, false);
    std::queue<std::size_t> todo;
    todo.push(0);
    seen[0] = true;
    while (!todo.empty()) {
      const std::size_t node = todo.front();
      todo.pop();
      if (node < m_) {
        for (std::size_t j = 0; j < n_; ++j) {
          if (basic_[node * n_ + j] && !seen[m_ + j]) {
            v_[j] = cost_[node * n_ + j] - u_[node];
            seen[m_ + j] = true;
            todo.push(m_ + j);
          }
        }
      } else {
        const std::size_t j = node - m_;
        for (std::size_t i = 0; i < m_; ++i) {
          if (basic_[i * n_ + j] && !seen[i]) {
            u_[i] = cost_[i * n_ + j] - v_[j];
            seen[i] = true;
            todo.push(i);
          }
        }
      }
    }
  }

  // Cells on the tree path from column node `from` to row node `to`.
  std::vector<std::size_t> tree_path(std::size_t to_row, std::size_t from_col) const {
    const std::size_t nodes = m_ + n_;
    std::vector<std::size_t> parent(nodes, kNone), via(nodes, kNone);
    std::queue<std::size_t> todo;
    todo.push(from_col);
    parent[from_col] = from_col;
    while (!todo.empty()) {
      const std::size_t node = todo.front();
      todo.pop();
      if (node == to_row) break;
      auto visit = [&](std::size_t next, std::size_t cell) {
        if (basic_[cell] && parent[next] == kNone) {
          parent[next] = node;
          via[next] = cell;
          todo.push(next);
        }
      };
      if (node < m_) {
        for (std::size_t j = 0; j < n_; ++j) visit(m_ + j, node * n_ + j);
      } else {
        for (std::size_t i = 0; i < m_; ++i) visit(i, i * n_ + (node - m_));
      }
    }
    if (parent[to_row] == kNone) throw NumericalError("transport basis is not a spanning tree");
    std::vector<std::size_t> cells;
    for (std::size_t node = to_row; node != from_col; node = parent[node]) cells.push_back(via[node]);
    std::reverse(cells.begin(), cells.end());
    return cells;
  }

  std::size_t m_, n_;
  std::span<const double> cost_;
  std::vector<double> flow_;
  std::vector<bool> basic_;
  std::vector<double> u_, v_;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0) throw InputError("transport: empty marginal");
  if (cost.size() != m * n) throw InputError("transport: cost matrix has wrong size");

  double scale = 0.0;
  for (double c : cost) {
    if (!std::isfinite(c)) throw InputError("transport: non-finite cost");
    scale = std::max(scale, std::abs(c));
  }
  const double tol = 1e-12 * (1.0 + scale);

  Tableau tableau(m, n, cost);
  tableau.northwest_corner(supply, demand);
  TransportSolution out;
  const std::size_t max_pivots = 100 * (m + n) * (m + n) + 1000;
  while (tableau.pivot(tol)) {
    if (++out.pivots > max_pivots) throw NumericalError("transport simplex did not terminate");
  }
  out.plan = tableau.plan();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.cost += out.plan(i, j) * cost[i * n + j];
  return out;
}

}  // namespace mixest
