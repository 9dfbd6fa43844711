#include "capimac/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace capimac {

namespace {

struct SquareSolution {
  std::vector<double> u;          // row potentials
  std::vector<double> v;          // column potentials
  std::vector<std::size_t> row_of;  // column -> row
};

// Shortest augmenting path Hungarian on a square matrix (e-maxx formulation,
// 1-based internally).
SquareSolution solve_square(const Matrix& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  SquareSolution s;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  s.row_of.resize(n);
  for (std::size_t j = 1; j <= n; ++j) s.row_of[j - 1] = p[j] - 1;
  return s;
}

// Walks the tight (zero reduced cost) subgraph, which contains every optimal
// assignment, and fixes rows in order to their smallest feasible column.
class LexicographicRefiner {
 public:
  LexicographicRefiner(const Matrix& a, const SquareSolution& s, double tol)
      : a_(a), s_(s), tol_(tol), n_(static_cast<std::size_t>(a.rows())), col_of_(n_), row_of_(s.row_of),
        fixed_row_(n_, false), fixed_col_(n_, false) {
    for (std::size_t j = 0; j < n_; ++j) col_of_[row_of_[j]] = j;
  }

  void fix_rows(std::size_t real_rows) {
    for (std::size_t i = 0; i < real_rows; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (fixed_col_[j] || !tight(i, j)) continue;
        if (col_of_[i] == j || reroute(i, j)) {
          fixed_row_[i] = true;
          fixed_col_[j] = true;
          break;
        }
      }
    }
  }

  const std::vector<std::size_t>& col_of() const { return col_of_; }

 private:
  bool tight(std::size_t i, std::size_t j) const {
    return a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - s_.u[i] - s_.v[j] <= tol_;
  }

  // Moves row i onto column j, re-homing the displaced row along an
  // alternating tight path that ends at i's old column.
  bool reroute(std::size_t i, std::size_t j) {
    const std::size_t target = col_of_[i];
    const std::size_t start = row_of_[j];
    std::vector<std::size_t> parent_col(n_, n_);  // row -> column it was reached through
    std::vector<std::size_t> via_row(n_, n_);     // column -> row that reached it
    std::vector<char> seen_row(n_, 0);
    std::deque<std::size_t> queue{start};
    seen_row[start] = 1;
    std::size_t found = n_;
    while (!queue.empty() && found == n_) {
      const std::size_t r = queue.front();
      queue.pop_front();
      for (std::size_t c = 0; c < n_; ++c) {
        if (c == j || fixed_col_[c] || via_row[c] != n_ || !tight(r, c)) continue;
        via_row[c] = r;
        if (c == target) {
          found = c;
          break;
        }
        const std::size_t next = row_of_[c];
        if (next == i || fixed_row_[next] || seen_row[next]) continue;
        seen_row[next] = 1;
        parent_col[next] = c;
        queue.push_back(next);
      }
    }
    if (found == n_) return false;
    for (std::size_t c = found;;) {
      const std::size_t r = via_row[c];
      const std::size_t prev = parent_col[r];
      col_of_[r] = c;
      row_of_[c] = r;
      if (r == start) break;
      c = prev;
    }
    col_of_[i] = j;
    row_of_[j] = i;
    return true;
  }

  const Matrix& a_;
  const SquareSolution& s_;
  double tol_;
  std::size_t n_;
  std::vector<std::size_t> col_of_;
  std::vector<std::size_t> row_of_;
  std::vector<bool> fixed_row_;
  std::vector<bool> fixed_col_;
};

}  // namespace

Assignment hungarian(const Matrix& cost) {
  if (!cost.allFinite()) throw Error("hungarian: cost matrix has a non-finite entry");
  const auto rows = static_cast<std::size_t>(cost.rows());
  const auto cols = static_cast<std::size_t>(cost.cols());
  Assignment out;
  out.row_to_col.assign(rows, kUnassigned);
  if (rows == 0 || cols == 0) return out;

  // Pad to square with zero-cost dummies; dummy columns sort after real ones.
  const std::size_t n = std::max(rows, cols);
  Matrix square = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  square.topLeftCorner(cost.rows(), cost.cols()) = cost;

  const SquareSolution solution = solve_square(square);
  const double tol = 1e-9 * std::max(1.0, cost.cwiseAbs().maxCoeff());
  LexicographicRefiner refiner(square, solution, tol);
  refiner.fix_rows(rows);

  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t j = refiner.col_of()[i];
    if (j >= cols) continue;
    out.row_to_col[i] = j;
    out.pairs.emplace_back(i, j);
    out.total_cost += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace capimac
