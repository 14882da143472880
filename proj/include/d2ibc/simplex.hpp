#pragma once

// Dense two-phase tableau simplex with Bland's rule, for small linear programs
//   minimize c'x  subject to  A_i x (<=|>=|=) b_i,  x >= 0.

#include <vector>

#include "d2ibc/common.hpp"

namespace d2ibc {

enum class Sense { LessEqual, GreaterEqual, Equal };

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LinearProgram {
  Matrix A;
  Vector b;
  std::vector<Sense> sense;
  Vector c;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
  Vector duals;  // one per constraint, sign convention of the original rows
  int pivots = 0;
};

namespace detail {

class Tableau {
 public:
  Tableau(Matrix t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  // Minimizes the objective held in the last row (reduced costs, with the
  // negated objective value in the last column). Columns >= allowed_cols never
  // enter.
  LpStatus optimize(int allowed_cols, int& pivots, double tol) {
    const int m = static_cast<int>(t_.rows()) - 1;
    const int rhs = static_cast<int>(t_.cols()) - 1;
    for (;;) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j)
        if (t_(m, j) < -tol) {
          enter = j;
          break;
        }
      if (enter < 0) return LpStatus::Optimal;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (t_(i, enter) <= tol) continue;
        const double ratio = t_(i, rhs) / t_(i, enter);
        if (leave < 0 || ratio < best - tol || (ratio <= best + tol && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i < t_.rows(); ++i)
      if (i != row && t_(i, col) != 0.0) t_.row(i) -= t_(i, col) * t_.row(row);
    basis_[row] = col;
  }

  Matrix& table() { return t_; }
  std::vector<int>& basis() { return basis_; }

 private:
  Matrix t_;
  std::vector<int> basis_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-11) {
  const int m = static_cast<int>(lp.A.rows());
  const int n = static_cast<int>(lp.A.cols());
  require(lp.b.size() == m && static_cast<int>(lp.sense.size()) == m && lp.c.size() == n, ErrorCode::Shape,
          "linear program dimensions disagree");

  // Normalize to b >= 0.
  Matrix A = lp.A;
  Vector b = lp.b;
  std::vector<Sense> sense = lp.sense;
  std::vector<double> flip(m, 1.0);
  for (int i = 0; i < m; ++i)
    if (b[i] < 0.0) {
      A.row(i) *= -1.0;
      b[i] = -b[i];
      flip[i] = -1.0;
      if (sense[i] == Sense::LessEqual) sense[i] = Sense::GreaterEqual;
      else if (sense[i] == Sense::GreaterEqual) sense[i] = Sense::LessEqual;
    }

  int n_slack = 0, n_art = 0;
  for (auto s : sense) {
    if (s != Sense::Equal) ++n_slack;
    if (s != Sense::LessEqual) ++n_art;
  }
  const int cols = n + n_slack + n_art;
  Matrix t = Matrix::Zero(m + 1, cols + 1);
  std::vector<int> basis(m);
  std::vector<int> slack_col(m, -1);
  int sc = n, ac = n + n_slack;
  for (int i = 0; i < m; ++i) {
    t.block(i, 0, 1, n) = A.row(i);
    t(i, cols) = b[i];
    if (sense[i] != Sense::Equal) {
      slack_col[i] = sc;
      t(i, sc) = sense[i] == Sense::LessEqual ? 1.0 : -1.0;
      if (sense[i] == Sense::LessEqual) basis[i] = sc;
      ++sc;
    }
    if (sense[i] != Sense::LessEqual) {
      t(i, ac) = 1.0;
      basis[i] = ac;
      ++ac;
    }
  }

  LpSolution sol;
  detail::Tableau tab(std::move(t), std::move(basis));
  Matrix& T = tab.table();

  if (n_art > 0) {
    // Phase 1: minimize the sum of artificials.
    for (int i = 0; i < m; ++i)
      if (tab.basis()[i] >= n + n_slack) T.row(m) -= T.row(i);
    for (int j = n + n_slack; j < cols; ++j) T(m, j) += 1.0;
    tab.optimize(cols, sol.pivots, tol);
    if (-T(m, cols) > 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for (int i = 0; i < m; ++i) {
      if (tab.basis()[i] < n + n_slack) continue;
      for (int j = 0; j < n + n_slack; ++j)
        if (std::abs(T(i, j)) > tol) {
          tab.pivot(i, j);
          ++sol.pivots;
          break;
        }
    }
  }

  // Phase 2 objective row.
  T.row(m).setZero();
  T.block(m, 0, 1, n) = lp.c.transpose();
  for (int i = 0; i < m; ++i) {
    const int bj = tab.basis()[i];
    if (bj < n && lp.c[bj] != 0.0) T.row(m) -= lp.c[bj] * T.row(i);
  }
  sol.status = tab.optimize(n + n_slack, sol.pivots, tol);
  if (sol.status != LpStatus::Optimal) return sol;

  sol.x = Vector::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tab.basis()[i] < n) sol.x[tab.basis()[i]] = T(i, cols);
  sol.objective = lp.c.dot(sol.x);

  // Duals y solve B' y = c_B over the original (normalized) columns.
  Matrix full = Matrix::Zero(m, n + n_slack + n_art);
  for (int i = 0; i < m; ++i) {
    full.block(i, 0, 1, n) = A.row(i);
    if (slack_col[i] >= 0) full(i, slack_col[i]) = sense[i] == Sense::LessEqual ? 1.0 : -1.0;
  }
  int a2 = n + n_slack;
  for (int i = 0; i < m; ++i)
    if (sense[i] != Sense::LessEqual) full(i, a2++) = 1.0;
  Matrix Bm(m, m);
  Vector cb = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    const int bj = tab.basis()[i];
    Bm.col(i) = full.col(bj);
    if (bj < n) cb[i] = lp.c[bj];
  }
  Vector y = Bm.transpose().fullPivLu().solve(cb);
  sol.duals = Vector(m);
  for (int i = 0; i < m; ++i) sol.duals[i] = flip[i] * y[i];
  return sol;
}

}  // namespace d2ibc
