#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "dspopt/common.hpp"

namespace dspopt::lp {

// Column-sparse linear program in the fixed form
//
//   maximize    c' x
//   subject to  A x <= b,   x >= 0,   b >= 0,
//
// which is the shape of the phase-2 allocation problem (each structural
// column touches one supply row and at most one budget row). Since b >= 0 the
// all-slack basis is feasible and no phase-1 is needed.

struct Column {
  double objective = 0.0;
  std::vector<std::pair<int, double>> entries;  // (row, coefficient)
};

struct SparseLp {
  int n_rows = 0;
  std::vector<double> rhs;       // per row, must be >= 0
  std::vector<Column> columns;   // structural variables
};

struct Solution {
  std::vector<double> x;              // structural variables
  std::vector<double> row_duals;      // y, one per row
  std::vector<double> reduced_costs;  // c_j - y' A_j per structural column
  double objective = 0.0;
  int iterations = 0;
};

struct Residuals {
  double primal = 0.0;     // worst row overrun / variable negativity
  double dual = 0.0;       // worst positive reduced cost / negative dual
  double slackness = 0.0;  // worst complementary-slackness product
};

inline Residuals residuals(const SparseLp& lp, const Solution& sol) {
  Residuals r;
  const int m = lp.n_rows;
  std::vector<double> activity(m, 0.0);
  for (std::size_t j = 0; j < lp.columns.size(); ++j) {
    const double xj = sol.x[j];
    r.primal = std::max(r.primal, -xj);
    for (const auto& [row, coef] : lp.columns[j].entries) activity[row] += coef * xj;
  }
  for (int i = 0; i < m; ++i) {
    const double slack = lp.rhs[i] - activity[i];
    r.primal = std::max(r.primal, -slack);
    r.dual = std::max(r.dual, -sol.row_duals[i]);
    r.slackness = std::max(r.slackness, std::abs(sol.row_duals[i] * slack));
  }
  for (std::size_t j = 0; j < lp.columns.size(); ++j) {
    double rc = lp.columns[j].objective;
    for (const auto& [row, coef] : lp.columns[j].entries) {
      rc -= sol.row_duals[row] * coef;
    }
    r.dual = std::max(r.dual, rc / std::max(1.0, std::abs(lp.columns[j].objective)));
    r.slackness = std::max(r.slackness, std::abs(sol.x[j] * rc));
  }
  return r;
}

namespace detail {

class Simplex {
 public:
  explicit Simplex(const SparseLp& lp)
      : lp_(lp), m_(lp.n_rows), n_(static_cast<int>(lp.columns.size())) {
    for (int i = 0; i < m_; ++i) {
      if (!(lp_.rhs[i] >= 0.0)) throw InputError("LP right-hand sides must be >= 0");
    }
    for (const Column& col : lp_.columns) {
      for (const auto& [row, coef] : col.entries) {
        (void)coef;
        if (row < 0 || row >= m_) throw InputError("LP column references bad row");
      }
    }
    basis_.resize(m_);
    in_basis_.assign(n_ + m_, false);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;  // slack basis
      in_basis_[n_ + i] = true;
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = 1.0;
  }

  Solution run() {
    const int iter_limit = 20000 + 200 * (n_ + m_);
    bool bland = false;
    int stalled = 0;
    double best_obj = 0.0;
    int iterations = 0;
    std::vector<double> xb(m_), y(m_), direction(m_);

    while (true) {
      if (iterations > iter_limit) {
        throw InternalError("LP solver exceeded its iteration limit");
      }
      if (iterations > 0 && iterations % 128 == 0) refactorize();

      compute_basic_values(xb);
      compute_duals(y);

      const int entering = pick_entering(y, bland);
      if (entering < 0) break;  // dual feasible: optimal

      ftran(entering, direction);
      const int leaving_pos = pick_leaving(xb, direction);
      if (leaving_pos < 0) {
        // Impossible for the allocation LP (feasible set lies in a box);
        // reaching this means the model construction is broken.
        throw InternalError("LP solver detected an unbounded direction");
      }

      pivot(leaving_pos, entering, direction);
      ++iterations;

      compute_basic_values(xb);
      const double obj = objective_of(xb);
      if (obj > best_obj + 1e-13 * std::max(1.0, std::abs(best_obj))) {
        best_obj = obj;
        stalled = 0;
      } else if (!bland && ++stalled > 64) {
        bland = true;  // degenerate stall: switch to Bland's rule for good
      }
    }

    refactorize();
    compute_basic_values(xb);
    compute_duals(y);

    Solution sol;
    sol.iterations = iterations;
    sol.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) sol.x[basis_[i]] = xb[i];
    }
    sol.row_duals = y;
    sol.reduced_costs.resize(n_);
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) {
      sol.reduced_costs[j] = reduced_cost(j, y);
      sol.objective += lp_.columns[j].objective * sol.x[j];
    }
    return sol;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * m_ + j; }

  double column_objective(int var) const {
    return var < n_ ? lp_.columns[var].objective : 0.0;
  }

  // d = B^-1 A_var; structural columns have at most a couple of entries,
  // slack columns are unit vectors, so this is O(m * nnz).
  void ftran(int var, std::vector<double>& d) const {
    std::fill(d.begin(), d.end(), 0.0);
    if (var < n_) {
      for (const auto& [row, coef] : lp_.columns[var].entries) {
        for (int i = 0; i < m_; ++i) d[i] += coef * binv_[idx(i, row)];
      }
    } else {
      const int row = var - n_;
      for (int i = 0; i < m_; ++i) d[i] = binv_[idx(i, row)];
    }
  }

  void compute_basic_values(std::vector<double>& xb) const {
    for (int i = 0; i < m_; ++i) {
      double v = 0.0;
      for (int r = 0; r < m_; ++r) v += binv_[idx(i, r)] * lp_.rhs[r];
      xb[i] = v;
    }
  }

  void compute_duals(std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = column_objective(basis_[i]);
      if (cb == 0.0) continue;
      for (int r = 0; r < m_; ++r) y[r] += cb * binv_[idx(i, r)];
    }
  }

  double reduced_cost(int var, const std::vector<double>& y) const {
    if (var < n_) {
      double rc = lp_.columns[var].objective;
      for (const auto& [row, coef] : lp_.columns[var].entries) rc -= y[row] * coef;
      return rc;
    }
    return -y[var - n_];
  }

  // Entering tolerance scales with the column objective so that large-valued
  // instances do not chase rounding noise forever.
  double entering_tolerance(int var) const {
    return 1e-9 * std::max(1.0, std::abs(column_objective(var)));
  }

  int pick_entering(const std::vector<double>& y, bool bland) const {
    int best = -1;
    double best_rc = 0.0;
    for (int var = 0; var < n_ + m_; ++var) {
      if (in_basis_[var]) continue;
      const double rc = reduced_cost(var, y);
      if (rc <= entering_tolerance(var)) continue;
      if (bland) return var;  // smallest eligible index
      if (rc > best_rc) {
        best_rc = rc;
        best = var;
      }
    }
    return best;
  }

  int pick_leaving(const std::vector<double>& xb, const std::vector<double>& d) const {
    int best = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (d[i] <= 1e-11) continue;
      const double ratio = std::max(xb[i], 0.0) / d[i];
      if (best < 0 || ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && basis_[i] < basis_[best])) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  void pivot(int leaving_pos, int entering, const std::vector<double>& d) {
    const double piv = d[leaving_pos];
    for (int r = 0; r < m_; ++r) binv_[idx(leaving_pos, r)] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == leaving_pos) continue;
      const double factor = d[i];
      if (factor == 0.0) continue;
      for (int r = 0; r < m_; ++r) {
        binv_[idx(i, r)] -= factor * binv_[idx(leaving_pos, r)];
      }
    }
    in_basis_[basis_[leaving_pos]] = false;
    in_basis_[entering] = true;
    basis_[leaving_pos] = entering;
  }

  double objective_of(const std::vector<double>& xb) const {
    double obj = 0.0;
    for (int i = 0; i < m_; ++i) obj += column_objective(basis_[i]) * xb[i];
    return obj;
  }

  // Rebuild B^-1 from the basis with Gauss-Jordan elimination (partial
  // pivoting); runs every 128 pivots and once more before extracting the
  // solution, so accumulated update error never reaches the output.
  void refactorize() {
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int col = 0; col < m_; ++col) {
      const int var = basis_[col];
      if (var < n_) {
        for (const auto& [row, coef] : lp_.columns[var].entries) b[idx(row, col)] = coef;
      } else {
        b[idx(var - n_, col)] = 1.0;
      }
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[idx(i, i)] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv_row = col;
      for (int i = col + 1; i < m_; ++i) {
        if (std::abs(b[idx(i, col)]) > std::abs(b[idx(piv_row, col)])) piv_row = i;
      }
      const double piv = b[idx(piv_row, col)];
      if (std::abs(piv) < 1e-12) throw InternalError("LP basis became singular");
      if (piv_row != col) {
        for (int r = 0; r < m_; ++r) {
          std::swap(b[idx(piv_row, r)], b[idx(col, r)]);
          std::swap(inv[idx(piv_row, r)], inv[idx(col, r)]);
        }
      }
      for (int r = 0; r < m_; ++r) {
        b[idx(col, r)] /= piv;
        inv[idx(col, r)] /= piv;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == col) continue;
        const double factor = b[idx(i, col)];
        if (factor == 0.0) continue;
        for (int r = 0; r < m_; ++r) {
          b[idx(i, r)] -= factor * b[idx(col, r)];
          inv[idx(i, r)] -= factor * inv[idx(col, r)];
        }
      }
    }
    binv_ = std::move(inv);
  }

  const SparseLp& lp_;
  int m_;
  int n_;
  std::vector<int> basis_;
  std::vector<bool> in_basis_;
  std::vector<double> binv_;  // row-major m x m
};

}  // namespace detail

/// Solves the LP to a basic optimal solution and self-certifies it: the
/// returned duals must witness feasibility and complementary slackness, else
/// the solver throws instead of handing back a bad answer.
inline Solution solve(const SparseLp& lp) {
  detail::Simplex simplex(lp);
  Solution sol = simplex.run();

  double rhs_scale = 1.0;
  for (double b : lp.rhs) rhs_scale = std::max(rhs_scale, std::abs(b));
  const Residuals res = residuals(lp, sol);
  if (res.primal > 1e-9 * rhs_scale || res.dual > 1e-8 ||
      res.slackness > 1e-7 * std::max(1.0, std::abs(sol.objective))) {
    throw InternalError("LP solution failed its optimality certificate");
  }
  return sol;
}

}  // namespace dspopt::lp
