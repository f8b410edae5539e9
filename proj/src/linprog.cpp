#include "kdenoise/linprog.hpp"

#include "kdenoise/error.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace kdenoise::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tableau layout: rows 0..m-1 are constraints, row m is the objective
// (reduced costs, negated objective value in the last column). Columns
// 0..n-1 are structural, n..n+m-1 artificial, last column is the rhs.
class Tableau {
 public:
  Tableau(const Matrix& A, const Vector& b, const Options& opts)
      : m_(A.rows()), n_(A.cols()), opts_(opts) {
    const auto entries = static_cast<std::size_t>(m_ + 1) * static_cast<std::size_t>(n_ + m_ + 1);
    if (entries > opts.max_tableau_entries) {
      throw Error(ErrorCode::kScaleLimit,
                  "linear program too large for the dense simplex (" +
                      std::to_string(entries) + " tableau entries)");
    }
    t_ = RowMatrix::Zero(m_ + 1, n_ + m_ + 1);
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
      basis_[static_cast<std::size_t>(i)] = n_ + i;
    }
    scale_ = 1.0 + b.cwiseAbs().sum();
  }

  Eigen::Index rhs() const { return n_ + m_; }

  void set_phase1_objective() {
    t_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) t_.row(m_) -= t_.row(i);
    for (Eigen::Index i = 0; i < m_; ++i) t_(m_, n_ + i) = 0.0;
  }

  void set_phase2_objective(const Vector& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      const double cj = t_(m_, j);
      if (cj != 0.0) t_.row(m_) -= cj * t_.row(i);
    }
  }

  // Bland's rule simplex on the current objective row. Columns at or beyond
  // `allowed_cols` never enter.
  Status iterate(Eigen::Index allowed_cols, std::size_t& pivots) {
    while (pivots < opts_.max_pivots) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (t_(m_, j) < -opts_.optimality_tol * scale_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::kOptimal;
      // Two-pass ratio test: bound the step with a slightly relaxed rhs,
      // then take the largest pivot among the rows under that bound (ties by
      // Bland's smallest basic index). Tiny pivots are what ruin the tableau.
      const double relax = opts_.pivot_tol * 1e-3;
      double bound = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a > opts_.pivot_tol) bound = std::min(bound, (std::max(0.0, t_(i, rhs())) + relax) / a);
      }
      Eigen::Index leave = -1;
      double best_a = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= opts_.pivot_tol || std::max(0.0, t_(i, rhs())) / a > bound) continue;
        if (leave < 0 || a > best_a ||
            (a == best_a && basis_[static_cast<std::size_t>(i)] <
                                basis_[static_cast<std::size_t>(leave)])) {
          best_a = a;
          leave = i;
        }
      }
      if (leave < 0) return Status::kUnbounded;
      pivot(leave, enter);
      ++pivots;
    }
    return Status::kIterationLimit;
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
    // The relaxed ratio test can leave rhs entries a hair below zero.
    for (Eigen::Index i = 0; i < m_; ++i) t_(i, rhs()) = std::max(0.0, t_(i, rhs()));
  }

  // After phase 1, pivot remaining (zero-valued) artificials out of the basis
  // where a structural column can replace them; rows where none can are
  // redundant and left with their artificial pinned at zero.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index best = -1;
      double best_abs = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  double objective_value() const { return -t_(m_, rhs()); }
  double scale() const { return scale_; }

  Vector solution() const {
    Vector x = Vector::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) x(j) = std::max(0.0, t_(i, rhs()));
    }
    return x;
  }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  Options opts_;
  RowMatrix t_;
  std::vector<Eigen::Index> basis_;
  double scale_ = 1.0;
};

void check_shapes(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "LP: A rows and b size differ");
  }
}

}  // namespace

Result find_feasible(const Matrix& A, const Vector& b, const Options& opts) {
  check_shapes(A, b);
  Tableau tab(A, b, opts);
  Result res;
  tab.set_phase1_objective();
  const Status s = tab.iterate(A.cols(), res.pivots);
  res.infeasibility = std::max(0.0, tab.objective_value());
  res.x = tab.solution();
  if (s == Status::kIterationLimit) {
    res.status = s;
  } else {
    res.status = res.infeasibility <= opts.feasibility_tol * tab.scale()
                     ? Status::kOptimal
                     : Status::kInfeasible;
  }
  return res;
}

Result solve_standard_form(const Matrix& A, const Vector& b, const Vector& c,
                           const Options& opts) {
  check_shapes(A, b);
  if (c.size() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "LP: c size and A cols differ");
  }
  Tableau tab(A, b, opts);
  Result res;
  tab.set_phase1_objective();
  Status s = tab.iterate(A.cols(), res.pivots);
  res.infeasibility = std::max(0.0, tab.objective_value());
  if (s == Status::kIterationLimit) {
    res.status = s;
    res.x = tab.solution();
    return res;
  }
  if (res.infeasibility > opts.feasibility_tol * tab.scale()) {
    res.status = Status::kInfeasible;
    res.x = tab.solution();
    return res;
  }
  tab.expel_artificials();
  tab.set_phase2_objective(c);
  s = tab.iterate(A.cols(), res.pivots);
  res.status = s;
  res.x = tab.solution();
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace kdenoise::lp
