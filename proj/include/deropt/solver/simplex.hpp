#pragma once

// Bounded-variable primal revised simplex on
//
//   min c'x  s.t.  A x (<=, =, >=) b,  lower <= x <= upper
//
// Each row gets a slack so the working form is A x + s = b with sign-bounded
// slacks. Rows whose slack cannot absorb the initial residual get an
// artificial variable; phase one drives artificials to zero. The basis
// inverse is held densely and updated by elementary row operations, with a
// fresh LU refactorization every `refactor_interval` pivots.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "deropt/core/error.hpp"
#include "deropt/model/milp_model.hpp"

namespace deropt::solver {

using model::Sense;

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit };

template <typename Scalar>
struct LpProblem {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Eigen::SparseMatrix<Scalar> a;  // rows x cols, column major
  Vector b;
  std::vector<Sense> sense;
  Vector c;
  Vector lower;
  Vector upper;

  int rows() const { return static_cast<int>(a.rows()); }
  int cols() const { return static_cast<int>(a.cols()); }
};

template <typename Scalar>
struct LpResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LpStatus status = LpStatus::Infeasible;
  Vector x;
  Scalar objective = 0;
  long iterations = 0;
};

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-10;
  int refactor_interval = 50;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 1000;
  long max_iterations = 0;  // 0 picks a size-dependent default
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

template <typename Scalar>
class BoundedSimplex {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BoundedSimplex(const LpProblem<Scalar>& lp, SimplexOptions options)
      : lp_(lp), opt_(options), m_(lp.rows()), n_(lp.cols()), total_(n_ + 2 * m_) {}

  LpResult<Scalar> solve() {
    LpResult<Scalar> result;
    initialize();

    Vector phase1_cost = Vector::Zero(total_);
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      if (upper_[art(i)] > 0) {
        phase1_cost[art(i)] = 1;
        need_phase1 = true;
      }
    }
    if (need_phase1) {
      LpStatus s = iterate(phase1_cost, result.iterations);
      if (s == LpStatus::IterationLimit || s == LpStatus::TimeLimit) {
        result.status = s;
        return result;
      }
      refactor();
      Scalar infeasibility = 0;
      for (int i = 0; i < m_; ++i) infeasibility += x_[art(i)];
      const Scalar scale = 1 + (lp_.b.size() ? lp_.b.cwiseAbs().maxCoeff() : Scalar(0));
      if (infeasibility > Scalar(opt_.primal_tol) * 10 * scale) {
        result.status = LpStatus::Infeasible;
        return result;
      }
    }
    for (int i = 0; i < m_; ++i) {
      upper_[art(i)] = 0;
      if (pos_[art(i)] < 0) x_[art(i)] = 0;
    }

    Vector phase2_cost = Vector::Zero(total_);
    phase2_cost.head(n_) = lp_.c;
    bland_ = false;
    LpStatus s = iterate(phase2_cost, result.iterations);
    result.status = s;
    if (s != LpStatus::Optimal) return result;
    refactor();
    result.x = x_.head(n_);
    // Snap round-off that leaked past a bound.
    for (int j = 0; j < n_; ++j) {
      if (result.x[j] < lp_.lower[j]) result.x[j] = lp_.lower[j];
      if (result.x[j] > lp_.upper[j]) result.x[j] = lp_.upper[j];
    }
    result.objective = lp_.c.dot(result.x);
    return result;
  }

 private:
  int slack(int row) const { return n_ + row; }
  int art(int row) const { return n_ + m_ + row; }

  static bool finite(Scalar v) { return std::isfinite(static_cast<double>(v)); }

  // column j dotted with a dense row-space vector
  Scalar column_dot(int j, const Vector& y) const {
    if (j < n_) {
      Scalar s = 0;
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(lp_.a, j); it; ++it) {
        s += it.value() * y[it.row()];
      }
      return s;
    }
    if (j < n_ + m_) return y[j - n_];
    return art_sign_[j - n_ - m_] * y[j - n_ - m_];
  }

  // B^{-1} a_j
  Vector ftran(int j) const {
    if (j < n_) {
      Vector out = Vector::Zero(m_);
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(lp_.a, j); it; ++it) {
        out.noalias() += it.value() * binv_.col(it.row());
      }
      return out;
    }
    if (j < n_ + m_) return binv_.col(j - n_);
    return art_sign_[j - n_ - m_] * binv_.col(j - n_ - m_);
  }

  void initialize() {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    lower_.resize(total_);
    upper_.resize(total_);
    x_ = Vector::Zero(total_);
    art_sign_ = Vector::Ones(m_);
    pos_.assign(total_, -1);
    basis_.assign(m_, -1);

    for (int j = 0; j < n_; ++j) {
      lower_[j] = lp_.lower[j];
      upper_[j] = lp_.upper[j];
      if (finite(lower_[j])) {
        x_[j] = lower_[j];
      } else if (finite(upper_[j])) {
        x_[j] = upper_[j];
      } else {
        x_[j] = 0;
      }
    }
    Vector residual = lp_.b - lp_.a * x_.head(n_);
    const Scalar tol = Scalar(opt_.primal_tol);
    binv_ = Matrix::Identity(m_, m_);
    for (int i = 0; i < m_; ++i) {
      Scalar lo = 0, hi = 0;
      switch (lp_.sense[i]) {
        case Sense::LessEqual: lo = 0; hi = inf; break;
        case Sense::GreaterEqual: lo = -inf; hi = 0; break;
        case Sense::Equal: lo = 0; hi = 0; break;
      }
      lower_[slack(i)] = lo;
      upper_[slack(i)] = hi;
      lower_[art(i)] = 0;
      const Scalar r = residual[i];
      if (r >= lo - tol && r <= hi + tol) {
        upper_[art(i)] = 0;
        x_[slack(i)] = r;
        basis_[i] = slack(i);
      } else {
        const Scalar s = r < lo ? lo : hi;
        x_[slack(i)] = s;
        const Scalar rest = r - s;
        art_sign_[i] = rest >= 0 ? 1 : -1;
        upper_[art(i)] = inf;
        x_[art(i)] = std::abs(rest);
        basis_[i] = art(i);
        binv_(i, i) = art_sign_[i];
      }
      pos_[basis_[i]] = i;
    }
  }

  void refactor() {
    if (m_ == 0) return;
    Matrix b = Matrix::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (j < n_) {
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(lp_.a, j); it; ++it) {
          b(it.row(), i) = it.value();
        }
      } else if (j < n_ + m_) {
        b(j - n_, i) = 1;
      } else {
        b(j - n_ - m_, i) = art_sign_[j - n_ - m_];
      }
    }
    Eigen::FullPivLU<Matrix> lu(b);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::NumericalBreakdown, "basis matrix became singular");
    }
    binv_ = lu.inverse();
    // x_B = B^{-1} (b - N x_N)
    Vector rhs = lp_.b;
    for (int j = 0; j < total_; ++j) {
      if (pos_[j] >= 0 || x_[j] == 0) continue;
      if (j < n_) {
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(lp_.a, j); it; ++it) {
          rhs[it.row()] -= it.value() * x_[j];
        }
      } else if (j < n_ + m_) {
        rhs[j - n_] -= x_[j];
      } else {
        rhs[j - n_ - m_] -= art_sign_[j - n_ - m_] * x_[j];
      }
    }
    Vector xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    since_refactor_ = 0;
  }

  long iteration_cap() const {
    return opt_.max_iterations > 0 ? opt_.max_iterations : 50L * (m_ + n_) + 10000;
  }

  LpStatus iterate(const Vector& cost, long& iterations) {
    const Scalar dtol = Scalar(opt_.dual_tol);
    const Scalar ptol = Scalar(opt_.primal_tol);
    const Scalar pivtol = Scalar(opt_.pivot_tol);
    int degenerate_run = 0;
    Vector cb(m_);
    while (true) {
      if (iterations >= iteration_cap()) return LpStatus::IterationLimit;
      if (opt_.deadline && (iterations & 63) == 0 &&
          std::chrono::steady_clock::now() > *opt_.deadline) {
        return LpStatus::TimeLimit;
      }
      if (since_refactor_ >= opt_.refactor_interval) refactor();

      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      const Vector y = binv_.transpose() * cb;

      // Pricing.
      int entering = -1;
      int direction = 0;
      Scalar best = 0;
      for (int j = 0; j < total_; ++j) {
        if (pos_[j] >= 0 || lower_[j] == upper_[j]) continue;
        const Scalar d = cost[j] - column_dot(j, y);
        const bool can_increase = x_[j] < upper_[j] - ptol || !finite(upper_[j]);
        const bool can_decrease = x_[j] > lower_[j] + ptol || !finite(lower_[j]);
        int dir = 0;
        if (d < -dtol && can_increase) dir = 1;
        else if (d > dtol && can_decrease) dir = -1;
        if (dir == 0) continue;
        if (bland_) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return LpStatus::Optimal;

      const Vector alpha = ftran(entering);

      // Ratio test. Basic variable i moves at rate -direction * alpha_i.
      const Scalar inf = std::numeric_limits<Scalar>::infinity();
      Scalar step = inf;
      int leaving_row = -1;
      bool leaves_at_upper = false;
      if (bland_) {
        for (int i = 0; i < m_; ++i) {
          const Scalar rate = -direction * alpha[i];
          if (std::abs(rate) <= pivtol) continue;
          const int j = basis_[i];
          Scalar limit = inf;
          if (rate < 0 && finite(lower_[j])) limit = (x_[j] - lower_[j]) / -rate;
          if (rate > 0 && finite(upper_[j])) limit = (upper_[j] - x_[j]) / rate;
          if (limit < 0) limit = 0;
          if (limit < step || (limit == step && leaving_row >= 0 && j < basis_[leaving_row])) {
            step = limit;
            leaving_row = i;
            leaves_at_upper = rate > 0;
          }
        }
      } else {
        // Harris two-pass: bound the step with relaxed bounds, then pick the
        // largest pivot among rows that block within that bound.
        Scalar relaxed = inf;
        for (int i = 0; i < m_; ++i) {
          const Scalar rate = -direction * alpha[i];
          if (std::abs(rate) <= pivtol) continue;
          const int j = basis_[i];
          if (rate < 0 && finite(lower_[j])) {
            relaxed = std::min(relaxed, (x_[j] - lower_[j] + ptol) / -rate);
          } else if (rate > 0 && finite(upper_[j])) {
            relaxed = std::min(relaxed, (upper_[j] - x_[j] + ptol) / rate);
          }
        }
        Scalar best_pivot = 0;
        for (int i = 0; i < m_; ++i) {
          const Scalar rate = -direction * alpha[i];
          if (std::abs(rate) <= pivtol) continue;
          const int j = basis_[i];
          Scalar limit = inf;
          if (rate < 0 && finite(lower_[j])) limit = (x_[j] - lower_[j]) / -rate;
          else if (rate > 0 && finite(upper_[j])) limit = (upper_[j] - x_[j]) / rate;
          if (limit <= relaxed && std::abs(rate) > best_pivot) {
            best_pivot = std::abs(rate);
            step = std::max(limit, Scalar(0));
            leaving_row = i;
            leaves_at_upper = rate > 0;
          }
        }
      }

      const Scalar flip = upper_[entering] - lower_[entering];
      const bool bound_flip = finite(flip) && flip <= step;
      if (bound_flip) step = flip;
      if (!finite(step)) return LpStatus::Unbounded;

      ++iterations;
      degenerate_run = step <= ptol ? degenerate_run + 1 : 0;
      if (degenerate_run >= opt_.bland_after) bland_ = true;

      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= direction * step * alpha[i];
      x_[entering] += direction * step;

      if (bound_flip) {
        x_[entering] = direction > 0 ? upper_[entering] : lower_[entering];
        continue;
      }

      const int leaving = basis_[leaving_row];
      x_[leaving] = leaves_at_upper ? upper_[leaving] : lower_[leaving];
      pos_[leaving] = -1;
      basis_[leaving_row] = entering;
      pos_[entering] = leaving_row;

      const Scalar pivot = alpha[leaving_row];
      binv_.row(leaving_row) /= pivot;
      for (int i = 0; i < m_; ++i) {
        if (i == leaving_row || alpha[i] == 0) continue;
        binv_.row(i).noalias() -= alpha[i] * binv_.row(leaving_row);
      }
      ++since_refactor_;
    }
  }

  const LpProblem<Scalar>& lp_;
  SimplexOptions opt_;
  int m_;
  int n_;
  int total_;
  Vector lower_, upper_, x_, art_sign_;
  std::vector<int> pos_;
  std::vector<int> basis_;
  Matrix binv_;
  int since_refactor_ = 0;
  bool bland_ = false;
};

template <typename Scalar>
LpResult<Scalar> solve_bounded_lp(const LpProblem<Scalar>& lp, SimplexOptions options = {}) {
  return BoundedSimplex<Scalar>(lp, options).solve();
}

}  // namespace deropt::solver
