#include "chebyshev_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "robustmean/errors.hpp"

namespace robustmean::detail {

namespace {

constexpr double kPriceTol = 1e-11;
constexpr double kPivotTol = 1e-10;
constexpr int kRefactorEvery = 64;
constexpr int kBlandAfterDegenerate = 32;

// Columns 0..2J-1 are y+_0, y-_0, y+_1, ...; columns 2J..2J+d are artificials.
class DualSimplex {
 public:
  DualSimplex(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets)
      : a_(rows), m_(targets), d_(static_cast<int>(rows.cols())), rows_(d_ + 1),
        real_(2 * static_cast<int>(rows.rows())), basis_(static_cast<std::size_t>(rows_)),
        is_basic_(static_cast<std::size_t>(real_ + rows_), false) {
    rhs_ = Eigen::VectorXd::Zero(rows_);
    rhs_(d_) = 1.0;
    for (int i = 0; i < rows_; ++i) {
      basis_[static_cast<std::size_t>(i)] = real_ + i;
      is_basic_[static_cast<std::size_t>(real_ + i)] = true;
    }
    binv_ = Eigen::MatrixXd::Identity(rows_, rows_);
    xb_ = rhs_;
  }

  ChebyshevFit solve() {
    run(/*phase_two=*/false);
    double infeasibility = 0.0;
    for (int i = 0; i < rows_; ++i) {
      if (artificial(basis_[static_cast<std::size_t>(i)])) infeasibility += xb_(i);
    }
    if (infeasibility > 1e-9) throw EstimatorError("minimax dual: phase one left infeasibility");
    run(/*phase_two=*/true);

    ChebyshevFit fit;
    const Eigen::VectorXd pi = multipliers(true);
    fit.theta = pi.head(d_);
    fit.objective = (a_ * fit.theta - m_).cwiseAbs().maxCoeff();
    double value = 0.0;
    for (int i = 0; i < rows_; ++i) {
      const int k = basis_[static_cast<std::size_t>(i)];
      if (!artificial(k)) value += cost(k, true) * std::max(0.0, xb_(i));
    }
    fit.lower_bound = -value;
    fit.pivots = pivots_;
    return fit;
  }

 private:
  bool artificial(int k) const { return k >= real_; }

  double cost(int k, bool phase_two) const {
    if (artificial(k)) return phase_two ? 0.0 : 1.0;
    if (!phase_two) return 0.0;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return sign * m_(k / 2);
  }

  Eigen::VectorXd column(int k) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(rows_);
    if (artificial(k)) {
      c(k - real_) = 1.0;
      return c;
    }
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    c.head(d_) = sign * a_.row(k / 2).transpose();
    c(d_) = 1.0;
    return c;
  }

  Eigen::VectorXd multipliers(bool phase_two) const {
    Eigen::VectorXd cb(rows_);
    for (int i = 0; i < rows_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)], phase_two);
    return binv_.transpose() * cb;
  }

  void refactor() {
    Eigen::MatrixXd b(rows_, rows_);
    for (int i = 0; i < rows_; ++i) b.col(i) = column(basis_[static_cast<std::size_t>(i)]);
    binv_ = b.fullPivLu().inverse();
    xb_ = binv_ * rhs_;
    for (int i = 0; i < rows_; ++i) {
      if (xb_(i) < 0.0 && xb_(i) > -1e-12) xb_(i) = 0.0;
    }
  }

  void run(bool phase_two) {
    const int total = real_ + rows_;
    const int max_pivots = 50 * total + 1000;
    int degenerate_streak = 0;
    for (int guard = 0; guard < max_pivots; ++guard) {
      const Eigen::VectorXd pi = multipliers(phase_two);
      const bool bland = degenerate_streak > kBlandAfterDegenerate;

      int entering = -1;
      double best = -kPriceTol;
      for (int k = 0; k < total; ++k) {
        if (is_basic_[static_cast<std::size_t>(k)]) continue;
        if (phase_two && artificial(k)) continue;
        double reduced = cost(k, phase_two);
        if (artificial(k)) {
          reduced -= pi(k - real_);
        } else {
          const double sign = (k % 2 == 0) ? 1.0 : -1.0;
          reduced -= sign * a_.row(k / 2).dot(pi.head(d_)) + pi(d_);
        }
        if (reduced < best) {
          entering = k;
          best = reduced;
          if (bland) break;
        }
      }
      if (entering < 0) return;

      const Eigen::VectorXd w = binv_ * column(entering);
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        const int k = basis_[static_cast<std::size_t>(i)];
        double r;
        if (phase_two && artificial(k) && std::abs(w(i)) > kPivotTol) {
          r = 0.0;  // push zero-level artificials out of the basis
        } else if (w(i) > kPivotTol) {
          r = std::max(0.0, xb_(i)) / w(i);
        } else {
          continue;
        }
        if (r < ratio || (r == ratio && k < basis_[static_cast<std::size_t>(leave)])) {
          ratio = r;
          leave = i;
        }
      }
      if (leave < 0) throw EstimatorError("minimax dual: unbounded direction");

      degenerate_streak = (ratio == 0.0) ? degenerate_streak + 1 : 0;
      xb_ -= ratio * w;
      xb_(leave) = ratio;
      const double piv = w(leave);
      binv_.row(leave) /= piv;
      for (int i = 0; i < rows_; ++i) {
        if (i != leave && w(i) != 0.0) binv_.row(i) -= w(i) * binv_.row(leave);
      }
      is_basic_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = false;
      is_basic_[static_cast<std::size_t>(entering)] = true;
      basis_[static_cast<std::size_t>(leave)] = entering;
      if (++pivots_ % kRefactorEvery == 0) refactor();
    }
    throw EstimatorError("minimax dual: simplex pivot limit reached");
  }

  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& m_;
  int d_;
  int rows_;
  int real_;
  std::vector<int> basis_;
  std::vector<bool> is_basic_;
  Eigen::VectorXd rhs_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  int pivots_ = 0;
};

}  // namespace

ChebyshevFit chebyshev_fit(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets) {
  if (rows.rows() == 0) throw ArgumentError("chebyshev_fit: no constraints");
  if (targets.size() != rows.rows()) throw ArgumentError("chebyshev_fit: target count mismatch");
  DualSimplex simplex(rows, targets);
  return simplex.solve();
}

}  // namespace robustmean::detail
