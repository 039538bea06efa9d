#pragma once

#include <Eigen/Core>

namespace robustmean::detail {

struct ChebyshevFit {
  Eigen::VectorXd theta;
  double objective = 0.0;    // max_j |rows_j . theta - targets_j|
  double lower_bound = 0.0;  // value of the final dual iterate
  int pivots = 0;
};

/// min_theta max_j |rows_j . theta - targets_j| via two-phase revised simplex
/// on the dual
///   min sum_j m_j (y+_j - y-_j)
///   s.t. sum_j (y+_j - y-_j) a_j = 0,  sum_j (y+_j + y-_j) = 1,  y >= 0,
/// whose simplex multipliers are the optimal (theta, -t).
ChebyshevFit chebyshev_fit(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets);

}  // namespace robustmean::detail
