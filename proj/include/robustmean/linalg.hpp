#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace robustmean {

struct PowerIterationOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 10000;
  std::uint64_t seed = 0;
};

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
  int iterations = 0;
  // False when power iteration hit the iteration cap and the pair came from
  // the dense symmetric solver instead.
  bool converged = true;
};

/// Leading eigenpair of a symmetric PSD matrix. Stops once
/// ||A v - lambda v|| <= relative_tolerance * lambda.
Eigenpair top_eigenpair(const Eigen::MatrixXd& sym, const PowerIterationOptions& options = {});

/// Mean of the rows listed in `rows`.
Eigen::VectorXd mean_of_rows(const Eigen::MatrixXd& data, std::span<const int> rows);

/// 1/|S| covariance of the selected rows about `center`.
Eigen::MatrixXd covariance_of_rows(const Eigen::MatrixXd& data, std::span<const int> rows,
                                   const Eigen::VectorXd& center);

}  // namespace robustmean
