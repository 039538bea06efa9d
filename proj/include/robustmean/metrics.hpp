#pragma once

#include <span>
#include <string>

#include <Eigen/Core>

namespace robustmean {

struct LossSample {
  std::string method;
  double loss = 0.0;
  int trial = 0;
};

/// ||estimate - true_mean||_2
double l2_loss(const Eigen::VectorXd& estimate, const Eigen::VectorXd& true_mean);

/// Empirical Q_delta = inf{a : Pr(loss > a) <= delta}: the order statistic
/// loss_(m) with m = ceil((1 - delta) N), no interpolation.
double quantile_error(std::span<const double> losses, double delta);

/// Sub-Gaussian benchmark sqrt(tr/n) + sqrt(opnorm ln(1/delta) / n).
double opt_bound(int n, double trace_sigma, double opnorm_sigma, double delta);

/// Largest top eigenvalue over all s2 x s2 principal submatrices. Refuses
/// when more than 10^4 supports would need enumerating.
double sparse_opnorm(const Eigen::MatrixXd& sigma, int s2);

/// C(n, k) as a double; saturates rather than overflowing.
double binomial(int n, int k);

}  // namespace robustmean
