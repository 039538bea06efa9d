#include "robustmean/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "robustmean/combinatorics.hpp"
#include "robustmean/errors.hpp"

namespace robustmean {

double l2_loss(const Eigen::VectorXd& estimate, const Eigen::VectorXd& true_mean) {
  if (estimate.size() != true_mean.size()) {
    throw ArgumentError("l2_loss: dimension mismatch (" + std::to_string(estimate.size()) +
                        " vs " + std::to_string(true_mean.size()) + ")");
  }
  return (estimate - true_mean).norm();
}

double quantile_error(std::span<const double> losses, double delta) {
  if (losses.empty()) throw ArgumentError("quantile_error: no losses");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("quantile_error: delta must lie in (0, 1)");
  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end());
  const auto N = static_cast<long long>(sorted.size());
  // At most floor(delta N) losses may exceed the answer. The small slack
  // absorbs representation error in products like 0.05 * 100.
  const auto allowed = static_cast<long long>(std::floor(delta * static_cast<double>(N) + 1e-9));
  const long long m = std::max(1LL, N - allowed);
  return sorted[static_cast<std::size_t>(m - 1)];
}

double opt_bound(int n, double trace_sigma, double opnorm_sigma, double delta) {
  if (n < 1) throw ArgumentError("opt_bound: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("opt_bound: delta must lie in (0, 1)");
  if (trace_sigma < 0.0 || opnorm_sigma < 0.0) {
    throw ArgumentError("opt_bound: covariance summaries must be >= 0");
  }
  return std::sqrt(trace_sigma / n) + std::sqrt(opnorm_sigma * std::log(1.0 / delta) / n);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return std::round(out);
}

double sparse_opnorm(const Eigen::MatrixXd& sigma, int s2) {
  const int p = static_cast<int>(sigma.rows());
  if (sigma.cols() != p) throw ArgumentError("sparse_opnorm: matrix must be square");
  if (s2 < 1 || s2 > p) throw ArgumentError("sparse_opnorm: support size must lie in [1, p]");
  if (binomial(p, s2) > 1e4) {
    throw ArgumentError("sparse_opnorm: C(p, s2) exceeds the 10^4 enumeration guard");
  }

  double best = 0.0;
  Eigen::MatrixXd sub(s2, s2);
  for_each_combination(p, s2, [&](std::span<const int> support) {
    for (int r = 0; r < s2; ++r) {
      for (int c = 0; c < s2; ++c) sub(r, c) = sigma(support[r], support[c]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
    best = std::max(best, eig.eigenvalues().maxCoeff());
  });
  return best;
}

}  // namespace robustmean
