#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "robustmean/model.hpp"

namespace robustmean {

Eigen::VectorXd sample_mean(const SampleSet& samples);

// ---- geometric median-of-means ----

struct WeiszfeldOptions {
  double tolerance = 1e-10;  // relative step size at which iteration stops
  int max_iterations = 10000;
};

struct GeometricMedianResult {
  Eigen::VectorXd median;
  int iterations = 0;
  std::vector<double> objective_trace;  // sum of distances at every iterate
};

/// argmin_theta sum_i ||theta - row_i||_2 by Weiszfeld iteration with the
/// Vardi-Zhang step when the iterate lands on a data point. Throws
/// ConvergenceError (carrying the last iterate) at the iteration cap.
GeometricMedianResult geometric_median(const Eigen::MatrixXd& points,
                                       const WeiszfeldOptions& options = {});

/// Contiguous partition into `blocks` groups whose sizes differ by at most
/// one (the first n % blocks groups get the extra row).
Eigen::MatrixXd block_means(const SampleSet& samples, int blocks);

Eigen::VectorXd geometric_median_of_means(const SampleSet& samples, int blocks,
                                          double tol = 1e-10);

/// ceil(3.5 ln(1/delta)) blocks, the count behind the classical guarantee.
int gmom_blocks_theory(double delta);
/// ceil(2 ln(1/delta)) blocks, the count used in the benchmark protocol.
int gmom_blocks_experiment(double delta);

// ---- coordinate-wise filtering ----

/// Univariate filter on every coordinate, each run for ceil(2 ln(1/delta))
/// removals with its own derived seed.
Eigen::VectorXd coordinatewise_filter(const SampleSet& samples, double delta, std::uint64_t seed);

// ---- l2-oracle truncation ----

/// Radius schedule balancing pruning bias against deviation. With
/// epsilon == 0 this is the heavy-tail choice, otherwise the Huber one.
struct RadiusRule {
  int k = 2;
  double trace_sigma = 0.0;
  double opnorm_sigma = 0.0;
  int n = 1;
  double delta = 0.05;
  double epsilon = 0.0;

  double radius() const;
};

struct OracleConfig {
  Eigen::VectorXd true_mean;
  std::variant<double, RadiusRule> radius = 1.0;

  double resolved_radius() const;
};

/// Mean of the rows inside the closed ball of radius R about the true mean.
Eigen::VectorXd oracle_truncated_mean(const SampleSet& samples, const OracleConfig& config);

/// Top eigenvalue of the 1/|S| covariance of the rows the oracle keeps.
double oracle_survivor_covariance(const SampleSet& samples, const OracleConfig& config);

// ---- subset search (SRM) ----

struct SrmResult {
  Eigen::VectorXd estimate;
  std::vector<int> subset;  // ascending row indices of the chosen subset
  double loss = 0.0;        // within-subset scatter divided by |S|
};

/// Exhaustive search over all floor((1 - eps) n)-subsets for the one with the
/// smallest scatter; ties go to the lexicographically smallest index set.
/// Refuses n > 25.
SrmResult srm_bruteforce(const SampleSet& samples, double epsilon);

/// Worst-case asymptotic bias eps / sqrt((1 - eps)(1 - 2 eps)) * sqrt(tr).
double srm_population_bias(double epsilon, double trace_sigma);

/// Squared-loss risk of the eta-mixture at its own mean:
/// (1 - eta) trP + eta trQ + eta (1 - eta) ||muP - muQ||^2.
double srm_mixture_risk(double eta, double trace_p, double trace_q, double mean_gap_sq);

/// Largest clean/contaminated mean gap at which the population subset search
/// still prefers to keep the contamination.
double srm_threshold_distance(double epsilon, double trace_p, double trace_q = 0.0);

}  // namespace robustmean
