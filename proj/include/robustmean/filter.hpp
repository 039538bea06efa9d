#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "robustmean/model.hpp"

namespace robustmean {

/// When the filter stops:
///  - threshold:   top eigenvalue < threshold_factor * cov_bound
///  - fixed_steps: exactly `steps` removals
///  - capped:      threshold, or `steps` removals, whichever comes first
struct StopMode {
  enum class Kind { threshold, fixed_steps, capped };
  Kind kind = Kind::threshold;
  int steps = 0;

  static StopMode threshold() { return {Kind::threshold, 0}; }
  static StopMode fixed_steps(int t) { return {Kind::fixed_steps, t}; }
  static StopMode capped(int t_max) { return {Kind::capped, t_max}; }
};

struct FilterConfig {
  double cov_bound = 0.0;  // upper bound on the good set's covariance operator norm
  double threshold_factor = 32.0;
  StopMode stop_mode;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EstimateReport {
  Eigen::VectorXd estimate;
  std::vector<int> removed_indices;  // in removal order
  int iterations = 0;
  double final_top_eigenvalue = 0.0;
};

/// Spectral filtering. Each round computes the survivors' mean and 1/|S|
/// covariance, and if the stop rule has not fired removes one survivor,
/// drawn with probability proportional to its squared projection on the top
/// eigenvector.
EstimateReport filter_multivariate(const SampleSet& samples, const FilterConfig& config);

/// p = 1 case: the eigenvalue is the sample variance and the direction is 1.
EstimateReport filter_univariate(const std::vector<double>& values, const FilterConfig& config);

/// ceil(2 ln(1/delta)): the step count used when no covariance bound is known.
int default_filter_steps(double delta);

/// Worst-case number of removals before the threshold rule stops:
/// ceil(18 ln(1/delta) + 3 (n - n_good)).
int stopping_cap(int n, int n_good, double delta);

enum class Setting { heavy_tail, huber };

/// Covariance bound to hand the filter so that its threshold rule matches the
/// corresponding guarantee. `epsilon` is ignored for heavy_tail.
double cov_bound_hint(Setting setting, const MomentProfile& moments, int n, int p, double delta,
                      double epsilon, double C = 1.0);

void to_json(nlohmann::json& j, const FilterConfig& config);
void from_json(const nlohmann::json& j, FilterConfig& config);

}  // namespace robustmean
