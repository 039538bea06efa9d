#include "robustmean/interval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "robustmean/errors.hpp"

namespace robustmean {

IntervalConfig IntervalConfig::from_delta(double epsilon, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  return from_log_confidence(epsilon, std::log(1.0 / delta));
}

IntervalConfig IntervalConfig::from_log_confidence(double epsilon, double log_inv_delta) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
  if (!(log_inv_delta > 0.0) || !std::isfinite(log_inv_delta)) {
    throw ConfigError("ln(1/delta) must be finite and > 0");
  }
  return {epsilon, log_inv_delta};
}

Interval shortest_interval(std::span<const double> sorted_values, int m) {
  const auto size = static_cast<int>(sorted_values.size());
  if (m < 1 || m > size) {
    throw ArgumentError("window size " + std::to_string(m) + " outside [1, " +
                        std::to_string(size) + "]");
  }
  int best = 0;
  double best_len = sorted_values[static_cast<std::size_t>(m - 1)] - sorted_values[0];
  for (int i = 1; i + m - 1 < size; ++i) {
    const double len = sorted_values[static_cast<std::size_t>(i + m - 1)] -
                       sorted_values[static_cast<std::size_t>(i)];
    if (len < best_len) {
      best_len = len;
      best = i;
    }
  }
  return {sorted_values[static_cast<std::size_t>(best)],
          sorted_values[static_cast<std::size_t>(best + m - 1)]};
}

namespace {

double log4_inv_delta(const IntervalConfig& config) {
  return std::numbers::ln2 * 2.0 + config.log_inv_delta;
}

}  // namespace

void check_interval_precondition(int n, const IntervalConfig& config) {
  const double l4 = log4_inv_delta(config);
  const double eps = config.epsilon;
  const double lhs = 2.0 * eps + std::sqrt(eps * l4 / n) + l4 / n;
  if (!(lhs < 0.5)) {
    throw ConfigError("interval estimator needs 2eps + sqrt(eps ln(4/delta)/n) + ln(4/delta)/n < 1/2"
                      " (got " + std::to_string(lhs) + " with n = " + std::to_string(n) + ")");
  }
}

int interval_count(int n, const IntervalConfig& config) {
  const double nd = n;
  const double l4 = log4_inv_delta(config);
  const double alpha = std::max(config.epsilon, config.log_inv_delta / nd);
  const double frac = 1.0 - 2.0 * alpha - std::sqrt(2.0 * alpha * l4 / nd) - l4 / nd;
  const double raw = std::ceil(nd * frac);
  return static_cast<int>(std::clamp(raw, 1.0, nd));
}

IntervalResult interval_estimate_detailed(std::span<const double> samples,
                                          const IntervalConfig& config) {
  if (samples.size() < 4 || samples.size() % 2 != 0) {
    throw ArgumentError("interval estimator needs an even number (>= 4) of samples");
  }
  const int n = static_cast<int>(samples.size() / 2);
  check_interval_precondition(n, config);

  std::vector<double> first(samples.begin(), samples.begin() + n);
  std::sort(first.begin(), first.end());

  IntervalResult result;
  result.count = interval_count(n, config);
  result.interval = shortest_interval(first, result.count);

  double sum = 0.0;
  for (double z : samples.subspan(static_cast<std::size_t>(n))) {
    if (result.interval.contains(z)) {
      sum += z;
      ++result.kept;
    }
  }
  if (result.kept == 0) {
    throw EmptySecondHalfError("no second-half sample falls inside the selected interval");
  }
  result.estimate = sum / result.kept;
  return result;
}

double interval_estimate(std::span<const double> samples, const IntervalConfig& config) {
  return interval_estimate_detailed(samples, config).estimate;
}

}  // namespace robustmean
