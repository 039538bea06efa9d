#pragma once

#include <span>
#include <vector>

namespace robustmean {

struct Interval {
  double a = 0.0;
  double b = 0.0;

  double length() const { return b - a; }
  bool contains(double x) const { return a <= x && x <= b; }
};

/// Confidence is carried as ln(1/delta) so that tiny per-direction levels
/// such as delta / 5^p never underflow.
struct IntervalConfig {
  double epsilon = 0.0;
  double log_inv_delta = 0.0;

  static IntervalConfig from_delta(double epsilon, double delta);
  static IntervalConfig from_log_confidence(double epsilon, double log_inv_delta);
};

/// Shortest window [values[i], values[i+m-1]] over sorted input; ties go to
/// the smallest i.
Interval shortest_interval(std::span<const double> sorted_values, int m);

/// Number of first-half points the interval must cover, for halves of size n.
int interval_count(int n, const IntervalConfig& config);

/// Throws ConfigError unless
///   2 eps + sqrt(eps ln(4/delta) / n) + ln(4/delta) / n < 1/2.
void check_interval_precondition(int n, const IntervalConfig& config);

struct IntervalResult {
  double estimate = 0.0;
  Interval interval;
  int count = 0;  // points the interval was sized to cover
  int kept = 0;   // second-half points inside the interval
};

/// Robust 1D mean from 2n values: the first n choose the shortest interval
/// covering `interval_count` of them, the last n are averaged inside it.
IntervalResult interval_estimate_detailed(std::span<const double> samples,
                                          const IntervalConfig& config);

double interval_estimate(std::span<const double> samples, const IntervalConfig& config);

}  // namespace robustmean
