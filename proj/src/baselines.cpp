#include "robustmean/baselines.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "robustmean/errors.hpp"
#include "robustmean/filter.hpp"
#include "robustmean/linalg.hpp"
#include "robustmean/rng.hpp"

namespace robustmean {

namespace {

std::vector<int> all_rows(int n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

double check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  return std::log(1.0 / delta);
}

}  // namespace

Eigen::VectorXd sample_mean(const SampleSet& samples) {
  return mean_of_rows(samples.data(), all_rows(samples.n()));
}

// ---- geometric median ----

namespace {

double distance_sum(const Eigen::MatrixXd& points, const Eigen::VectorXd& y) {
  return (points.rowwise() - y.transpose()).rowwise().norm().sum();
}

}  // namespace

GeometricMedianResult geometric_median(const Eigen::MatrixXd& points,
                                       const WeiszfeldOptions& options) {
  if (points.rows() < 1) throw ArgumentError("geometric_median: no points");
  if (!(options.tolerance > 0.0)) throw ConfigError("geometric_median: tolerance must be > 0");
  const auto p = points.cols();

  GeometricMedianResult out;
  Eigen::VectorXd y = points.colwise().mean().transpose();
  out.objective_trace.push_back(distance_sum(points, y));
  if (points.rows() == 1) {
    out.median = y;
    return out;
  }

  for (int it = 1; it <= options.max_iterations; ++it) {
    const double anchor_tol = 1e-12 * (1.0 + y.norm());
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd pull = Eigen::VectorXd::Zero(p);
    double inv_sum = 0.0;
    int coincident = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const Eigen::VectorXd diff = points.row(i).transpose() - y;
      const double d = diff.norm();
      if (d <= anchor_tol) {
        ++coincident;
        continue;
      }
      weighted += points.row(i).transpose() / d;
      pull += diff / d;
      inv_sum += 1.0 / d;
    }

    Eigen::VectorXd next;
    if (inv_sum == 0.0) {
      next = y;  // every point coincides with y
    } else if (coincident == 0) {
      next = weighted / inv_sum;
    } else {
      // Vardi-Zhang: y is optimal when the pull of the other points is no
      // stronger than the mass sitting at y.
      const double r = pull.norm();
      if (r <= coincident) {
        out.median = y;
        out.iterations = it;
        return out;
      }
      const double shrink = coincident / r;
      next = (1.0 - shrink) * (weighted / inv_sum) + shrink * y;
    }

    const double step = (next - y).norm();
    y = std::move(next);
    out.objective_trace.push_back(distance_sum(points, y));
    out.iterations = it;
    if (step <= options.tolerance * std::max(1.0, y.norm())) {
      out.median = y;
      return out;
    }
  }
  throw ConvergenceError("Weiszfeld iteration did not converge in " +
                             std::to_string(options.max_iterations) + " iterations",
                         y);
}

Eigen::MatrixXd block_means(const SampleSet& samples, int blocks) {
  const int n = samples.n();
  if (blocks < 1 || blocks > n) {
    throw ConfigError("block count must lie in [1, n] (got " + std::to_string(blocks) + ")");
  }
  Eigen::MatrixXd means(blocks, samples.p());
  const int base = n / blocks;
  const int extra = n % blocks;
  int start = 0;
  for (int b = 0; b < blocks; ++b) {
    const int size = base + (b < extra ? 1 : 0);
    means.row(b) = samples.data().middleRows(start, size).colwise().mean();
    start += size;
  }
  return means;
}

Eigen::VectorXd geometric_median_of_means(const SampleSet& samples, int blocks, double tol) {
  const Eigen::MatrixXd means = block_means(samples, blocks);
  if (blocks == 1) return means.row(0).transpose();
  WeiszfeldOptions options;
  options.tolerance = tol;
  return geometric_median(means, options).median;
}

int gmom_blocks_theory(double delta) {
  return static_cast<int>(std::ceil(3.5 * check_delta(delta)));
}

int gmom_blocks_experiment(double delta) {
  return static_cast<int>(std::ceil(2.0 * check_delta(delta)));
}

// ---- coordinate-wise filter ----

Eigen::VectorXd coordinatewise_filter(const SampleSet& samples, double delta, std::uint64_t seed) {
  FilterConfig config;
  config.stop_mode = StopMode::fixed_steps(default_filter_steps(delta));
  Eigen::VectorXd out(samples.p());
  for (int j = 0; j < samples.p(); ++j) {
    config.seed = derive_seed(seed, static_cast<std::uint64_t>(j));
    const Eigen::VectorXd column = samples.data().col(j);
    out(j) = filter_multivariate(SampleSet(column), config).estimate(0);
  }
  return out;
}

// ---- oracle ----

double RadiusRule::radius() const {
  if (k != 1 && k != 2) throw ConfigError("radius rule needs k in {1, 2}");
  if (n < 1) throw ConfigError("radius rule needs n >= 1");
  if (!(trace_sigma > 0.0)) throw ConfigError("radius rule needs trace_sigma > 0");
  if (!(opnorm_sigma > 0.0) || opnorm_sigma > trace_sigma * (1.0 + 1e-12)) {
    throw ConfigError("radius rule needs 0 < opnorm_sigma <= trace_sigma");
  }
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
  const double rate = check_delta(delta) / n;
  const double root_trace = std::sqrt(trace_sigma);
  if (epsilon > 0.0) {
    const double level = epsilon + rate;
    return root_trace / std::pow(level, k == 1 ? 0.5 : 0.25);
  }
  const double rank = trace_sigma / opnorm_sigma;
  if (k == 2) return root_trace / (std::pow(rank, 0.125) * std::pow(rate, 0.25));
  return root_trace / (std::pow(rank, 0.25) * std::sqrt(rate));
}

double OracleConfig::resolved_radius() const {
  const double r = std::visit(
      [](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, double>) {
          return v;
        } else {
          return v.radius();
        }
      },
      radius);
  if (!(r > 0.0)) throw ConfigError("oracle radius must be > 0");
  return r;
}

namespace {

std::vector<int> oracle_survivors(const SampleSet& samples, const OracleConfig& config) {
  if (config.true_mean.size() != samples.p()) {
    throw ArgumentError("oracle true_mean has the wrong dimension");
  }
  const double r = config.resolved_radius();
  std::vector<int> kept;
  for (int i = 0; i < samples.n(); ++i) {
    if ((samples.row(i).transpose() - config.true_mean).norm() <= r) kept.push_back(i);
  }
  if (kept.empty()) throw EmptyOracleError("every sample lies outside the oracle radius");
  return kept;
}

}  // namespace

Eigen::VectorXd oracle_truncated_mean(const SampleSet& samples, const OracleConfig& config) {
  return mean_of_rows(samples.data(), oracle_survivors(samples, config));
}

double oracle_survivor_covariance(const SampleSet& samples, const OracleConfig& config) {
  const auto kept = oracle_survivors(samples, config);
  const Eigen::VectorXd mean = mean_of_rows(samples.data(), kept);
  return top_eigenpair(covariance_of_rows(samples.data(), kept, mean)).value;
}

// ---- SRM ----

namespace {

constexpr int kSrmMaxRows = 25;

// Depth-first enumeration of size-m subsets with running sums, so each leaf
// costs O(p). Leaves are visited in lexicographic order.
class SubsetSearch {
 public:
  SubsetSearch(const Eigen::MatrixXd& data, int m)
      : data_(data), m_(m), n_(static_cast<int>(data.rows())), sq_norms_(data.rowwise().squaredNorm()) {
    chosen_.reserve(static_cast<std::size_t>(m));
  }

  void run() {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(data_.cols());
    visit(0, sum, 0.0);
  }

  const std::vector<int>& best() const { return best_; }
  double best_loss() const { return best_loss_; }

 private:
  void visit(int next, const Eigen::VectorXd& sum, double sq_sum) {
    const int have = static_cast<int>(chosen_.size());
    if (have == m_) {
      const double scatter = sq_sum - sum.squaredNorm() / m_;
      const double loss = scatter / m_;
      if (loss < best_loss_) {
        best_loss_ = loss;
        best_ = chosen_;
      }
      return;
    }
    for (int i = next; i <= n_ - (m_ - have); ++i) {
      chosen_.push_back(i);
      visit(i + 1, sum + data_.row(i).transpose(), sq_sum + sq_norms_(i));
      chosen_.pop_back();
    }
  }

  const Eigen::MatrixXd& data_;
  int m_;
  int n_;
  Eigen::VectorXd sq_norms_;
  std::vector<int> chosen_;
  std::vector<int> best_;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

}  // namespace

SrmResult srm_bruteforce(const SampleSet& samples, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
  const int n = samples.n();
  if (n > kSrmMaxRows) {
    throw ConfigError("srm_bruteforce enumerates every subset and is limited to n <= 25 (got n = " +
                      std::to_string(n) + "); use a sampled subset search for larger inputs");
  }
  const int m = static_cast<int>(std::floor((1.0 - epsilon) * n + 1e-9));
  if (m < 1) throw ConfigError("floor((1 - epsilon) n) must be >= 1");

  SubsetSearch search(samples.data(), m);
  search.run();

  SrmResult out;
  out.subset = search.best();
  out.loss = search.best_loss();
  out.estimate = mean_of_rows(samples.data(), out.subset);
  return out;
}

double srm_population_bias(double epsilon, double trace_sigma) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
  if (trace_sigma < 0.0) throw ConfigError("trace_sigma must be >= 0");
  return epsilon / std::sqrt((1.0 - epsilon) * (1.0 - 2.0 * epsilon)) * std::sqrt(trace_sigma);
}

double srm_mixture_risk(double eta, double trace_p, double trace_q, double mean_gap_sq) {
  return (1.0 - eta) * trace_p + eta * trace_q + eta * (1.0 - eta) * mean_gap_sq;
}

double srm_threshold_distance(double epsilon, double trace_p, double trace_q) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
  const double gap = trace_p - trace_q;
  if (gap <= 0.0) return 0.0;
  return std::sqrt((1.0 - epsilon) / (1.0 - 2.0 * epsilon) * gap);
}

}  // namespace robustmean
