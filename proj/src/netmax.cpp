#include "robustmean/netmax.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "chebyshev_lp.hpp"
#include "robustmean/combinatorics.hpp"
#include "robustmean/errors.hpp"
#include "robustmean/filter.hpp"
#include "robustmean/interval.hpp"
#include "robustmean/metrics.hpp"

namespace robustmean {

// ---- covers ----

Eigen::VectorXd random_unit_vector(int p, std::optional<int> support_size, Rng& rng) {
  std::normal_distribution<double> gauss;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
  if (!support_size || *support_size >= p) {
    for (int i = 0; i < p; ++i) u(i) = gauss(rng);
  } else {
    // Partial Fisher-Yates gives a uniform support.
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < *support_size; ++i) {
      std::uniform_int_distribution<int> pick(i, p - 1);
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
      u(idx[static_cast<std::size_t>(i)]) = gauss(rng);
    }
  }
  const double norm = u.norm();
  if (norm == 0.0) return random_unit_vector(p, support_size, rng);
  return u / norm;
}

namespace {

// For unit vectors ||c - u|| <= r  <=>  c . u >= 1 - r^2 / 2.
double nearest_distance(const std::vector<Eigen::VectorXd>& directions, const Eigen::VectorXd& u) {
  double best_dot = -std::numeric_limits<double>::infinity();
  for (const auto& c : directions) best_dot = std::max(best_dot, c.dot(u));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * best_dot));
}

bool covered(const std::vector<Eigen::VectorXd>& directions, const Eigen::VectorXd& u,
             double min_dot) {
  return std::any_of(directions.begin(), directions.end(),
                     [&](const Eigen::VectorXd& c) { return c.dot(u) >= min_dot; });
}

}  // namespace

CoverSet build_half_cover(int p, std::optional<int> sparsity, std::uint64_t seed,
                          const CoverOptions& options) {
  if (p < 1) throw ArgumentError("cover dimension p must be >= 1");
  if (!(options.covering_radius > 0.0 && options.covering_radius < std::sqrt(2.0))) {
    throw ArgumentError("covering radius must lie in (0, sqrt 2)");
  }
  if (options.consecutive_probes < 1) throw ArgumentError("consecutive_probes must be >= 1");
  CoverSet cover;
  cover.covering_radius = options.covering_radius;
  if (sparsity) {
    if (*sparsity < 1 || 2 * *sparsity > p) {
      throw ArgumentError("sparse cover needs 1 <= s <= p/2 (got s = " + std::to_string(*sparsity) +
                          ", p = " + std::to_string(p) + ")");
    }
    cover.support_size = 2 * *sparsity;
  } else if (p > kMaxDenseCoverDimension) {
    throw ArgumentError("dense covers are limited to p <= " +
                        std::to_string(kMaxDenseCoverDimension) + "; set a sparsity level");
  }

  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e(i) = 1.0;
    cover.directions.push_back(e);
    cover.directions.push_back(-e);
  }

  const double min_dot = 1.0 - 0.5 * options.covering_radius * options.covering_radius;
  Rng rng(seed);
  int streak = 0;
  while (streak < options.consecutive_probes) {
    Eigen::VectorXd u = random_unit_vector(p, cover.support_size, rng);
    if (covered(cover.directions, u, min_dot)) {
      ++streak;
    } else {
      cover.directions.push_back(std::move(u));
      streak = 0;
    }
  }
  return cover;
}

double cover_probe_gap(const CoverSet& cover, int probes, std::uint64_t seed) {
  if (cover.directions.empty()) throw ArgumentError("empty cover");
  Rng rng(seed);
  const int p = cover.dimension();
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const Eigen::VectorXd u = random_unit_vector(p, cover.support_size, rng);
    worst = std::max(worst, nearest_distance(cover.directions, u));
  }
  return worst;
}

void check_cover(const CoverSet& cover) {
  if (cover.directions.empty()) throw ArgumentError("empty cover");
  const auto p = cover.directions.front().size();
  for (const auto& u : cover.directions) {
    if (u.size() != p) throw ArgumentError("cover directions differ in dimension");
    if (std::abs(u.norm() - 1.0) > 1e-12) throw ArgumentError("cover direction is not a unit vector");
    if (cover.support_size && (u.array() != 0.0).count() > *cover.support_size) {
      throw ArgumentError("cover direction exceeds the sparse support size");
    }
  }
}

void save_cover_csv(const CoverSet& cover, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  char buf[32];
  for (const auto& u : cover.directions) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", u(i));
      if (i > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

CoverSet load_cover_csv(const std::string& path, std::optional<int> support_size) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cover file '" + path + "'");
  CoverSet cover;
  cover.support_size = support_size;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ConfigError("cover file '" + path + "' has a non-numeric field '" + field + "'");
      }
    }
    cover.directions.emplace_back(
        Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  check_cover(cover);
  return cover;
}

// ---- minimax centre ----

namespace {

constexpr double kMaxSupportEnumeration = 1e4;

detail::ChebyshevFit fit_dense(const CoverSet& cover, const Eigen::VectorXd& targets) {
  const int p = cover.dimension();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(cover.size()), p);
  for (std::size_t j = 0; j < cover.size(); ++j) {
    rows.row(static_cast<Eigen::Index>(j)) = cover.directions[j].transpose();
  }
  return detail::chebyshev_fit(rows, targets);
}

// Best theta supported on `support`. Directions that miss the support see
// u^T theta = 0 and only contribute the constant |m_j|, folded into a single
// zero row.
detail::ChebyshevFit fit_on_support(const CoverSet& cover, const Eigen::VectorXd& targets,
                                    std::span<const int> support) {
  const int p = cover.dimension();
  const auto s = static_cast<Eigen::Index>(support.size());
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  double floor_value = -1.0;
  for (std::size_t j = 0; j < cover.size(); ++j) {
    Eigen::VectorXd proj(s);
    for (Eigen::Index k = 0; k < s; ++k) proj(k) = cover.directions[j](support[static_cast<std::size_t>(k)]);
    if (proj.cwiseAbs().maxCoeff() > 0.0) {
      rows.push_back(std::move(proj));
      rhs.push_back(targets(static_cast<Eigen::Index>(j)));
    } else {
      floor_value = std::max(floor_value, std::abs(targets(static_cast<Eigen::Index>(j))));
    }
  }
  if (floor_value >= 0.0) {
    rows.emplace_back(Eigen::VectorXd::Zero(s));
    rhs.push_back(floor_value);
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), s);
  for (std::size_t i = 0; i < rows.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  auto fit = detail::chebyshev_fit(a, m);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  for (Eigen::Index k = 0; k < s; ++k) theta(support[static_cast<std::size_t>(k)]) = fit.theta(k);
  fit.theta = std::move(theta);
  return fit;
}

double objective_of(const CoverSet& cover, const Eigen::VectorXd& targets, const Eigen::VectorXd& theta) {
  double worst = 0.0;
  for (std::size_t j = 0; j < cover.size(); ++j) {
    worst = std::max(worst, std::abs(cover.directions[j].dot(theta) - targets(static_cast<Eigen::Index>(j))));
  }
  return worst;
}

std::vector<int> top_support(const Eigen::VectorXd& theta, int s) {
  std::vector<int> idx(static_cast<std::size_t>(theta.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(theta(a)) > std::abs(theta(b)); });
  idx.resize(static_cast<std::size_t>(s));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

MinimaxResult minimax_center(const CoverSet& cover, const std::vector<double>& targets,
                             std::optional<int> sparsity, double tol, SupportSearch search) {
  if (cover.directions.empty()) throw ArgumentError("minimax_center: empty cover");
  if (targets.size() != cover.size()) {
    throw ArgumentError("minimax_center: one target per cover direction is required");
  }
  if (!(tol > 0.0)) throw ArgumentError("minimax_center: tol must be > 0");
  const int p = cover.dimension();
  if (sparsity && (*sparsity < 1 || *sparsity > p)) {
    throw ArgumentError("minimax_center: sparsity must lie in [1, p]");
  }

  // Solve on unit-scale targets; the fit is positively homogeneous.
  Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  if (!m.allFinite()) throw ArgumentError("minimax_center: non-finite target");
  const double scale = m.cwiseAbs().maxCoeff();
  MinimaxResult out;
  if (scale == 0.0) {
    out.theta = Eigen::VectorXd::Zero(p);
    if (sparsity) out.support = top_support(out.theta, *sparsity);
    return out;
  }
  m /= scale;

  detail::ChebyshevFit best;
  if (!sparsity || *sparsity == p) {
    best = fit_dense(cover, m);
  } else if (search == SupportSearch::exhaustive ||
             (search == SupportSearch::automatic && binomial(p, *sparsity) <= kMaxSupportEnumeration)) {
    best.objective = std::numeric_limits<double>::infinity();
    for_each_combination(p, *sparsity, [&](std::span<const int> support) {
      auto fit = fit_on_support(cover, m, support);
      if (fit.objective < best.objective) {
        best = std::move(fit);
        out.support.assign(support.begin(), support.end());
      }
    });
  } else {
    const auto dense = fit_dense(cover, m);
    out.support = top_support(dense.theta, *sparsity);
    best = fit_on_support(cover, m, out.support);
    out.heuristic = true;
  }

  out.theta = best.theta * scale;
  out.objective = objective_of(cover, m * scale, out.theta);
  out.lower_bound = best.lower_bound * scale;
  if (!out.heuristic && out.objective - out.lower_bound > tol) {
    throw EstimatorError("minimax_center: duality gap " +
                         std::to_string(out.objective - out.lower_bound) + " exceeds tol");
  }
  return out;
}

// ---- net estimator ----

std::string to_string(InnerEstimator inner) {
  return inner == InnerEstimator::interval1d ? "interval" : "filter";
}

InnerEstimator inner_from_string(const std::string& name) {
  if (name == "interval" || name == "interval1d") return InnerEstimator::interval1d;
  if (name == "filter" || name == "filter1d") return InnerEstimator::filter1d;
  throw ConfigError("unknown inner estimator '" + name + "'");
}

namespace {

// Keep ln(1/delta') far from double overflow in downstream exp/pow calls.
constexpr double kMaxLogConfidence = 700.0;

}  // namespace

double NetConfig::direction_log_confidence(int p) const {
  const double base = std::log(1.0 / delta);
  if (sparsity) {
    const double s = *sparsity;
    return base + s * std::log(6.0 * std::numbers::e * p / s);
  }
  return base + p * std::log(5.0);
}

void NetConfig::validate(int p) const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
  if (sparsity) {
    if (*sparsity < 1 || 2 * *sparsity > p) throw ConfigError("sparsity s must satisfy 1 <= s <= p/2");
  } else if (p > kMaxDenseCoverDimension) {
    throw ConfigError("net estimator without sparsity is limited to p <= " +
                      std::to_string(kMaxDenseCoverDimension));
  }
  if (direction_log_confidence(p) > kMaxLogConfidence) {
    throw ConfigError("per-direction confidence level underflows; reduce s or p");
  }
  if (cov_bound && !(*cov_bound >= 0.0)) throw ConfigError("cov_bound must be >= 0");
  if (!(C > 0.0)) throw ConfigError("C must be > 0");
  if (!(relative_tol > 0.0)) throw ConfigError("relative_tol must be > 0");
}

NetReport net_estimate(const SampleSet& samples, const NetConfig& config, std::uint64_t seed,
                       const CoverSet* cover) {
  const int p = samples.p();
  const int n = samples.n();
  config.validate(p);
  const double log_conf = config.direction_log_confidence(p);

  CoverSet built;
  if (cover == nullptr) {
    built = build_half_cover(p, config.sparsity, derive_seed(seed, fnv1a64("cover")));
    cover = &built;
  } else {
    check_cover(*cover);
    if (cover->dimension() != p) throw ConfigError("cover dimension does not match the samples");
  }

  // Interval1D consumes an even count; an odd trailing sample is dropped.
  const int used = config.inner == InnerEstimator::interval1d ? n - n % 2 : n;
  const auto interval_config = IntervalConfig::from_log_confidence(config.epsilon, log_conf);

  FilterConfig filter;
  filter.threshold_factor = 32.0;
  if (config.cov_bound) {
    const double var = *config.cov_bound;
    filter.cov_bound = config.C * var + var * log_conf / (n * config.epsilon + log_conf);
    filter.stop_mode = StopMode::capped(
        static_cast<int>(std::ceil(18.0 * log_conf + 3.0 * std::ceil(config.epsilon * n))));
  } else {
    filter.stop_mode = StopMode::fixed_steps(static_cast<int>(std::ceil(2.0 * log_conf)));
  }

  NetReport report;
  report.cover_size = cover->size();
  report.direction_estimates.reserve(cover->size());
  std::vector<double> projections(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < cover->size(); ++j) {
    const Eigen::VectorXd z = samples.data() * cover->directions[j];
    std::copy(z.data(), z.data() + n, projections.begin());
    double value;
    if (config.inner == InnerEstimator::interval1d) {
      value = interval_estimate(std::span<const double>(projections.data(), static_cast<std::size_t>(used)),
                                interval_config);
    } else {
      filter.seed = derive_seed(seed, static_cast<std::uint64_t>(j));
      value = filter_univariate(projections, filter).estimate(0);
    }
    report.direction_estimates.push_back(value);
  }

  double scale = 0.0;
  for (double v : report.direction_estimates) scale = std::max(scale, std::abs(v));
  const auto fit = minimax_center(*cover, report.direction_estimates, config.sparsity,
                                  config.relative_tol * std::max(1.0, scale));
  report.estimate = fit.theta;
  report.objective = fit.objective;
  report.heuristic_support = fit.heuristic;
  return report;
}

}  // namespace robustmean
