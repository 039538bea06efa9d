#include "robustmean/filter.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "robustmean/errors.hpp"
#include "robustmean/linalg.hpp"
#include "robustmean/rng.hpp"

namespace robustmean {

void FilterConfig::validate() const {
  if (!(cov_bound >= 0.0) || !std::isfinite(cov_bound)) {
    throw ConfigError("cov_bound must be finite and >= 0");
  }
  if (!(threshold_factor > 0.0) || !std::isfinite(threshold_factor)) {
    throw ConfigError("threshold_factor must be finite and > 0");
  }
  if (stop_mode.steps < 0) throw ConfigError("filter step count must be >= 0");
}

namespace {

bool should_stop(const FilterConfig& config, int iterations, double lambda) {
  // Zero scatter leaves nothing to score, whatever the stop rule says.
  if (lambda <= 0.0) return true;
  const bool below = lambda < config.threshold_factor * config.cov_bound;
  switch (config.stop_mode.kind) {
    case StopMode::Kind::threshold: return below;
    case StopMode::Kind::fixed_steps: return iterations >= config.stop_mode.steps;
    case StopMode::Kind::capped: return below || iterations >= config.stop_mode.steps;
  }
  return true;
}

}  // namespace

EstimateReport filter_multivariate(const SampleSet& samples, const FilterConfig& config) {
  config.validate();
  const auto& data = samples.data();

  std::vector<int> survivors(static_cast<std::size_t>(samples.n()));
  std::iota(survivors.begin(), survivors.end(), 0);

  Rng rng(derive_seed(config.seed, 1));
  std::uniform_real_distribution<double> uniform;
  std::vector<double> scores;

  EstimateReport report;
  while (true) {
    if (survivors.size() < 2) {
      throw FilterExhaustedError("filter ran out of points after " +
                                 std::to_string(report.iterations) + " removals");
    }
    const Eigen::VectorXd mean = mean_of_rows(data, survivors);
    const Eigen::MatrixXd cov = covariance_of_rows(data, survivors, mean);
    PowerIterationOptions power;
    power.seed = derive_seed(config.seed, 2, static_cast<std::uint64_t>(report.iterations));
    const Eigenpair top = top_eigenpair(cov, power);

    report.final_top_eigenvalue = top.value;
    if (should_stop(config, report.iterations, top.value)) {
      report.estimate = mean;
      return report;
    }

    scores.resize(survivors.size());
    double total = 0.0;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      const double proj = top.vector.dot(data.row(survivors[i]).transpose() - mean);
      scores[i] = proj * proj;
      total += scores[i];
    }
    // total = |S| * lambda, which is positive here.
    if (!(total > 0.0)) throw DegenerateScoresError("all filter scores are zero");

    const double target = uniform(rng) * total;
    std::size_t pick = 0;
    double running = scores[0];
    while (running <= target && pick + 1 < scores.size()) running += scores[++pick];
    // Floating-point slack can leave `pick` on a zero-score point; step back
    // to the last point with positive mass.
    while (scores[pick] == 0.0 && pick > 0) --pick;

    report.removed_indices.push_back(survivors[pick]);
    survivors.erase(survivors.begin() + static_cast<std::ptrdiff_t>(pick));
    ++report.iterations;
  }
}

EstimateReport filter_univariate(const std::vector<double>& values, const FilterConfig& config) {
  if (values.empty()) throw ArgumentError("filter_univariate needs at least one value");
  return filter_multivariate(SampleSet::from_values(values), config);
}

int default_filter_steps(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  return static_cast<int>(std::ceil(2.0 * std::log(1.0 / delta)));
}

int stopping_cap(int n, int n_good, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (n_good < 0 || n_good > n) throw ConfigError("n_good must lie in [0, n]");
  return static_cast<int>(std::ceil(18.0 * std::log(1.0 / delta) + 3.0 * (n - n_good)));
}

double cov_bound_hint(Setting setting, const MomentProfile& moments, int n, int p, double delta,
                      double epsilon, double C) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(C > 0.0)) throw ConfigError("constant C must be > 0");
  if (n < 1 || p < 1) throw ConfigError("n and p must be >= 1");
  const double log_inv = std::log(1.0 / delta);
  const double log_p = std::log(p / delta);
  const double base = C * moments.opnorm_sigma;

  if (setting == Setting::heavy_tail) {
    if (moments.k == 2) return base;
    if (moments.k == 1) return base + moments.trace_sigma * log_p / log_inv;
  } else {
    if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
    const double nd = n;
    if (moments.k == 1) return base + moments.trace_sigma * log_p / (nd * epsilon + log_inv);
    if (moments.k == 2) {
      return base + moments.trace_sigma * log_p / std::sqrt(nd * nd * epsilon + nd * log_inv);
    }
  }
  throw ConfigError("no covariance bound for k = " + std::to_string(moments.k));
}

namespace {

std::string kind_name(StopMode::Kind kind) {
  switch (kind) {
    case StopMode::Kind::threshold: return "threshold";
    case StopMode::Kind::fixed_steps: return "fixed_steps";
    case StopMode::Kind::capped: return "capped";
  }
  return "threshold";
}

StopMode::Kind kind_from_name(const std::string& name) {
  if (name == "threshold") return StopMode::Kind::threshold;
  if (name == "fixed_steps" || name == "fixed") return StopMode::Kind::fixed_steps;
  if (name == "capped") return StopMode::Kind::capped;
  throw ConfigError("unknown stop mode '" + name + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const FilterConfig& config) {
  nlohmann::json mode = {{"kind", kind_name(config.stop_mode.kind)}};
  if (config.stop_mode.kind != StopMode::Kind::threshold) mode["steps"] = config.stop_mode.steps;
  j = {{"cov_bound", config.cov_bound},
       {"threshold_factor", config.threshold_factor},
       {"stop_mode", mode},
       {"seed", config.seed}};
}

void from_json(const nlohmann::json& j, FilterConfig& config) {
  try {
    config = FilterConfig{};
    config.cov_bound = j.value("cov_bound", 0.0);
    config.threshold_factor = j.value("threshold_factor", 32.0);
    config.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("stop_mode")) {
      const auto& m = j.at("stop_mode");
      config.stop_mode.kind = kind_from_name(m.at("kind").get<std::string>());
      config.stop_mode.steps = m.value("steps", 0);
      if (config.stop_mode.kind != StopMode::Kind::threshold && !m.contains("steps")) {
        throw ConfigError("stop_mode '" + kind_name(config.stop_mode.kind) + "' needs steps");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed filter config: ") + e.what());
  }
  config.validate();
}

}  // namespace robustmean
