// Command-line front end: benchmark sweeps, one-shot estimates and cover
// generation. Exit codes: 0 success, 2 configuration error, 3 estimator
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "robustmean/baselines.hpp"
#include "robustmean/bench.hpp"
#include "robustmean/errors.hpp"
#include "robustmean/filter.hpp"
#include "robustmean/interval.hpp"
#include "robustmean/netmax.hpp"

using namespace robustmean;

namespace {

constexpr int kConfigExit = 2;
constexpr int kEstimatorExit = 3;

struct EstimateArgs {
  std::string method;
  std::string in;
  double delta = 0.05;
  double epsilon = 0.0;
  std::optional<int> blocks;
  std::optional<double> cov_bound;
  std::optional<double> threshold_factor;
  std::optional<int> steps;
  std::optional<std::string> stop_mode;
  std::string filter_config;
  std::string true_mean;
  std::optional<double> radius;
  std::string inner = "interval";
  std::optional<int> sparsity;
  std::string cover;
  std::uint64_t seed = 0;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--true-mean: '" + item + "' is not a number");
    }
  }
  return out;
}

FilterConfig filter_config_from(const EstimateArgs& a, int n) {
  FilterConfig config;
  if (!a.filter_config.empty()) config = read_json(a.filter_config).get<FilterConfig>();
  else config.seed = a.seed;
  if (a.cov_bound) config.cov_bound = *a.cov_bound;
  if (a.threshold_factor) config.threshold_factor = *a.threshold_factor;

  std::string mode = a.stop_mode.value_or("");
  if (mode.empty() && a.filter_config.empty()) mode = a.cov_bound ? "threshold" : "fixed_steps";
  if (mode == "fixed_steps" || mode == "fixed") {
    config.stop_mode = StopMode::fixed_steps(a.steps.value_or(default_filter_steps(a.delta)));
  } else if (mode == "threshold") {
    config.stop_mode = StopMode::threshold();
  } else if (mode == "capped") {
    const int n_good = n - static_cast<int>(std::ceil(a.epsilon * n));
    config.stop_mode = StopMode::capped(a.steps.value_or(stopping_cap(n, n_good, a.delta)));
  } else if (!mode.empty()) {
    throw ConfigError("unknown --stop-mode '" + mode + "'");
  } else if (a.steps) {
    config.stop_mode.steps = *a.steps;
  }
  config.validate();
  return config;
}

Eigen::VectorXd run_estimate(const EstimateArgs& a) {
  if (!(a.delta > 0.0 && a.delta < 1.0)) throw ConfigError("--delta must lie in (0, 1)");
  const SampleSet samples = load_samples_csv(a.in);
  const std::string& m = a.method;

  if (m == "mean") return sample_mean(samples);
  if (m == "gmom") {
    const int blocks = a.blocks.value_or(gmom_blocks_experiment(a.delta));
    if (blocks < 1 || blocks > samples.n()) throw ConfigError("--blocks must lie in [1, n]");
    return geometric_median_of_means(samples, blocks);
  }
  if (m == "coord") return coordinatewise_filter(samples, a.delta, a.seed);
  if (m == "filter") return filter_multivariate(samples, filter_config_from(a, samples.n())).estimate;
  if (m == "oracle") {
    if (a.true_mean.empty() || !a.radius) throw ConfigError("oracle needs --true-mean and --radius");
    const auto mu = parse_vector(a.true_mean);
    OracleConfig oracle;
    oracle.true_mean = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    if (oracle.true_mean.size() != samples.p()) throw ConfigError("--true-mean has the wrong dimension");
    oracle.radius = *a.radius;
    return oracle_truncated_mean(samples, oracle);
  }
  if (m == "interval") {
    if (samples.p() != 1) throw ConfigError("interval needs a one-column CSV");
    if (samples.n() % 2 != 0) throw ConfigError("interval needs an even number of samples");
    const Eigen::VectorXd v = samples.data().col(0);
    const double est = interval_estimate(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
                                         IntervalConfig::from_delta(a.epsilon, a.delta));
    return Eigen::VectorXd::Constant(1, est);
  }
  if (m == "net") {
    NetConfig net;
    net.epsilon = a.epsilon;
    net.delta = a.delta;
    net.inner = inner_from_string(a.inner);
    net.sparsity = a.sparsity;
    net.cov_bound = a.cov_bound;
    if (a.cover.empty()) return net_estimate(samples, net, a.seed).estimate;
    const CoverSet cover =
        load_cover_csv(a.cover, a.sparsity ? std::optional<int>(2 * *a.sparsity) : std::nullopt);
    return net_estimate(samples, net, a.seed, &cover).estimate;
  }
  if (m == "srm") return srm_bruteforce(samples, a.epsilon).estimate;
  throw ConfigError("unknown method '" + m + "'");
}

void print_vector(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::printf(i ? ",%.17g" : "%.17g", v(i));
  }
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust mean estimation toolkit"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Run or summarise benchmark sweeps");
  bench->require_subcommand(1);
  std::string config_path, out_path, in_path, summary_out;
  std::optional<double> summary_delta;
  int threads = 0;
  auto* run = bench->add_subcommand("run", "Run a sweep described by a JSON TrialConfig");
  run->add_option("--config", config_path, "TrialConfig JSON")->required();
  run->add_option("--out", out_path, "Trial CSV to write")->required();
  run->add_option("--threads", threads, "Worker threads (default: ROBUSTMEAN_THREADS or all cores)");
  auto* summ = bench->add_subcommand("summarize", "Q_delta, mean loss and failure rate per cell");
  summ->add_option("--in", in_path, "Trial CSV")->required();
  summ->add_option("--delta", summary_delta, "Confidence level (default: 0.2,0.1,0.05,0.02,0.01)");
  summ->add_option("--out", summary_out, "Summary CSV (default: stdout)");

  // estimate
  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate the mean of a CSV of samples");
  est->add_option("--method", ea.method, "mean|gmom|coord|filter|oracle|net|interval|srm")
      ->required()
      ->check(CLI::IsMember({"mean", "gmom", "coord", "filter", "oracle", "net", "interval", "srm"}));
  est->add_option("--in", ea.in, "Sample CSV, one observation per row")->required();
  est->add_option("--delta", ea.delta, "Failure probability")->capture_default_str();
  est->add_option("--epsilon", ea.epsilon, "Contamination fraction")->capture_default_str();
  est->add_option("--blocks", ea.blocks, "GMOM block count");
  est->add_option("--cov-bound", ea.cov_bound, "Covariance operator-norm bound");
  est->add_option("--threshold-factor", ea.threshold_factor, "Filter threshold factor (default 32)");
  est->add_option("--steps", ea.steps, "Filter removal count (fixed_steps / capped)");
  est->add_option("--stop-mode", ea.stop_mode, "threshold|fixed_steps|capped");
  est->add_option("--filter-config", ea.filter_config, "FilterConfig JSON");
  est->add_option("--true-mean", ea.true_mean, "Comma-separated oracle centre");
  est->add_option("--radius", ea.radius, "Oracle radius");
  est->add_option("--inner", ea.inner, "Net inner estimator: interval|filter")->capture_default_str();
  est->add_option("--sparsity", ea.sparsity, "Sparsity s for the net estimator");
  est->add_option("--cover", ea.cover, "Cover CSV to reuse");
  est->add_option("--seed", ea.seed, "Random seed")->capture_default_str();

  // cover
  int cover_p = 0;
  std::optional<int> cover_s;
  std::uint64_t cover_seed = 0;
  int cover_probes = CoverOptions{}.consecutive_probes;
  std::string cover_out;
  auto* cover = app.add_subcommand("cover", "Covers of the unit sphere");
  cover->require_subcommand(1);
  auto* build = cover->add_subcommand("build", "Build a 1/2-cover and write it as CSV");
  build->add_option("--p", cover_p, "Dimension")->required();
  build->add_option("--sparsity", cover_s, "Cover s-sparse directions (supports of size 2s)");
  build->add_option("--out", cover_out, "Cover CSV to write")->required();
  build->add_option("--seed", cover_seed, "Random seed")->capture_default_str();
  build->add_option("--probes", cover_probes, "Consecutive covered probes before stopping")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run) {
      TrialConfig config = read_json(config_path).get<TrialConfig>();
      emit_csv(run_sweep(config, threads), out_path);
    } else if (*summ) {
      const auto records = load_records_csv(in_path);
      const auto rows = summary_delta ? summarize(records, *summary_delta)
                                      : summarize_grid(records, kDefaultDeltaGrid);
      if (summary_out.empty()) write_summary_csv(rows, std::cout);
      else emit_csv(rows, summary_out);
    } else if (*est) {
      print_vector(run_estimate(ea));
    } else if (*build) {
      CoverOptions options;
      options.consecutive_probes = cover_probes;
      save_cover_csv(build_half_cover(cover_p, cover_s, cover_seed, options), cover_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const EstimatorError& e) {
    std::cerr << "estimator failure: " << e.what() << '\n';
    return kEstimatorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
