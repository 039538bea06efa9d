#include "robustmean/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "robustmean/baselines.hpp"
#include "robustmean/errors.hpp"
#include "robustmean/filter.hpp"
#include "robustmean/interval.hpp"
#include "robustmean/metrics.hpp"
#include "robustmean/netmax.hpp"
#include "robustmean/rng.hpp"

namespace robustmean {

std::string MethodSpec::label() const {
  if (settings.is_object() && settings.contains("label")) return settings.at("label").get<std::string>();
  return name;
}

namespace {

const std::vector<std::string> kMethods = {"mean", "gmom", "coord", "filter",
                                           "oracle", "net", "interval", "srm"};

double spec_epsilon(const DistributionSpec& spec) {
  return spec.contamination ? spec.contamination->epsilon : 0.0;
}

DistributionSpec clean_part(const DistributionSpec& spec) {
  DistributionSpec clean;
  clean.family = spec.family;
  clean.p = spec.p;
  clean.covariance = spec.covariance;
  clean.tail_beta = spec.tail_beta;
  return clean;
}

double method_epsilon(const nlohmann::json& s, const DistributionSpec& spec) {
  return s.value("epsilon", spec_epsilon(spec));
}

FilterConfig filter_config_for(const nlohmann::json& s, const SampleSet& samples,
                               const DistributionSpec& spec, double delta, std::uint64_t seed) {
  FilterConfig config;
  config.seed = seed;
  config.threshold_factor = s.value("threshold_factor", 32.0);

  if (s.contains("cov_bound")) {
    const auto& bound = s.at("cov_bound");
    if (bound.is_string()) {
      if (bound.get<std::string>() != "hint") throw ConfigError("filter cov_bound must be a number or \"hint\"");
      const double eps = method_epsilon(s, spec);
      const std::string setting_name = s.value("setting", eps > 0.0 ? "huber" : "heavy_tail");
      Setting setting;
      if (setting_name == "huber") {
        setting = Setting::huber;
      } else if (setting_name == "heavy_tail") {
        setting = Setting::heavy_tail;
      } else {
        throw ConfigError("unknown filter setting '" + setting_name + "'");
      }
      config.cov_bound = cov_bound_hint(setting, population_moments(clean_part(spec)), samples.n(),
                                        samples.p(), delta, eps, s.value("C", 1.0));
    } else {
      config.cov_bound = bound.get<double>();
    }
  }

  const bool has_bound = s.contains("cov_bound");
  const std::string mode = s.value("stop_mode", has_bound ? "threshold" : "fixed_steps");
  if (mode == "fixed_steps" || mode == "fixed") {
    config.stop_mode = StopMode::fixed_steps(s.value("steps", default_filter_steps(delta)));
  } else if (mode == "threshold") {
    if (!has_bound) throw ConfigError("threshold stop mode needs a cov_bound");
    config.stop_mode = StopMode::threshold();
  } else if (mode == "capped") {
    if (!has_bound) throw ConfigError("capped stop mode needs a cov_bound");
    const int n = samples.n();
    const int n_good = n - static_cast<int>(std::ceil(method_epsilon(s, spec) * n));
    config.stop_mode = StopMode::capped(s.value("steps", stopping_cap(n, n_good, delta)));
  } else {
    throw ConfigError("unknown stop mode '" + mode + "'");
  }
  return config;
}

}  // namespace

Eigen::VectorXd run_method(const MethodSpec& method, const SampleSet& samples,
                           const DistributionSpec& spec, double delta, std::uint64_t seed) {
  const auto& s = method.settings;
  try {
    if (method.name == "mean") return sample_mean(samples);
    if (method.name == "gmom") {
      const int blocks = s.value("blocks", gmom_blocks_experiment(delta));
      return geometric_median_of_means(samples, std::min(blocks, samples.n()), s.value("tol", 1e-10));
    }
    if (method.name == "coord") return coordinatewise_filter(samples, delta, seed);
    if (method.name == "filter") {
      return filter_multivariate(samples, filter_config_for(s, samples, spec, delta, seed)).estimate;
    }
    if (method.name == "oracle") {
      OracleConfig oracle;
      oracle.true_mean = population_mean(spec);
      if (s.contains("radius") && s.at("radius").is_number()) {
        oracle.radius = s.at("radius").get<double>();
      } else {
        const auto moments = population_moments(clean_part(spec));
        RadiusRule rule;
        rule.k = s.value("k", moments.k);
        rule.trace_sigma = moments.trace_sigma;
        rule.opnorm_sigma = moments.opnorm_sigma;
        rule.n = samples.n();
        rule.delta = delta;
        rule.epsilon = method_epsilon(s, spec);
        oracle.radius = rule;
      }
      return oracle_truncated_mean(samples, oracle);
    }
    if (method.name == "net") {
      NetConfig net;
      net.epsilon = method_epsilon(s, spec);
      net.delta = delta;
      net.inner = inner_from_string(s.value("inner", std::string("interval")));
      if (s.contains("sparsity")) net.sparsity = s.at("sparsity").get<int>();
      if (s.contains("cov_bound")) net.cov_bound = s.at("cov_bound").get<double>();
      net.C = s.value("C", 1.0);
      return net_estimate(samples, net, seed).estimate;
    }
    if (method.name == "interval") {
      if (samples.p() != 1) throw ConfigError("interval method needs p = 1");
      const auto& col = samples.data();
      const int used = samples.n() - samples.n() % 2;
      const auto config = IntervalConfig::from_delta(method_epsilon(s, spec), delta);
      Eigen::VectorXd v = col.col(0);
      return Eigen::VectorXd::Constant(
          1, interval_estimate(std::span<const double>(v.data(), static_cast<std::size_t>(used)), config));
    }
    if (method.name == "srm") return srm_bruteforce(samples, method_epsilon(s, spec)).estimate;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad settings for method '" + method.name + "': " + e.what());
  }
  throw ConfigError("unknown method '" + method.name + "'");
}

void TrialConfig::validate() const {
  distribution.validate();
  if (methods.empty()) throw ConfigError("sweep needs at least one method");
  if (n_values.empty() || p_values.empty()) throw ConfigError("sweep needs n_values and p_values");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  for (int n : n_values) {
    if (n < 1) throw ConfigError("every n must be >= 1");
  }
  for (int p : p_values) {
    if (p < 1) throw ConfigError("every p must be >= 1");
    with_dimension(distribution, p).validate();
  }
  std::map<std::string, int> seen;
  for (const auto& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m.name) == kMethods.end()) {
      throw ConfigError("unknown method '" + m.name + "'");
    }
    if (!m.settings.is_object()) throw ConfigError("method settings must be a JSON object");
    if (++seen[m.label()] > 1) throw ConfigError("duplicate method label '" + m.label() + "'");
  }
}

int resolve_thread_count() {
  if (const char* env = std::getenv("ROBUSTMEAN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialRecord> run_sweep(const TrialConfig& config, int threads) {
  config.validate();
  if (threads <= 0) threads = resolve_thread_count();

  const auto n_count = config.n_values.size();
  const auto p_count = config.p_values.size();
  const auto trials = static_cast<std::size_t>(config.trials);
  const auto m_count = config.methods.size();
  const std::size_t tasks = n_count * p_count * trials;

  std::vector<DistributionSpec> specs;
  for (int p : config.p_values) specs.push_back(with_dimension(config.distribution, p));
  const double eps = spec_epsilon(config.distribution);
  const std::string family = to_string(config.distribution.family);

  // Slot for (method, n, p, trial) in canonical order.
  std::vector<TrialRecord> records(m_count * tasks);
  auto slot = [&](std::size_t m, std::size_t ni, std::size_t pi, std::size_t t) {
    return ((m * n_count + ni) * p_count + pi) * trials + t;
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const std::size_t t = task % trials;
      const std::size_t pi = (task / trials) % p_count;
      const std::size_t ni = task / (trials * p_count);
      const int n = config.n_values[ni];
      const int p = config.p_values[pi];
      try {
        const std::string data_key = "data|" + std::to_string(n) + "|" + std::to_string(p);
        const auto sample = sample_dataset(specs[pi], n, derive_seed(config.master_seed, fnv1a64(data_key), t));
        const Eigen::VectorXd truth = population_mean(specs[pi]);
        for (std::size_t m = 0; m < m_count; ++m) {
          const auto& method = config.methods[m];
          const std::string key = "method|" + method.label() + "|" + std::to_string(n) + "|" + std::to_string(p);
          TrialRecord& rec = records[slot(m, ni, pi, t)];
          rec = {method.label(), family, n, p, config.delta, eps, static_cast<int>(t), 0.0, false};
          try {
            const auto estimate = run_method(method, sample, specs[pi], config.delta,
                                             derive_seed(config.master_seed, fnv1a64(key), t));
            rec.loss = l2_loss(estimate, truth);
          } catch (const EstimatorError&) {
            rec.loss = std::numeric_limits<double>::infinity();
            rec.failed = true;
          }
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };

  const int pool = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), tasks));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::jthread> workers;
    for (int i = 0; i < pool; ++i) workers.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> losses;
  std::map<std::tuple<std::string, int, int>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.method, r.n, r.p);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back({r.method, r.n, r.p, delta, 0, 0, 0.0, 0.0, 0.0});
      losses.emplace_back();
    }
    auto& row = rows[it->second];
    ++row.trials;
    if (r.failed) {
      ++row.failures;
    } else {
      losses[it->second].push_back(r.loss);
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    const auto& l = losses[i];
    row.failure_rate = static_cast<double>(row.failures) / row.trials;
    if (l.empty()) {
      row.q_delta = std::numeric_limits<double>::quiet_NaN();
      row.mean_loss = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.q_delta = quantile_error(l, delta);
      double sum = 0.0;
      for (double v : l) sum += v;
      row.mean_loss = sum / static_cast<double>(l.size());
    }
  }
  return rows;
}

std::vector<SummaryRow> summarize_grid(const std::vector<TrialRecord>& records,
                                       const std::vector<double>& deltas) {
  std::vector<SummaryRow> out;
  for (double d : deltas) {
    auto rows = summarize(records, d);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

// ---- CSV ----

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;  // shortest round-trip form
  return {buf, end};
}

constexpr const char* kRecordHeader = "method,family,n,p,delta,epsilon,trial_index,loss,failed";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v)) throw ConfigError("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.method << ',' << r.family << ',' << r.n << ',' << r.p << ',' << fmt_double(r.delta) << ','
        << fmt_double(r.epsilon) << ',' << r.trial_index << ',' << fmt_double(r.loss) << ','
        << (r.failed ? 1 : 0) << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "method,n,p,delta,trials,failures,q_delta,mean_loss,failure_rate\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.n << ',' << r.p << ',' << fmt_double(r.delta) << ',' << r.trials << ',' << r.failures << ','
        << fmt_double(r.q_delta) << ',' << fmt_double(r.mean_loss) << ',' << fmt_double(r.failure_rate)
        << '\n';
  }
}

namespace {

template <typename Rows, typename Writer>
void write_file(const Rows& rows, const std::string& path, Writer writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  writer(rows, out);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  write_file(records, path, [](const auto& r, std::ostream& o) { write_records_csv(r, o); });
}

void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  write_file(rows, path, [](const auto& r, std::ostream& o) { write_summary_csv(r, o); });
}

std::vector<TrialRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordHeader) {
    throw ConfigError("trial CSV must start with the header '" + std::string(kRecordHeader) + "'");
  }
  std::vector<TrialRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) throw ConfigError("trial CSV line " + std::to_string(line_no) + " has " +
                                         std::to_string(f.size()) + " fields, expected 9");
    TrialRecord r;
    r.method = f[0];
    r.family = f[1];
    r.n = parse_int(f[2]);
    r.p = parse_int(f[3]);
    r.delta = parse_double(f[4]);
    r.epsilon = parse_double(f[5]);
    r.trial_index = parse_int(f[6]);
    r.loss = parse_double(f[7]);
    r.failed = parse_int(f[8]) != 0;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialRecord> load_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_records_csv(in);
}

SampleSet read_samples_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    std::vector<double> row;
    try {
      for (const auto& f : fields) row.push_back(parse_double(f));
    } catch (const ConfigError&) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw ConfigError("sample CSV line " + std::to_string(line_no) + " is not numeric");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("sample CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(row.size()) + " columns, expected " +
                        std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("sample CSV has no rows");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return SampleSet(std::move(data));
}

SampleSet load_samples_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_samples_csv(in);
}

// ---- JSON ----

void from_json(const nlohmann::json& j, TrialConfig& config) {
  try {
    config = TrialConfig{};
    config.distribution = j.at("distribution").get<DistributionSpec>();
    for (const auto& m : j.at("methods")) {
      MethodSpec spec;
      if (m.is_string()) {
        spec.name = m.get<std::string>();
      } else {
        spec.name = m.at("name").get<std::string>();
        spec.settings = m.value("settings", nlohmann::json::object());
        if (m.contains("label")) spec.settings["label"] = m.at("label");
      }
      config.methods.push_back(std::move(spec));
    }
    config.n_values = j.at("n_values").get<std::vector<int>>();
    config.p_values = j.value("p_values", std::vector<int>{config.distribution.p});
    config.delta = j.value("delta", 0.05);
    config.trials = j.value("trials", 2000);
    config.master_seed = j.value("master_seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed trial config: ") + e.what());
  }
  config.validate();
}

void to_json(nlohmann::json& j, const TrialConfig& config) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : config.methods) methods.push_back({{"name", m.name}, {"settings", m.settings}});
  j = {{"distribution", config.distribution},
       {"methods", methods},
       {"n_values", config.n_values},
       {"p_values", config.p_values},
       {"delta", config.delta},
       {"trials", config.trials},
       {"master_seed", config.master_seed}};
}

}  // namespace robustmean
