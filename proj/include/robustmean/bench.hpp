#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "robustmean/model.hpp"

namespace robustmean {

/// One estimator in a sweep. `name` selects the estimator (mean, gmom,
/// coord, filter, oracle, net, interval, srm); `settings` carries its
/// options and an optional "label" used in the output.
struct MethodSpec {
  std::string name;
  nlohmann::json settings = nlohmann::json::object();

  std::string label() const;
};

struct TrialConfig {
  DistributionSpec distribution;
  std::vector<MethodSpec> methods;
  std::vector<int> n_values;
  std::vector<int> p_values;
  double delta = 0.05;
  int trials = 2000;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct TrialRecord {
  std::string method;
  std::string family;
  int n = 0;
  int p = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  int trial_index = 0;
  double loss = 0.0;  // +inf when failed
  bool failed = false;
};

struct SummaryRow {
  std::string method;
  int n = 0;
  int p = 0;
  double delta = 0.0;
  int trials = 0;
  int failures = 0;
  double q_delta = 0.0;  // NaN when every trial failed
  double mean_loss = 0.0;
  double failure_rate = 0.0;
};

/// Thread cap: ROBUSTMEAN_THREADS when set and positive, else the hardware
/// concurrency.
int resolve_thread_count();

/// Run one estimator on one sample. `spec` describes the law the sample came
/// from (methods such as oracle or a filter with a "hint" bound consult it).
Eigen::VectorXd run_method(const MethodSpec& method, const SampleSet& samples,
                           const DistributionSpec& spec, double delta, std::uint64_t seed);

/// Every (method, n, p, trial). Data for (n, p, trial) is shared by all
/// methods; seeds depend only on master_seed and the cell key, so output is
/// identical for any thread count. Records come back in config order:
/// method, then n, then p, then trial.
std::vector<TrialRecord> run_sweep(const TrialConfig& config, int threads = 0);

/// Group by (method, n, p) in first-seen order; Q_delta and the mean use the
/// successful trials only.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, double delta);

/// Confidence levels reported when `bench summarize` is given no --delta.
inline const std::vector<double> kDefaultDeltaGrid = {0.2, 0.1, 0.05, 0.02, 0.01};

/// summarize() at each delta, concatenated in grid order.
std::vector<SummaryRow> summarize_grid(const std::vector<TrialRecord>& records,
                                       const std::vector<double>& deltas);

void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path);

std::vector<TrialRecord> read_records_csv(std::istream& in);
std::vector<TrialRecord> load_records_csv(const std::string& path);

/// Numeric CSV, one observation per row; a leading non-numeric line is taken
/// as a header and skipped.
SampleSet read_samples_csv(std::istream& in);
SampleSet load_samples_csv(const std::string& path);

void from_json(const nlohmann::json& j, TrialConfig& config);
void to_json(nlohmann::json& j, const TrialConfig& config);

}  // namespace robustmean
