#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "robustmean/errors.hpp"
#include "robustmean/filter.hpp"
#include "robustmean/linalg.hpp"
#include "robustmean/model.hpp"

using namespace robustmean;

namespace {

FilterConfig threshold_config(double bound, std::uint64_t seed = 0) {
  FilterConfig c;
  c.cov_bound = bound;
  c.stop_mode = StopMode::threshold();
  c.seed = seed;
  return c;
}

SampleSet ninety_nine_and_one() {
  Eigen::MatrixXd data = Eigen::MatrixXd::Zero(100, 2);
  data(99, 0) = 100.0;
  return SampleSet(data);
}

// Straightforward two-pass population covariance, independent of linalg.
Eigen::MatrixXd reference_covariance(const Eigen::MatrixXd& rows) {
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centred = rows.rowwise() - mean;
  return centred.transpose() * centred / static_cast<double>(rows.rows());
}

Eigen::MatrixXd surviving_rows(const SampleSet& s, const std::vector<int>& removed) {
  std::set<int> gone(removed.begin(), removed.end());
  Eigen::MatrixXd out(s.n() - static_cast<int>(gone.size()), s.p());
  int r = 0;
  for (int i = 0; i < s.n(); ++i) {
    if (!gone.count(i)) out.row(r++) = s.row(i);
  }
  return out;
}

}  // namespace

TEST_CASE("identical points need no removals") {
  Eigen::MatrixXd data = Eigen::RowVector3d(1.5, -2.0, 4.0).replicate(50, 1);
  const auto report = filter_multivariate(SampleSet(data), threshold_config(1.0));
  CHECK(report.iterations == 0);
  CHECK(report.removed_indices.empty());
  CHECK(report.final_top_eigenvalue == 0.0);
  CHECK(report.estimate == Eigen::Vector3d(1.5, -2.0, 4.0));
}

TEST_CASE("zero scatter stops even when cov_bound is zero") {
  Eigen::MatrixXd data = Eigen::MatrixXd::Ones(10, 2);
  const auto report = filter_multivariate(SampleSet(data), threshold_config(0.0));
  CHECK(report.iterations == 0);
}

TEST_CASE("99 versus 1: scores and first removal") {
  const auto s = ninety_nine_and_one();

  // Oracle: direct computation of the first-round covariance and scores.
  const Eigen::MatrixXd cov = reference_covariance(s.data());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  CHECK(eig.eigenvalues().maxCoeff() == doctest::Approx(99.0));
  const Eigen::VectorXd v = eig.eigenvectors().col(1);
  const Eigen::RowVectorXd mean = s.data().colwise().mean();
  double total = 0.0;
  double outlier = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = std::pow(v.dot((s.row(i) - mean).transpose()), 2);
    total += t;
    if (i == 99) outlier = t;
  }
  const double expected = outlier / total;
  CHECK(expected == doctest::Approx(9801.0 / 9900.0));

  int outlier_first = 0;
  const int runs = 20000;
  for (int seed = 0; seed < runs; ++seed) {
    const auto report = filter_multivariate(s, threshold_config(1.0, static_cast<std::uint64_t>(seed)));
    REQUIRE(!report.removed_indices.empty());
    if (report.removed_indices.front() == 99) {
      ++outlier_first;
      CHECK(report.iterations == 1);
      CHECK(report.estimate.isZero(0.0));
      CHECK(report.final_top_eigenvalue == 0.0);
    }
  }
  // 4 binomial standard deviations at 2e4 runs.
  CHECK(std::abs(outlier_first / double(runs) - expected) < 4.0 * std::sqrt(expected * (1 - expected) / runs));
}

TEST_CASE("alternating +-1 stops immediately") {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(i % 2 ? -1.0 : 1.0);
  const auto report = filter_univariate(values, threshold_config(1.0));
  CHECK(report.iterations == 0);
  CHECK(report.final_top_eigenvalue == doctest::Approx(1.0));
  CHECK(report.estimate(0) == doctest::Approx(0.0));
}

TEST_CASE("univariate examples") {
  auto report = filter_univariate({5, 5, 5, 5}, threshold_config(1.0));
  CHECK(report.estimate(0) == 5.0);
  CHECK(report.iterations == 0);

  std::vector<double> values(99, 0.0);
  values.push_back(100.0);
  int hits = 0;
  for (int seed = 0; seed < 2000; ++seed) {
    report = filter_univariate(values, threshold_config(1.0, static_cast<std::uint64_t>(seed)));
    if (report.removed_indices.front() == 99) {
      ++hits;
      CHECK(report.estimate(0) == 0.0);
    }
  }
  CHECK(hits / 2000.0 == doctest::Approx(0.9899).epsilon(0.01));

  CHECK(default_filter_steps(0.05) == 6);
  CHECK_THROWS_AS(filter_univariate({}, threshold_config(1.0)), ArgumentError);
}

TEST_CASE("fixed steps removes exactly T points") {
  const auto s = sample_dataset(DistributionSpec{Family::lognormal, 3, {}, 3.0, std::nullopt}, 60, 4);
  FilterConfig c;
  c.stop_mode = StopMode::fixed_steps(6);
  const auto report = filter_multivariate(s, c);
  CHECK(report.iterations == 6);
  CHECK(report.removed_indices.size() == 6);

  c.stop_mode = StopMode::fixed_steps(59);
  CHECK_THROWS_AS(filter_multivariate(s, c), FilterExhaustedError);
}

TEST_CASE("capped mode stops at the cap or the threshold") {
  const auto s = sample_dataset(DistributionSpec{Family::pareto, 2, {}, 3.0, std::nullopt}, 80, 8);
  FilterConfig c;
  c.cov_bound = 1e-6;
  c.stop_mode = StopMode::capped(3);
  CHECK(filter_multivariate(s, c).iterations == 3);
  c.cov_bound = 1e6;
  CHECK(filter_multivariate(s, c).iterations == 0);
}

TEST_CASE("filter invariants on random instances") {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(5, 40)(gen);
    const int p = std::uniform_int_distribution<int>(1, 4)(gen);
    DistributionSpec spec{Family::pareto, p, {}, 2.5, std::nullopt};
    const auto s = sample_dataset(spec, n, gen());
    FilterConfig c = threshold_config(std::uniform_real_distribution<double>(0.001, 0.2)(gen), gen());
    c.stop_mode = StopMode::capped(n - 2);

    const auto report = filter_multivariate(s, c);
    CHECK(static_cast<int>(report.removed_indices.size()) == report.iterations);
    std::set<int> distinct(report.removed_indices.begin(), report.removed_indices.end());
    CHECK(distinct.size() == report.removed_indices.size());

    const Eigen::MatrixXd rest = surviving_rows(s, report.removed_indices);
    const Eigen::VectorXd mean = rest.colwise().mean().transpose();
    CHECK((report.estimate - mean).norm() <= 1e-12 * std::max(1.0, mean.norm()));

    if (report.iterations < n - 2) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reference_covariance(rest));
      CHECK(eig.eigenvalues().maxCoeff() < c.threshold_factor * c.cov_bound * (1 + 1e-9));
    }
  }
}

TEST_CASE("filter is deterministic in the seed") {
  const auto s = sample_dataset(DistributionSpec{Family::lognormal, 5, {}, 3.0, std::nullopt}, 100, 1);
  FilterConfig c;
  c.stop_mode = StopMode::fixed_steps(6);
  c.seed = 9;
  const auto a = filter_multivariate(s, c);
  const auto b = filter_multivariate(s, c);
  CHECK(a.removed_indices == b.removed_indices);
  CHECK(a.estimate == b.estimate);
}

TEST_CASE("power iteration eigenpair residual") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 1 + trial % 6;
    Eigen::MatrixXd a(p + 3, p);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = g(gen);
    const Eigen::MatrixXd sym = a.transpose() * a / double(p + 3);
    PowerIterationOptions opts;
    opts.seed = gen();
    const auto top = top_eigenpair(sym, opts);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    CHECK(top.value == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-8));
    CHECK((sym * top.vector - top.value * top.vector).norm() <= 1e-8 * top.value);
    CHECK(top.vector.norm() == doctest::Approx(1.0));
  }
  // A repeated top eigenvalue still yields a valid eigenpair.
  const auto flat = top_eigenpair(Eigen::MatrixXd::Identity(4, 4));
  CHECK(flat.value == doctest::Approx(1.0));
  CHECK(top_eigenpair(Eigen::MatrixXd::Zero(3, 3)).value == 0.0);
}

TEST_CASE("stopping cap") {
  CHECK(stopping_cap(50, 50, std::exp(-1.0)) == 18);
  CHECK(stopping_cap(50, 50, 1.0 - 1e-12) == 1);
  CHECK(stopping_cap(110, 100, 0.05) == 84);
  CHECK_THROWS_AS(stopping_cap(10, 10, 0.0), ConfigError);
  CHECK_THROWS_AS(stopping_cap(10, 10, 1.0), ConfigError);
  CHECK_THROWS_AS(stopping_cap(10, 11, 0.5), ConfigError);
}

TEST_CASE("covariance bound hints") {
  MomentProfile two{2, 20.0, 1.0};
  MomentProfile one{1, 20.0, 1.0};
  CHECK(cov_bound_hint(Setting::heavy_tail, two, 200, 20, 0.05, 0.0) == 1.0);
  CHECK(cov_bound_hint(Setting::heavy_tail, two, 200, 20, 0.05, 0.0, 2.5) == 2.5);

  const double cor5 = 1.0 + 20.0 * std::log(400.0) / std::log(20.0);
  CHECK(cor5 == doctest::Approx(41.0).epsilon(1e-4));
  CHECK(cov_bound_hint(Setting::heavy_tail, one, 200, 20, 0.05, 0.0) == doctest::Approx(cor5));
  CHECK(cov_bound_hint(Setting::huber, one, 200, 20, 0.05, 0.0) == doctest::Approx(cor5));

  const double cor6 = 1.0 + 20.0 * std::log(400.0) / (200 * 0.1 + std::log(20.0));
  CHECK(cov_bound_hint(Setting::huber, one, 200, 20, 0.05, 0.1) == doctest::Approx(cor6));
  const double cor7 = 1.0 + 20.0 * std::log(400.0) / std::sqrt(200.0 * 200.0 * 0.1 + 200.0 * std::log(20.0));
  CHECK(cov_bound_hint(Setting::huber, two, 200, 20, 0.05, 0.1) == doctest::Approx(cor7));

  MomentProfile three{3, 20.0, 1.0};
  CHECK_THROWS_AS(cov_bound_hint(Setting::huber, three, 200, 20, 0.05, 0.1), ConfigError);
  CHECK_THROWS_AS(cov_bound_hint(Setting::heavy_tail, two, 200, 20, 1.5, 0.0), ConfigError);
  CHECK_THROWS_AS(cov_bound_hint(Setting::heavy_tail, two, 200, 20, 0.05, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(cov_bound_hint(Setting::huber, two, 200, 20, 0.05, 0.5), ConfigError);
}

TEST_CASE("filter config validation and JSON") {
  FilterConfig c;
  c.cov_bound = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.cov_bound = 1.0;
  c.threshold_factor = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.threshold_factor = 32.0;
  c.stop_mode = StopMode::fixed_steps(-1);
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c.stop_mode = StopMode::capped(84);
  c.seed = 12345678901234567ULL;
  const nlohmann::json j = c;
  const auto back = j.get<FilterConfig>();
  CHECK(back.cov_bound == 1.0);
  CHECK(back.stop_mode.kind == StopMode::Kind::capped);
  CHECK(back.stop_mode.steps == 84);
  CHECK(back.seed == c.seed);

  const auto fixed = nlohmann::json::parse(R"({"stop_mode": {"kind": "fixed_steps", "steps": 6}})").get<FilterConfig>();
  CHECK(fixed.stop_mode.kind == StopMode::Kind::fixed_steps);
  CHECK(fixed.threshold_factor == 32.0);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"stop_mode": {"kind": "fixed_steps"}})").get<FilterConfig>(),
                  ConfigError);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"stop_mode": {"kind": "forever"}})").get<FilterConfig>(),
                  ConfigError);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"cov_bound": "big"})").get<FilterConfig>(), ConfigError);
}
