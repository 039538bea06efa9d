#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "robustmean/errors.hpp"
#include "robustmean/metrics.hpp"

using namespace robustmean;

namespace {

// inf{a : #(loss > a) / N <= delta}, scanning candidate values directly.
double quantile_by_scan(const std::vector<double>& losses, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (double a : losses) {
    int above = 0;
    for (double l : losses) above += l > a;
    if (static_cast<double>(above) / static_cast<double>(losses.size()) <= delta) best = std::min(best, a);
  }
  return best;
}

}  // namespace

TEST_CASE("l2 loss") {
  CHECK(l2_loss(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2)) == 0.0);
  CHECK(l2_loss(Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 0)) == 5.0);
  CHECK_THROWS_AS(l2_loss(Eigen::Vector2d(3, 4), Eigen::Vector3d(0, 0, 0)), ArgumentError);
}

TEST_CASE("quantile error examples") {
  std::vector<double> same(17, 2.5);
  CHECK(quantile_error(same, 0.05) == 2.5);

  std::vector<double> hundred;
  for (int i = 1; i <= 100; ++i) hundred.push_back(i);
  CHECK(quantile_error(hundred, 0.05) == 95.0);

  std::vector<double> three{3, 1, 2};
  CHECK(quantile_error(three, 0.5) == 2.0);

  CHECK_THROWS_AS(quantile_error(std::vector<double>{}, 0.1), ArgumentError);
  CHECK_THROWS_AS(quantile_error(three, 0.0), ArgumentError);
}

TEST_CASE("quantile error matches the inf definition") {
  std::mt19937_64 gen(8);
  const std::vector<double> grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.25, 0.5, 0.75};
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 300)(gen);
    std::vector<double> losses(static_cast<std::size_t>(n));
    for (auto& l : losses) l = trial % 3 == 0 ? std::uniform_int_distribution<int>(0, 9)(gen)
                                              : std::exponential_distribution<double>(1.0)(gen);
    const double delta = trial % 2 ? grid[static_cast<std::size_t>(trial) % grid.size()]
                                   : std::uniform_real_distribution<double>(0.001, 0.999)(gen);
    CHECK(quantile_error(losses, delta) == quantile_by_scan(losses, delta));
  }
}

TEST_CASE("quantile error is non-increasing in delta") {
  std::mt19937_64 gen(9);
  std::vector<double> losses(250);
  for (auto& l : losses) l = std::lognormal_distribution<double>()(gen);
  double prev = std::numeric_limits<double>::infinity();
  for (double d = 0.001; d < 1.0; d += 0.001) {
    const double q = quantile_error(losses, d);
    CHECK(q <= prev);
    prev = q;
  }
}

TEST_CASE("opt bound") {
  CHECK(opt_bound(100, 0.0, 0.0, 0.05) == 0.0);
  CHECK(opt_bound(100, 20.0, 1.0, 0.05) == doctest::Approx(0.6203).epsilon(1e-4));
  CHECK(opt_bound(100, 20.0, 1.0, 0.05) ==
        doctest::Approx(std::sqrt(0.2) + std::sqrt(std::log(20.0) / 100.0)));
  CHECK(opt_bound(200, 20.0, 1.0, 0.05) < opt_bound(100, 20.0, 1.0, 0.05));
  CHECK(opt_bound(100, 21.0, 1.0, 0.05) > opt_bound(100, 20.0, 1.0, 0.05));
  CHECK(opt_bound(100, 20.0, 2.0, 0.05) > opt_bound(100, 20.0, 1.0, 0.05));
  CHECK(opt_bound(100, 20.0, 1.0, 0.01) > opt_bound(100, 20.0, 1.0, 0.05));
  CHECK_THROWS_AS(opt_bound(0, 1.0, 1.0, 0.05), ArgumentError);
  CHECK_THROWS_AS(opt_bound(10, 1.0, 1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(opt_bound(10, -1.0, 1.0, 0.5), ArgumentError);
}

TEST_CASE("sparse operator norm") {
  CHECK(sparse_opnorm(Eigen::MatrixXd::Identity(5, 5), 2) == doctest::Approx(1.0));
  CHECK(sparse_opnorm(Eigen::Vector3d(3, 1, 2).asDiagonal(), 2) == doctest::Approx(3.0));
  Eigen::Matrix2d m;
  m << 1.0, 0.5, 0.5, 1.0;
  CHECK(sparse_opnorm(m, 2) == doctest::Approx(1.5));
  CHECK(sparse_opnorm(m, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sparse_opnorm(Eigen::MatrixXd::Identity(30, 30), 10), ArgumentError);
  CHECK_THROWS_AS(sparse_opnorm(Eigen::MatrixXd::Identity(3, 3), 4), ArgumentError);
}

TEST_CASE("binomial") {
  CHECK(binomial(5, 2) == 10.0);
  CHECK(binomial(20, 10) == 184756.0);
  CHECK(binomial(4, 5) == 0.0);
  CHECK(binomial(7, 0) == 1.0);
}
