#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace robustmean {

// Two families: bad input (exit code 2 from the CLI) and an estimator that
// could not produce an answer on valid input (exit code 3).

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Out-of-range arguments to a primitive (window size, dimension mismatch).
class ArgumentError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FilterExhaustedError : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

class DegenerateScoresError : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

class EmptySecondHalfError : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

class EmptyOracleError : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

/// Weiszfeld did not reach tolerance; the last iterate is kept for inspection.
class ConvergenceError : public EstimatorError {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate)
      : EstimatorError(what), last_iterate_(std::move(last_iterate)) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }

 private:
  Eigen::VectorXd last_iterate_;
};

}  // namespace robustmean
