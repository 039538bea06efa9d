#include "robustmean/linalg.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "robustmean/rng.hpp"

namespace robustmean {

namespace {

Eigenpair dense_top_eigenpair(const Eigen::MatrixXd& sym, int iterations) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const auto last = sym.rows() - 1;
  Eigenpair out;
  out.value = std::max(0.0, solver.eigenvalues()(last));
  out.vector = solver.eigenvectors().col(last);
  out.iterations = iterations;
  out.converged = false;
  return out;
}

}  // namespace

Eigenpair top_eigenpair(const Eigen::MatrixXd& sym, const PowerIterationOptions& options) {
  const auto p = sym.rows();
  Eigenpair out;
  if (p == 1) {
    out.value = std::max(0.0, sym(0, 0));
    out.vector = Eigen::VectorXd::Ones(1);
    return out;
  }

  Rng rng(options.seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(p);
  for (Eigen::Index i = 0; i < p; ++i) v(i) = gauss(rng);
  v.normalize();

  Eigen::VectorXd w(p);
  for (int it = 1; it <= options.max_iterations; ++it) {
    w.noalias() = sym * v;
    const double lambda = v.dot(w);
    const double wnorm = w.norm();
    if (wnorm == 0.0) {
      // v sits in the null space; with a random start this only happens for
      // the zero matrix.
      out.value = 0.0;
      out.vector = v;
      out.iterations = it;
      return out;
    }
    const double residual = (w - lambda * v).norm();
    if (residual <= options.relative_tolerance * std::abs(lambda)) {
      out.value = std::max(0.0, lambda);
      out.vector = v;
      out.iterations = it;
      return out;
    }
    v = w / wnorm;
  }
  return dense_top_eigenpair(sym, options.max_iterations);
}

Eigen::VectorXd mean_of_rows(const Eigen::MatrixXd& data, std::span<const int> rows) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.cols());
  for (int r : rows) sum += data.row(r).transpose();
  return sum / static_cast<double>(rows.size());
}

Eigen::MatrixXd covariance_of_rows(const Eigen::MatrixXd& data, std::span<const int> rows,
                                   const Eigen::VectorXd& center) {
  const auto p = data.cols();
  Eigen::MatrixXd centered(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    centered.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]) - center.transpose();
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  return cov / static_cast<double>(rows.size());
}

}  // namespace robustmean
