#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "robustmean/model.hpp"
#include "robustmean/rng.hpp"

namespace robustmean {

/// Finite set of unit directions such that every unit vector (every
/// support_size-sparse unit vector, when set) lies within covering_radius of
/// one of them.
struct CoverSet {
  std::vector<Eigen::VectorXd> directions;
  double covering_radius = 0.5;
  std::optional<int> support_size;  // 2s for sparse covers

  int dimension() const { return directions.empty() ? 0 : static_cast<int>(directions.front().size()); }
  std::size_t size() const { return directions.size(); }
};

struct CoverOptions {
  double covering_radius = 0.5;
  int consecutive_probes = 100000;  // stop once this many probes in a row are covered
};

/// Largest dimension for which a dense cover is built.
inline constexpr int kMaxDenseCoverDimension = 12;

/// Greedy random cover. Starts from the anchors +-e_1..+-e_p, then keeps any
/// random probe farther than the radius from every current member. Sparse
/// probes draw a uniform 2s-support first.
CoverSet build_half_cover(int p, std::optional<int> sparsity, std::uint64_t seed,
                          const CoverOptions& options = {});

/// A uniformly random unit vector, restricted to a random support of the
/// given size when `support_size` is set.
Eigen::VectorXd random_unit_vector(int p, std::optional<int> support_size, Rng& rng);

/// Worst distance from `probes` random unit vectors to their nearest cover
/// member. Probes respect the cover's support_size.
double cover_probe_gap(const CoverSet& cover, int probes, std::uint64_t seed);

/// Throws ArgumentError unless every direction is a unit vector (1e-12) and
/// respects the support limit.
void check_cover(const CoverSet& cover);

void save_cover_csv(const CoverSet& cover, const std::string& path);
CoverSet load_cover_csv(const std::string& path, std::optional<int> support_size = std::nullopt);

struct MinimaxResult {
  Eigen::VectorXd theta;
  double objective = 0.0;    // max_j |u_j^T theta - m_j|
  double lower_bound = 0.0;  // dual certificate value
  bool heuristic = false;    // sparse path fell back to hard thresholding
  std::vector<int> support;  // chosen support for the sparse path
};

/// Chebyshev-centre fit: minimise max_j |u_j^T theta - targets_j|, realised
/// as the linear program min t s.t. -t <= u_j^T theta - m_j <= t and solved
/// exactly by a dense simplex on its dual. With `sparsity` the minimisation
/// is restricted to s-sparse theta: exhaustively over supports when
/// C(p, s) <= 10^4, else by re-solving on the top-s support of the
/// unconstrained fit. `search` can force either sparse path.
enum class SupportSearch { automatic, exhaustive, hard_threshold };

MinimaxResult minimax_center(const CoverSet& cover, const std::vector<double>& targets,
                             std::optional<int> sparsity = std::nullopt, double tol = 1e-8,
                             SupportSearch search = SupportSearch::automatic);

enum class InnerEstimator { interval1d, filter1d };

std::string to_string(InnerEstimator inner);
InnerEstimator inner_from_string(const std::string& name);

struct NetConfig {
  double epsilon = 0.0;
  double delta = 0.05;
  InnerEstimator inner = InnerEstimator::interval1d;
  std::optional<int> sparsity;
  /// Known bound on u^T Sigma u. When set the 1D filter runs in threshold
  /// mode; otherwise it removes ceil(2 ln(1/delta')) points.
  std::optional<double> cov_bound;
  double C = 1.0;
  double relative_tol = 1e-8;

  void validate(int p) const;
  /// ln(1/delta') for the per-direction estimates.
  double direction_log_confidence(int p) const;
};

struct NetReport {
  Eigen::VectorXd estimate;
  std::vector<double> direction_estimates;
  std::size_t cover_size = 0;
  double objective = 0.0;
  bool heuristic_support = false;
};

/// Robust 1D estimates along every cover direction, aggregated with
/// minimax_center. `cover` may be supplied (e.g. loaded from CSV); otherwise
/// one is built from `seed`.
NetReport net_estimate(const SampleSet& samples, const NetConfig& config, std::uint64_t seed,
                       const CoverSet* cover = nullptr);

}  // namespace robustmean
