#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace robustmean {

/// n x p table of finite observations, one observation per row.
class SampleSet {
 public:
  explicit SampleSet(Eigen::MatrixXd data);

  /// A p = 1 sample set from a list of scalars.
  static SampleSet from_values(const std::vector<double>& values);

  int n() const { return static_cast<int>(data_.rows()); }
  int p() const { return static_cast<int>(data_.cols()); }
  const Eigen::MatrixXd& data() const { return data_; }
  auto row(int i) const { return data_.row(i); }

 private:
  Eigen::MatrixXd data_;
};

enum class Family { gaussian, lognormal, pareto };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

struct PointMass {
  Eigen::VectorXd location;
};

/// shift + scale * N(0, I)
struct ShiftedGaussian {
  Eigen::VectorXd shift;
  double scale = 1.0;
};

using ContaminationSpec = std::variant<PointMass, ShiftedGaussian>;

struct Contamination {
  double epsilon = 0.0;
  ContaminationSpec q_spec;
};

/// Sampling law: a clean family P, optionally mixed as (1 - eps) P + eps Q.
///
/// Heavy-tailed families are isotropic with i.i.d. coordinates, centred so
/// the clean mean is zero. `covariance` is only read for the gaussian family
/// and `tail_beta` only for pareto.
struct DistributionSpec {
  Family family = Family::gaussian;
  int p = 1;
  Eigen::MatrixXd covariance;
  double tail_beta = 3.0;
  std::optional<Contamination> contamination;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

/// Summary of the clean component's second moments. `k` is the number of
/// bounded 2k-moments (1 or 2). The moment constant C_{2k} never enters any
/// computation and is therefore not stored.
struct MomentProfile {
  int k = 2;
  double trace_sigma = 0.0;
  double opnorm_sigma = 0.0;

  /// trace / opnorm; 1 for the zero matrix.
  double effective_rank() const;
};

SampleSet sample_dataset(const DistributionSpec& spec, int n, std::uint64_t seed);

/// Same draw as sample_dataset, also reporting which rows came from Q.
struct LabelledSample {
  SampleSet samples;
  std::vector<bool> contaminated;
};
LabelledSample sample_labelled(const DistributionSpec& spec, int n, std::uint64_t seed);

/// Mean of the clean component; zero for every supported family.
Eigen::VectorXd population_mean(const DistributionSpec& spec);

/// Analytic moments of the clean component. Rejects contaminated specs and
/// pareto with tail_beta <= 2.
MomentProfile population_moments(const DistributionSpec& spec);

/// Re-dimension a spec for a p-sweep. Vectors keep their leading
/// coordinates and are zero padded; a gaussian covariance must be a multiple
/// of the identity to be resized.
DistributionSpec with_dimension(const DistributionSpec& spec, int p);

void to_json(nlohmann::json& j, const DistributionSpec& spec);
void from_json(const nlohmann::json& j, DistributionSpec& spec);

}  // namespace robustmean
