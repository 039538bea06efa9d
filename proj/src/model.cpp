#include "robustmean/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "robustmean/errors.hpp"
#include "robustmean/rng.hpp"

namespace robustmean {

SampleSet::SampleSet(Eigen::MatrixXd data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw ArgumentError("sample set needs n >= 1 and p >= 1");
  }
  if (!data_.allFinite()) throw ArgumentError("sample set contains non-finite entries");
}

SampleSet SampleSet::from_values(const std::vector<double>& values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return SampleSet(std::move(m));
}

std::string to_string(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::lognormal: return "lognormal";
    case Family::pareto: return "pareto";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "lognormal") return Family::lognormal;
  if (name == "pareto") return Family::pareto;
  throw ConfigError("unknown distribution family '" + name + "'");
}

double MomentProfile::effective_rank() const {
  if (opnorm_sigma <= 0.0) return 1.0;
  return trace_sigma / opnorm_sigma;
}

void DistributionSpec::validate() const {
  if (p < 1) throw ConfigError("dimension p must be >= 1");
  if (family == Family::gaussian) {
    if (covariance.rows() != p || covariance.cols() != p) {
      throw ConfigError("gaussian covariance must be p x p");
    }
    if (!covariance.allFinite()) throw ConfigError("gaussian covariance has non-finite entries");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
      throw ConfigError("gaussian covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      throw ConfigError("gaussian covariance is not positive semidefinite");
    }
  }
  if (family == Family::pareto && !(tail_beta > 1.0)) {
    throw ConfigError("pareto tail_beta must exceed 1 for the mean to exist");
  }
  if (contamination) {
    const double eps = contamination->epsilon;
    if (!(eps >= 0.0 && eps < 0.5)) throw ConfigError("contamination epsilon must lie in [0, 0.5)");
    std::visit(
        [this](const auto& q) {
          using Q = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<Q, PointMass>) {
            if (q.location.size() != p) throw ConfigError("point_mass location must have dimension p");
            if (!q.location.allFinite()) throw ConfigError("point_mass location is not finite");
          } else {
            if (q.shift.size() != p) throw ConfigError("shifted_gaussian shift must have dimension p");
            if (!q.shift.allFinite()) throw ConfigError("shifted_gaussian shift is not finite");
            if (!(q.scale >= 0.0) || !std::isfinite(q.scale)) {
              throw ConfigError("shifted_gaussian scale must be finite and >= 0");
            }
          }
        },
        contamination->q_spec);
  }
}

namespace {

// Square-root factor of a PSD matrix, tolerant of singular covariances.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

class CleanSampler {
 public:
  explicit CleanSampler(const DistributionSpec& spec) : spec_(spec) {
    if (spec.family == Family::gaussian) factor_ = psd_factor(spec.covariance);
  }

  void draw(Rng& rng, Eigen::RowVectorXd& out) {
    out.resize(spec_.p);
    const int p = spec_.p;
    switch (spec_.family) {
      case Family::gaussian: {
        Eigen::VectorXd z(p);
        for (int i = 0; i < p; ++i) z(i) = gauss_(rng);
        out = (factor_ * z).transpose();
        break;
      }
      case Family::lognormal: {
        const double centre = std::exp(0.5);
        for (int i = 0; i < p; ++i) out(i) = std::exp(gauss_(rng)) - centre;
        break;
      }
      case Family::pareto: {
        const double beta = spec_.tail_beta;
        const double centre = beta / (beta - 1.0);
        for (int i = 0; i < p; ++i) {
          // 1 - U lies in (0, 1], so the power is finite.
          const double u = 1.0 - uniform_(rng);
          out(i) = std::pow(u, -1.0 / beta) - centre;
        }
        break;
      }
    }
  }

 private:
  const DistributionSpec& spec_;
  Eigen::MatrixXd factor_;
  std::normal_distribution<double> gauss_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace

LabelledSample sample_labelled(const DistributionSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample count n must be >= 1");
  spec.validate();

  Rng rng(seed);
  CleanSampler clean(spec);
  std::uniform_real_distribution<double> coin;
  std::normal_distribution<double> gauss;

  Eigen::MatrixXd data(n, spec.p);
  Eigen::RowVectorXd draw(spec.p);
  std::vector<bool> contaminated(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    if (spec.contamination && coin(rng) < spec.contamination->epsilon) {
      contaminated[static_cast<std::size_t>(i)] = true;
      std::visit(
          [&](const auto& q) {
            using Q = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<Q, PointMass>) {
              data.row(i) = q.location.transpose();
            } else {
              for (int j = 0; j < spec.p; ++j) data(i, j) = q.shift(j) + q.scale * gauss(rng);
            }
          },
          spec.contamination->q_spec);
    } else {
      clean.draw(rng, draw);
      data.row(i) = draw;
    }
  }
  return {SampleSet(std::move(data)), std::move(contaminated)};
}

SampleSet sample_dataset(const DistributionSpec& spec, int n, std::uint64_t seed) {
  return sample_labelled(spec, n, seed).samples;
}

Eigen::VectorXd population_mean(const DistributionSpec& spec) {
  return Eigen::VectorXd::Zero(spec.p);
}

MomentProfile population_moments(const DistributionSpec& spec) {
  if (spec.contamination) {
    throw ConfigError("moments describe the clean component; drop the contamination first");
  }
  spec.validate();
  MomentProfile m;
  const double p = spec.p;
  switch (spec.family) {
    case Family::gaussian: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.covariance, Eigen::EigenvaluesOnly);
      m.k = 2;
      m.trace_sigma = spec.covariance.trace();
      m.opnorm_sigma = std::max(0.0, eig.eigenvalues().maxCoeff());
      break;
    }
    case Family::lognormal: {
      const double e = std::numbers::e;
      m.k = 2;
      m.opnorm_sigma = e * e - e;
      m.trace_sigma = p * m.opnorm_sigma;
      break;
    }
    case Family::pareto: {
      const double b = spec.tail_beta;
      if (b <= 2.0) throw ConfigError("pareto with tail_beta <= 2 has infinite variance");
      m.k = b > 4.0 ? 2 : 1;
      m.opnorm_sigma = b / ((b - 1.0) * (b - 1.0) * (b - 2.0));
      m.trace_sigma = p * m.opnorm_sigma;
      break;
    }
  }
  return m;
}

namespace {

Eigen::VectorXd resize_vector(const Eigen::VectorXd& v, int p) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  const auto keep = std::min<Eigen::Index>(p, v.size());
  out.head(keep) = v.head(keep);
  return out;
}

}  // namespace

DistributionSpec with_dimension(const DistributionSpec& spec, int p) {
  if (p < 1) throw ConfigError("dimension p must be >= 1");
  if (spec.p == p) return spec;
  DistributionSpec out = spec;
  out.p = p;
  if (spec.family == Family::gaussian) {
    const double s = spec.covariance(0, 0);
    const Eigen::MatrixXd iso = s * Eigen::MatrixXd::Identity(spec.p, spec.p);
    if ((spec.covariance - iso).cwiseAbs().maxCoeff() > 1e-12) {
      throw ConfigError("only isotropic gaussian covariances can be resized across a p sweep");
    }
    out.covariance = s * Eigen::MatrixXd::Identity(p, p);
  }
  if (out.contamination) {
    std::visit(
        [p](auto& q) {
          using Q = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<Q, PointMass>) {
            q.location = resize_vector(q.location, p);
          } else {
            q.shift = resize_vector(q.shift, p);
          }
        },
        out.contamination->q_spec);
  }
  return out;
}

// ---- JSON ----

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const DistributionSpec& spec) {
  j = nlohmann::json{{"family", to_string(spec.family)}, {"p", spec.p}};
  if (spec.family == Family::gaussian) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < spec.covariance.rows(); ++r) {
      rows.push_back(vector_json(spec.covariance.row(r).transpose()));
    }
    j["covariance"] = rows;
  }
  if (spec.family == Family::pareto) j["tail_beta"] = spec.tail_beta;
  if (spec.contamination) {
    nlohmann::json q;
    std::visit(
        [&q](const auto& c) {
          using Q = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<Q, PointMass>) {
            q = {{"kind", "point_mass"}, {"location", vector_json(c.location)}};
          } else {
            q = {{"kind", "shifted_gaussian"}, {"shift", vector_json(c.shift)}, {"scale", c.scale}};
          }
        },
        spec.contamination->q_spec);
    j["contamination"] = {{"epsilon", spec.contamination->epsilon}, {"q_spec", q}};
  }
}

void from_json(const nlohmann::json& j, DistributionSpec& spec) {
  try {
    spec = DistributionSpec{};
    spec.family = family_from_string(j.at("family").get<std::string>());
    spec.p = j.at("p").get<int>();
    if (spec.family == Family::gaussian) {
      if (j.contains("covariance")) {
        const auto rows = j.at("covariance").get<std::vector<std::vector<double>>>();
        spec.covariance.resize(static_cast<Eigen::Index>(rows.size()),
                               rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows[0].size()) throw ConfigError("covariance rows differ in length");
          for (std::size_t c = 0; c < rows[r].size(); ++c) {
            spec.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
          }
        }
      } else {
        spec.covariance = Eigen::MatrixXd::Identity(spec.p, spec.p);
      }
    }
    if (j.contains("tail_beta")) spec.tail_beta = j.at("tail_beta").get<double>();
    if (j.contains("contamination") && !j.at("contamination").is_null()) {
      const auto& c = j.at("contamination");
      Contamination con;
      con.epsilon = c.at("epsilon").get<double>();
      const auto& q = c.at("q_spec");
      const auto kind = q.at("kind").get<std::string>();
      if (kind == "point_mass") {
        con.q_spec = PointMass{vector_from_json(q.at("location"))};
      } else if (kind == "shifted_gaussian") {
        con.q_spec = ShiftedGaussian{vector_from_json(q.at("shift")), q.value("scale", 1.0)};
      } else {
        throw ConfigError("unknown contamination kind '" + kind + "'");
      }
      spec.contamination = std::move(con);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed distribution spec: ") + e.what());
  }
  spec.validate();
}

}  // namespace robustmean
