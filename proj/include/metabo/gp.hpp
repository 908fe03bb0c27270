#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>
#include <json.hpp>

#include "metabo/configspace.hpp"
#include "metabo/prediction.hpp"

namespace metabo {

class GPFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelType { rbf, matern52 };

struct KernelSpec {
  KernelType base = KernelType::rbf;
  bool ard = false;
  std::vector<std::size_t> categorical_dims;  // Hamming distance on these
  bool masking = true;  // zero covariance between different active sets
};

/// `lengthscales` has one entry per input dimension when ard is set and a
/// single shared entry otherwise.
struct GPHyperparams {
  Eigen::VectorXd lengthscales;
  double cov_amplitude = 1.0;
  double noise_variance = 0.0;
};

inline constexpr double kJitterStart = 1e-8;
inline constexpr double kJitterMax = 1e-2;

/// Training inputs in the encoded unit cube; rows are observations.
struct GPData {
  Eigen::MatrixXd x;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active;
  Eigen::VectorXd y;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dims() const { return x.cols(); }
};

GPData make_gp_data(const std::vector<EncodedConfig>& inputs, const std::vector<double>& ys);

namespace detail {

inline bool is_categorical(const KernelSpec& spec, Eigen::Index d) {
  for (auto c : spec.categorical_dims)
    if (static_cast<Eigen::Index>(c) == d) return true;
  return false;
}

inline double lengthscale(const GPHyperparams& theta, Eigen::Index d) {
  return theta.lengthscales.size() == 1 ? theta.lengthscales[0] : theta.lengthscales[d];
}

template <typename Scalar>
Scalar correlation(KernelType base, Scalar r2) {
  using std::exp;
  using std::sqrt;
  if (base == KernelType::rbf) return exp(-r2 / Scalar(2));
  const Scalar s5r = sqrt(Scalar(5) * r2);
  return (Scalar(1) + s5r + Scalar(5) * r2 / Scalar(3)) * exp(-s5r);
}

}  // namespace detail

/// Per-dimension squared distance contribution: squared difference on numeric
/// dims, 0/1 mismatch indicator on categorical dims.
template <typename D1, typename D2>
typename D1::Scalar dim_distance(const KernelSpec& spec, const Eigen::MatrixBase<D1>& x1,
                                 const Eigen::MatrixBase<D2>& x2, Eigen::Index d) {
  using Scalar = typename D1::Scalar;
  if (detail::is_categorical(spec, d)) return x1[d] == x2[d] ? Scalar(0) : Scalar(1);
  const Scalar diff = x1[d] - x2[d];
  return diff * diff;
}

/// Correlation (without amplitude) between two encoded points.
template <typename D1, typename D2, typename M1, typename M2>
typename D1::Scalar correlation(const KernelSpec& spec, const GPHyperparams& theta, const Eigen::MatrixBase<D1>& x1,
                                const Eigen::DenseBase<M1>& m1, const Eigen::MatrixBase<D2>& x2,
                                const Eigen::DenseBase<M2>& m2) {
  using Scalar = typename D1::Scalar;
  if (x1.size() != x2.size() || m1.size() != x1.size() || m2.size() != x2.size())
    throw std::invalid_argument("kernel: dimension mismatch");
  if (spec.masking)
    for (Eigen::Index d = 0; d < m1.size(); ++d)
      if (m1.derived().coeff(d) != m2.derived().coeff(d)) return Scalar(0);
  Scalar r2(0);
  for (Eigen::Index d = 0; d < x1.size(); ++d) {
    const double l = detail::lengthscale(theta, d);
    r2 += dim_distance(spec, x1, x2, d) / Scalar(l * l);
  }
  return detail::correlation(spec.base, r2);
}

template <typename D1, typename D2, typename M1, typename M2>
typename D1::Scalar kernel_eval(const KernelSpec& spec, const GPHyperparams& theta, const Eigen::MatrixBase<D1>& x1,
                                const Eigen::DenseBase<M1>& m1, const Eigen::MatrixBase<D2>& x2,
                                const Eigen::DenseBase<M2>& m2) {
  return typename D1::Scalar(theta.cov_amplitude) * correlation(spec, theta, x1, m1, x2, m2);
}

/// Correlation matrix (unit amplitude) over the rows of `data`.
Eigen::MatrixXd correlation_matrix(const KernelSpec& spec, const GPHyperparams& theta, const GPData& data);

struct LmlResult {
  double value = 0.0;
  /// d value / d log-theta, ordered [log lengthscales..., log amplitude, log noise].
  Eigen::VectorXd gradient;
  double jitter = 0.0;  // relative jitter that made K factorizable
};

/// Log marginal likelihood of the mean-centred targets under
/// K = amplitude * (C + jitter I) + noise I. Jitter escalates from
/// kJitterStart by factors of 10; nullopt when kJitterMax still fails.
std::optional<LmlResult> log_marginal_likelihood(const GPHyperparams& theta, const KernelSpec& spec,
                                                 const GPData& data, bool with_gradient = true);

enum class PriorFamily { none, lognormal, gamma, horseshoe };

struct HyperPrior {
  PriorFamily family = PriorFamily::none;
  double sigma = 1.0;  // lognormal
  double a = 1.0;      // gamma shape
  double scale = 1.0;  // gamma scale, horseshoe scale

  static HyperPrior none() { return {}; }
  static HyperPrior lognormal(double sigma) { return {PriorFamily::lognormal, sigma, 1.0, 1.0}; }
  static HyperPrior gamma(double a, double scale) { return {PriorFamily::gamma, 1.0, a, scale}; }
  static HyperPrior horseshoe(double scale) { return {PriorFamily::horseshoe, 1.0, 1.0, scale}; }
};

/// Log density at theta > 0; `none` is 0 everywhere. Horseshoe is the
/// unnormalized log(log(1 + 3 (scale/theta)^2)).
double prior_log_density(const HyperPrior& prior, double theta);
/// d prior_log_density / d log theta.
double prior_log_density_dlog(const HyperPrior& prior, double theta);

struct GPPriors {
  HyperPrior amplitude;
  HyperPrior lengthscale;
  HyperPrior noise;
};

enum class FitMode { ml, map, mcmc };

struct GPFitOptions {
  FitMode mode = FitMode::ml;
  KernelSpec kernel;
  GPPriors priors;
  double ls_lower = 0.002;
  double ls_upper = 7.389;
  bool tune_noise = false;
  // Bounds on the standardized-target scale.
  double amplitude_lower = 1e-4;
  double amplitude_upper = 1e4;
  double noise_lower = 1e-10;
  double noise_upper = 1.0;
  int restarts = 10;
  int max_iterations = 100;
  int mcmc_samples = 10;
  int mcmc_burn_in = 100;
  int mcmc_thin = 10;
};

/// Posterior state for one hyperparameter setting. Amplitude and noise in
/// `theta` are on the original target scale.
struct GPSample {
  GPHyperparams theta;
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd alpha;
};

class FittedGP {
 public:
  FittedGP(KernelSpec spec, GPData data, double y_mean, std::vector<GPSample> samples);

  const KernelSpec& kernel() const { return spec_; }
  const GPData& data() const { return data_; }
  double prior_mean() const { return y_mean_; }
  const std::vector<GPSample>& samples() const { return samples_; }

  /// One prediction per hyperparameter sample (one for ML/MAP).
  std::vector<Prediction> predict(const EncodedConfig& x) const;

  nlohmann::json hyperparams_json() const;

 private:
  KernelSpec spec_;
  GPData data_;
  double y_mean_;
  std::vector<GPSample> samples_;
};

/// Conditions a GP on fixed hyperparameters (original target scale).
FittedGP condition(const KernelSpec& spec, const GPData& data, const GPHyperparams& theta);

/// Throws GPFitError when no hyperparameter setting admits a factorization.
FittedGP fit(const GPData& data, const GPFitOptions& options, Rng& rng);

}  // namespace metabo
