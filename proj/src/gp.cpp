#include "metabo/gp.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace metabo {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

// Distance structure of a training set; independent of hyperparameters.
struct Geometry {
  std::vector<Eigen::MatrixXd> w;  // per-dimension distance contributions
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> same_mask;
};

Geometry make_geometry(const KernelSpec& spec, const GPData& data) {
  const Eigen::Index n = data.size(), dims = data.dims();
  Geometry g;
  g.w.assign(static_cast<std::size_t>(dims), Eigen::MatrixXd::Zero(n, n));
  g.same_mask.setConstant(n, n, true);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (spec.masking) g.same_mask(i, j) = g.same_mask(j, i) = (data.active.row(i) == data.active.row(j)).all();
      for (Eigen::Index d = 0; d < dims; ++d) {
        const double v = dim_distance(spec, data.x.row(i).transpose(), data.x.row(j).transpose(), d);
        g.w[static_cast<std::size_t>(d)](i, j) = g.w[static_cast<std::size_t>(d)](j, i) = v;
      }
    }
  }
  return g;
}

Eigen::MatrixXd scaled_r2(const Geometry& g, const GPHyperparams& theta) {
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(g.same_mask.rows(), g.same_mask.cols());
  for (std::size_t d = 0; d < g.w.size(); ++d) {
    const double l = detail::lengthscale(theta, static_cast<Eigen::Index>(d));
    r2 += g.w[d] / (l * l);
  }
  return r2;
}

// Radial derivative factor: d k / d log l_d = factor(r2) * w_d / l_d^2.
double radial_factor(KernelType base, double r2) {
  if (base == KernelType::rbf) return std::exp(-0.5 * r2);
  const double s5r = std::sqrt(5.0 * r2);
  return 5.0 / 3.0 * (1.0 + s5r) * std::exp(-s5r);
}

Eigen::MatrixXd correlation_from(const KernelSpec& spec, const Geometry& g, const Eigen::MatrixXd& r2) {
  const Eigen::Index n = r2.rows();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) c(i, j) = g.same_mask(i, j) ? detail::correlation(spec.base, r2(i, j)) : 0.0;
  return c;
}

struct Factorized {
  Eigen::LLT<Eigen::MatrixXd> chol;
  double jitter;
};

std::optional<Factorized> factorize(const Eigen::MatrixXd& c, double amplitude, double noise) {
  const Eigen::Index n = c.rows();
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd k = amplitude * c;
    k.diagonal().array() += amplitude * jitter + noise;
    Eigen::LLT<Eigen::MatrixXd> chol(k);
    if (chol.info() == Eigen::Success && (chol.matrixLLT().diagonal().array() > 0.0).all() && n > 0)
      return Factorized{std::move(chol), jitter};
  }
  return std::nullopt;
}

std::optional<LmlResult> lml(const GPHyperparams& theta, const KernelSpec& spec, const Geometry& g,
                             const Eigen::VectorXd& y, bool with_gradient) {
  const Eigen::Index n = y.size();
  const Eigen::MatrixXd r2 = scaled_r2(g, theta);
  const Eigen::MatrixXd c = correlation_from(spec, g, r2);
  auto f = factorize(c, theta.cov_amplitude, theta.noise_variance);
  if (!f) return std::nullopt;

  const Eigen::VectorXd alpha = f->chol.solve(y);
  LmlResult out;
  out.jitter = f->jitter;
  out.value = -0.5 * y.dot(alpha) - f->chol.matrixLLT().diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * kLog2Pi;
  if (!std::isfinite(out.value)) return std::nullopt;
  if (!with_gradient) return out;

  const auto n_ls = theta.lengthscales.size();
  out.gradient.setZero(n_ls + 2);
  Eigen::MatrixXd w = alpha * alpha.transpose() - f->chol.solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::MatrixXd factor(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) factor(i, j) = g.same_mask(i, j) ? radial_factor(spec.base, r2(i, j)) : 0.0;
  const Eigen::MatrixXd weighted = w.cwiseProduct(factor);

  if (n_ls == 1) {
    out.gradient[0] = 0.5 * theta.cov_amplitude * weighted.cwiseProduct(r2).sum();
  } else {
    for (Eigen::Index d = 0; d < n_ls; ++d) {
      const double l = theta.lengthscales[d];
      out.gradient[d] =
          0.5 * theta.cov_amplitude * weighted.cwiseProduct(g.w[static_cast<std::size_t>(d)]).sum() / (l * l);
    }
  }
  Eigen::MatrixXd dk_amp = theta.cov_amplitude * c;
  dk_amp.diagonal().array() += theta.cov_amplitude * f->jitter;
  out.gradient[n_ls] = 0.5 * w.cwiseProduct(dk_amp).sum();
  out.gradient[n_ls + 1] = 0.5 * theta.noise_variance * w.trace();
  return out;
}

GPSample make_sample(const KernelSpec& spec, const Geometry& g, const Eigen::VectorXd& centred,
                     const GPHyperparams& theta) {
  const Eigen::MatrixXd c = correlation_from(spec, g, scaled_r2(g, theta));
  auto f = factorize(c, theta.cov_amplitude, theta.noise_variance);
  if (!f) throw GPFitError("GP covariance is not factorizable");
  GPSample s;
  s.theta = theta;
  s.jitter = f->jitter;
  s.alpha = f->chol.solve(centred);
  s.chol = std::move(f->chol);
  return s;
}

// Free parameters in log space: [log l..., log amplitude, (log noise)].
struct Problem {
  const KernelSpec& spec;
  const Geometry& g;
  const Eigen::VectorXd& y;  // standardized
  const GPFitOptions& opt;
  Eigen::Index n_ls;
  Eigen::VectorXd lower, upper;
  bool with_priors;
  bool with_jacobian;

  Eigen::Index size() const { return n_ls + (opt.tune_noise ? 2 : 1); }

  GPHyperparams unpack(const Eigen::VectorXd& phi) const {
    GPHyperparams t;
    t.lengthscales = phi.head(n_ls).array().exp();
    t.cov_amplitude = std::exp(phi[n_ls]);
    t.noise_variance = opt.tune_noise ? std::exp(phi[n_ls + 1]) : 0.0;
    return t;
  }

  double log_prior(const HyperPrior& p, double v, double& dlog) const {
    dlog = prior_log_density_dlog(p, v);
    double value = prior_log_density(p, v);
    if (with_jacobian && p.family != PriorFamily::none) {
      value += std::log(v);
      dlog += 1.0;
    }
    return value;
  }

  std::optional<std::pair<double, Eigen::VectorXd>> operator()(const Eigen::VectorXd& phi, bool grad) const {
    const auto theta = unpack(phi);
    auto r = lml(theta, spec, g, y, grad);
    if (!r) return std::nullopt;
    double value = r->value;
    Eigen::VectorXd gradient;
    if (grad) {
      gradient = r->gradient.head(size());
      if (opt.tune_noise) gradient[n_ls + 1] = r->gradient[n_ls + 1];
    }
    if (with_priors) {
      double d = 0.0;
      for (Eigen::Index i = 0; i < n_ls; ++i) {
        value += log_prior(opt.priors.lengthscale, theta.lengthscales[i], d);
        if (grad) gradient[i] += d;
      }
      value += log_prior(opt.priors.amplitude, theta.cov_amplitude, d);
      if (grad) gradient[n_ls] += d;
      if (opt.tune_noise) {
        value += log_prior(opt.priors.noise, theta.noise_variance, d);
        if (grad) gradient[n_ls + 1] += d;
      }
    }
    if (!std::isfinite(value)) return std::nullopt;
    return std::make_pair(value, std::move(gradient));
  }
};

Eigen::VectorXd project(const Problem& p, Eigen::VectorXd phi) { return phi.cwiseMax(p.lower).cwiseMin(p.upper); }

// Projected L-BFGS ascent with backtracking (Armijo) line search.
std::pair<Eigen::VectorXd, double> maximize(const Problem& p, Eigen::VectorXd phi, int max_iterations) {
  constexpr int kMemory = 8;
  phi = project(p, std::move(phi));
  auto cur = p(phi, true);
  if (!cur) return {phi, -std::numeric_limits<double>::infinity()};
  double value = cur->first;
  Eigen::VectorXd grad = cur->second;
  std::vector<Eigen::VectorXd> s_hist, y_hist;

  for (int iter = 0; iter < max_iterations; ++iter) {
    // Ascent direction from the two-loop recursion on the negated objective.
    Eigen::VectorXd q = grad;
    std::vector<double> a(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      a[k] = s_hist[k].dot(q) / y_hist[k].dot(s_hist[k]);
      q -= a[k] * y_hist[k];
    }
    if (!s_hist.empty()) q *= y_hist.back().dot(s_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double b = y_hist[k].dot(q) / y_hist[k].dot(s_hist[k]);
      q += (a[k] - b) * s_hist[k];
    }
    Eigen::VectorXd dir = q;
    // Freeze coordinates pinned at a bound and pushing outward.
    for (Eigen::Index i = 0; i < dir.size(); ++i)
      if ((phi[i] <= p.lower[i] && grad[i] < 0.0) || (phi[i] >= p.upper[i] && grad[i] > 0.0)) dir[i] = 0.0;
    if (grad.dot(dir) <= 0.0) {
      s_hist.clear();
      y_hist.clear();
      dir = grad;
      for (Eigen::Index i = 0; i < dir.size(); ++i)
        if ((phi[i] <= p.lower[i] && grad[i] < 0.0) || (phi[i] >= p.upper[i] && grad[i] > 0.0)) dir[i] = 0.0;
      if (s_hist.empty() && dir.norm() > 1.0) dir /= dir.norm();
    }
    if (dir.norm() < 1e-10) break;

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd next;
    std::optional<std::pair<double, Eigen::VectorXd>> trial;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      next = project(p, phi + step * dir);
      trial = p(next, true);
      if (trial && trial->first >= value + 1e-4 * grad.dot(next - phi)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const Eigen::VectorXd s = next - phi;
    const Eigen::VectorXd yk = grad - trial->second;  // curvature pair of -f
    const double improvement = trial->first - value;
    phi = next;
    value = trial->first;
    grad = trial->second;
    if (yk.dot(s) > 1e-12) {
      s_hist.push_back(s);
      y_hist.push_back(yk);
      if (s_hist.size() > kMemory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
      }
    }
    if (improvement < 1e-9 * (1.0 + std::abs(value)) && s.norm() < 1e-8) break;
    if (improvement < 1e-10 * (1.0 + std::abs(value))) break;
  }
  return {phi, value};
}

// Coordinate-wise slice sampling (stepping out, shrinkage) inside the box.
Eigen::VectorXd slice_sweep(const Problem& p, Eigen::VectorXd phi, double& value, Rng& rng) {
  constexpr double kWidth = 1.0;
  constexpr int kMaxSteps = 10;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto target = [&](const Eigen::VectorXd& v) {
    auto r = p(v, false);
    return r ? r->first : -std::numeric_limits<double>::infinity();
  };
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const double level = value + std::log(unif(rng));
    const double x0 = phi[i];
    double left = x0 - kWidth * unif(rng);
    double right = left + kWidth;
    Eigen::VectorXd probe = phi;
    int j = static_cast<int>(std::floor(kMaxSteps * unif(rng)));
    int k = kMaxSteps - 1 - j;
    for (; j > 0 && left > p.lower[i]; --j) {
      probe[i] = left;
      if (target(probe) <= level) break;
      left -= kWidth;
    }
    for (; k > 0 && right < p.upper[i]; --k) {
      probe[i] = right;
      if (target(probe) <= level) break;
      right += kWidth;
    }
    left = std::max(left, p.lower[i]);
    right = std::min(right, p.upper[i]);
    for (int tries = 0; tries < 100; ++tries) {
      probe[i] = left + (right - left) * unif(rng);
      const double v = target(probe);
      if (v > level) {
        phi = probe;
        value = v;
        break;
      }
      if (probe[i] < x0) left = probe[i];
      else right = probe[i];
    }
  }
  return phi;
}

Eigen::VectorXd random_start(const Problem& p, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd phi(p.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = p.lower[i] + (p.upper[i] - p.lower[i]) * unif(rng);
  // Amplitude restarts stay within two decades of the standardized variance.
  phi[p.n_ls] = std::clamp(std::log(100.0) * (2.0 * unif(rng) - 1.0), p.lower[p.n_ls], p.upper[p.n_ls]);
  return phi;
}

Eigen::VectorXd default_start(const Problem& p) {
  Eigen::VectorXd phi(p.size());
  phi.head(p.n_ls).setConstant(std::log(0.5));
  phi[p.n_ls] = 0.0;
  if (p.opt.tune_noise) phi[p.n_ls + 1] = std::log(1e-3);
  return project(p, phi);
}

}  // namespace

GPData make_gp_data(const std::vector<EncodedConfig>& inputs, const std::vector<double>& ys) {
  if (inputs.size() != ys.size()) throw std::invalid_argument("make_gp_data: size mismatch");
  GPData data;
  const auto n = static_cast<Eigen::Index>(inputs.size());
  const Eigen::Index dims = inputs.empty() ? 0 : inputs.front().x.size();
  data.x.resize(n, dims);
  data.active.resize(n, dims);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = inputs[static_cast<std::size_t>(i)];
    if (e.x.size() != dims) throw std::invalid_argument("make_gp_data: dimension mismatch");
    data.x.row(i) = e.x.transpose();
    data.active.row(i) = e.active.transpose();
    data.y[i] = ys[static_cast<std::size_t>(i)];
  }
  return data;
}

Eigen::MatrixXd correlation_matrix(const KernelSpec& spec, const GPHyperparams& theta, const GPData& data) {
  const auto g = make_geometry(spec, data);
  return correlation_from(spec, g, scaled_r2(g, theta));
}

std::optional<LmlResult> log_marginal_likelihood(const GPHyperparams& theta, const KernelSpec& spec,
                                                 const GPData& data, bool with_gradient) {
  if (data.size() < 1) throw std::invalid_argument("log_marginal_likelihood: no observations");
  const auto g = make_geometry(spec, data);
  const Eigen::VectorXd centred = data.y.array() - data.y.mean();
  return lml(theta, spec, g, centred, with_gradient);
}

double prior_log_density(const HyperPrior& prior, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("prior_log_density: non-positive input");
  switch (prior.family) {
    case PriorFamily::none:
      return 0.0;
    case PriorFamily::lognormal: {
      const double l = std::log(theta);
      return -l - std::log(prior.sigma) - 0.5 * kLog2Pi - l * l / (2.0 * prior.sigma * prior.sigma);
    }
    case PriorFamily::gamma:
      return (prior.a - 1.0) * std::log(theta) - theta / prior.scale - prior.a * std::log(prior.scale) -
             std::lgamma(prior.a);
    case PriorFamily::horseshoe: {
      const double u = 3.0 * (prior.scale / theta) * (prior.scale / theta);
      return std::log(std::log1p(u));
    }
  }
  return 0.0;
}

double prior_log_density_dlog(const HyperPrior& prior, double theta) {
  switch (prior.family) {
    case PriorFamily::none:
      return 0.0;
    case PriorFamily::lognormal:
      return -1.0 - std::log(theta) / (prior.sigma * prior.sigma);
    case PriorFamily::gamma:
      return (prior.a - 1.0) - theta / prior.scale;
    case PriorFamily::horseshoe: {
      const double u = 3.0 * (prior.scale / theta) * (prior.scale / theta);
      return -2.0 * u / ((1.0 + u) * std::log1p(u));
    }
  }
  return 0.0;
}

FittedGP::FittedGP(KernelSpec spec, GPData data, double y_mean, std::vector<GPSample> samples)
    : spec_(std::move(spec)), data_(std::move(data)), y_mean_(y_mean), samples_(std::move(samples)) {}

std::vector<Prediction> FittedGP::predict(const EncodedConfig& x) const {
  const Eigen::Index n = data_.size();
  std::vector<Prediction> out;
  out.reserve(samples_.size());
  Eigen::VectorXd k(n);
  for (const auto& s : samples_) {
    for (Eigen::Index i = 0; i < n; ++i)
      k[i] = kernel_eval(spec_, s.theta, x.x, x.active, data_.x.row(i).transpose(), data_.active.row(i).transpose());
    Prediction p;
    p.mean = y_mean_ + k.dot(s.alpha);
    const Eigen::VectorXd v = s.chol.matrixL().solve(k);
    p.variance = std::max(0.0, s.theta.cov_amplitude - v.squaredNorm());
    out.push_back(p);
  }
  return out;
}

nlohmann::json FittedGP::hyperparams_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& s : samples_) {
    arr.push_back({{"lengthscales", std::vector<double>(s.theta.lengthscales.data(),
                                                        s.theta.lengthscales.data() + s.theta.lengthscales.size())},
                   {"cov_amplitude", s.theta.cov_amplitude},
                   {"noise_variance", s.theta.noise_variance},
                   {"jitter", s.jitter}});
  }
  return arr;
}

FittedGP condition(const KernelSpec& spec, const GPData& data, const GPHyperparams& theta) {
  const auto g = make_geometry(spec, data);
  const double mean = data.y.mean();
  const Eigen::VectorXd centred = data.y.array() - mean;
  std::vector<GPSample> samples;
  samples.push_back(make_sample(spec, g, centred, theta));
  return FittedGP(spec, data, mean, std::move(samples));
}

FittedGP fit(const GPData& data, const GPFitOptions& options, Rng& rng) {
  if (data.size() < 2) throw GPFitError("GP fit needs at least two observations");
  if (!(options.ls_lower > 0.0) || options.ls_lower > options.ls_upper)
    throw GPFitError("invalid lengthscale bounds");

  const double mean = data.y.mean();
  const Eigen::VectorXd centred = data.y.array() - mean;
  const double sd = std::sqrt(centred.squaredNorm() / static_cast<double>(data.size()));
  const double scale = sd > 1e-12 ? sd : 1.0;
  const Eigen::VectorXd standardized = centred / scale;

  const auto g = make_geometry(options.kernel, data);
  const Eigen::Index n_ls = options.kernel.ard ? data.dims() : 1;
  Problem p{options.kernel, g, standardized, options, n_ls, {}, {}, options.mode != FitMode::ml,
            options.mode == FitMode::mcmc};
  p.lower.resize(p.size());
  p.upper.resize(p.size());
  p.lower.head(n_ls).setConstant(std::log(options.ls_lower));
  p.upper.head(n_ls).setConstant(std::log(options.ls_upper));
  p.lower[n_ls] = std::log(options.amplitude_lower);
  p.upper[n_ls] = std::log(options.amplitude_upper);
  if (options.tune_noise) {
    p.lower[n_ls + 1] = std::log(options.noise_lower);
    p.upper[n_ls + 1] = std::log(options.noise_upper);
  }

  const int restarts = options.mode == FitMode::mcmc ? 1 : std::max(1, options.restarts);
  Eigen::VectorXd best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    const Eigen::VectorXd start = r == 0 ? default_start(p) : random_start(p, rng);
    auto [phi, value] = maximize(p, start, options.max_iterations);
    if (value > best_value) {
      best_value = value;
      best = phi;
    }
  }
  if (!std::isfinite(best_value)) throw GPFitError("GP hyperparameter optimization failed at every restart");

  std::vector<Eigen::VectorXd> chosen;
  if (options.mode == FitMode::mcmc) {
    Eigen::VectorXd phi = best;
    double value = best_value;
    for (int i = 0; i < options.mcmc_burn_in; ++i) phi = slice_sweep(p, phi, value, rng);
    for (int s = 0; s < options.mcmc_samples; ++s) {
      for (int t = 0; t < std::max(1, options.mcmc_thin); ++t) phi = slice_sweep(p, phi, value, rng);
      chosen.push_back(phi);
    }
  } else {
    chosen.push_back(best);
  }

  std::vector<GPSample> samples;
  for (const auto& phi : chosen) {
    auto theta = p.unpack(phi);
    theta.cov_amplitude *= scale * scale;
    theta.noise_variance *= scale * scale;
    samples.push_back(make_sample(options.kernel, g, centred, theta));
  }
  return FittedGP(options.kernel, data, mean, std::move(samples));
}

}  // namespace metabo
