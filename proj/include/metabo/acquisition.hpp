#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "metabo/prediction.hpp"

namespace metabo {

enum class AcquisitionKind { ei, pi, lcb };

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::ei;
  double par = 0.0;      // incumbent shift for ei/pi
  double lcb_par = 0.1;  // exploration weight for lcb
};

inline constexpr double kSigmaFloor = 1e-12;

template <typename T>
T normal_pdf(T u) {
  return std::exp(-u * u / T(2)) / std::sqrt(T(2) * std::numbers::pi_v<T>);
}

template <typename T>
T normal_cdf(T u) {
  return std::erfc(-u / std::numbers::sqrt2_v<T>) / T(2);
}

/// Expected improvement below f_star - par.
template <typename T>
T ei(T mu, T sigma, T f_star, T par) {
  const T gap = f_star - par - mu;
  if (sigma <= T(0)) return std::max(T(0), gap);
  const T s = std::max(sigma, T(kSigmaFloor));
  const T u = gap / s;
  return std::max(T(0), s * (u * normal_cdf(u) + normal_pdf(u)));
}

template <typename T>
T pi(T mu, T sigma, T f_star, T par) {
  const T gap = f_star - par - mu;
  if (sigma <= T(0)) return gap > T(0) ? T(1) : T(0);
  return normal_cdf(gap / std::max(sigma, T(kSigmaFloor)));
}

/// Negated lower confidence bound, so larger is better.
template <typename T>
T lcb(T mu, T sigma, T lcb_par) {
  return -(mu - lcb_par * sigma);
}

inline double acquisition_value(const AcquisitionSpec& spec, const Prediction& p, double f_star) {
  const double sigma = std::sqrt(std::max(0.0, p.variance));
  switch (spec.kind) {
    case AcquisitionKind::ei:
      return ei(p.mean, sigma, f_star, spec.par);
    case AcquisitionKind::pi:
      return pi(p.mean, sigma, f_star, spec.par);
    case AcquisitionKind::lcb:
      return lcb(p.mean, sigma, spec.lcb_par);
  }
  return 0.0;
}

/// Mean of the pointwise acquisition over hyperparameter samples.
inline double acquire(const AcquisitionSpec& spec, std::span<const Prediction> predictions, double f_star) {
  double sum = 0.0;
  for (const auto& p : predictions) sum += acquisition_value(spec, p, f_star);
  return predictions.empty() ? 0.0 : sum / static_cast<double>(predictions.size());
}

}  // namespace metabo
