#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <obcal/estimators.hpp>
#include <obcal/experiment.hpp>
#include <obcal/rng.hpp>
#include <obcal/types.hpp>

namespace obcal::testutil {

inline double normal_draw(RngStream& rng) {
  // Box-Muller; 1 - u keeps the log argument strictly positive.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

inline ObservedExperiment make_observed(std::vector<int> z, std::vector<double> y, Matrix X) {
  ObservedExperiment obs;
  obs.alloc = allocation_from(Eigen::Map<const IntVector>(z.data(), static_cast<Index>(z.size())));
  obs.y_obs = Eigen::Map<const Vector>(y.data(), static_cast<Index>(y.size()));
  obs.X = std::move(X);
  return obs;
}

/// Continuous outcomes, k standard-normal covariates, a mildly nonlinear
/// response, and a completely randomized treatment with about 40% treated.
inline ObservedExperiment make_continuous_dataset(RngStream& rng, int n, int k) {
  Matrix X(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) X(i, j) = normal_draw(rng);
  }
  const int n1 = std::max(2, static_cast<int>(0.4 * n));
  const TreatmentAllocation alloc = sample_allocation(n, n1, rng);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double signal = 1.0 + 0.5 * X(i, 0) + 0.25 * X(i, 0) * X(i, 0);
    if (k > 1) signal -= 0.7 * X(i, 1);
    if (k > 2) signal += 0.3 * X(i, 2);
    const double effect = alloc.z[i] == 1 ? 0.8 + 0.2 * X(i, 0) : 0.0;
    y[i] = signal + effect + 0.5 * normal_draw(rng);
  }
  ObservedExperiment obs;
  obs.alloc = alloc;
  obs.y_obs = std::move(y);
  obs.X = std::move(X);
  return obs;
}

/// Binary outcomes from a logistic response with a treatment shift.
inline ObservedExperiment make_binary_dataset(RngStream& rng, int n, int k) {
  Matrix X(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) X(i, j) = normal_draw(rng);
  }
  const int n1 = std::max(2, static_cast<int>(0.4 * n));
  const TreatmentAllocation alloc = sample_allocation(n, n1, rng);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double eta = -0.2 + 0.7 * X(i, 0);
    if (k > 1) eta -= 0.4 * X(i, 1);
    if (k > 2) eta += 0.2 * X(i, 2);
    if (alloc.z[i] == 1) eta += 0.6;
    const double p = 1.0 / (1.0 + std::exp(-eta));
    y[i] = rng.uniform01() < p ? 1.0 : 0.0;
  }
  ObservedExperiment obs;
  obs.alloc = alloc;
  obs.y_obs = std::move(y);
  obs.X = std::move(X);
  return obs;
}

/// Scalar covariate with continuous outcomes. With linear base learners the
/// two predictions are perfectly collinear, forcing the rank-deficient
/// calibration path.
inline ObservedExperiment make_scalar_dataset(RngStream& rng, int n) {
  return make_continuous_dataset(rng, n, 1);
}

/// Composite Simpson quadrature on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  const int m = intervals % 2 == 0 ? intervals : intervals + 1;
  const double h = (b - a) / m;
  double sum = f(a) + f(b);
  for (int i = 1; i < m; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Central finite difference of a scalar function along one coordinate.
inline double central_difference(const std::function<double(const Vector&)>& f,
                                 const Vector& point, Index coordinate, double step) {
  Vector lo = point;
  Vector hi = point;
  lo[coordinate] -= step;
  hi[coordinate] += step;
  return (f(hi) - f(lo)) / (2.0 * step);
}

}  // namespace obcal::testutil
