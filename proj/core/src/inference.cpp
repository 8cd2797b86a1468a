#include "obcal/inference.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <stdexcept>

namespace obcal {

double variance_estimate(const ObservedExperiment& obs, const Vector& mu0, const Vector& mu1) {
  if (mu0.size() != obs.size() || mu1.size() != obs.size()) {
    throw std::invalid_argument("prediction vectors must cover every unit");
  }
  if (obs.alloc.n1 < 2 || obs.alloc.n0 < 2) {
    throw std::invalid_argument("variance estimation needs at least two units per arm");
  }

  double variance = 0.0;
  for (int arm : {0, 1}) {
    const Vector& mu = arm == 0 ? mu0 : mu1;
    const int n_arm = arm == 0 ? obs.alloc.n0 : obs.alloc.n1;
    double sum = 0.0;
    for (Index i = 0; i < obs.size(); ++i) {
      if (obs.alloc.z[i] == arm) sum += obs.y_obs[i] - mu[i];
    }
    const double mean = sum / n_arm;
    double ss = 0.0;
    for (Index i = 0; i < obs.size(); ++i) {
      if (obs.alloc.z[i] == arm) {
        const double centered = obs.y_obs[i] - mu[i] - mean;
        ss += centered * centered;
      }
    }
    variance += ss / (n_arm - 1) / n_arm;
  }
  return variance;
}

double variance_estimate(const ObservedExperiment& obs, const CalibratedPair& calibrated) {
  return variance_estimate(obs, calibrated.mu0_cal, calibrated.mu1_cal);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile probability must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

EstimateReport make_report(std::string estimator_name, double estimate, double variance,
                           double level, const ObservedExperiment& obs,
                           ReportDiagnostics diagnostics) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie strictly in (0, 1)");
  }
  if (!(variance >= 0.0)) {
    throw std::invalid_argument("variance must be nonnegative");
  }

  EstimateReport report;
  report.estimator_name = std::move(estimator_name);
  report.estimate = estimate;
  report.std_error = std::sqrt(variance);
  const double quantile = normal_quantile(0.5 * (1.0 + level));
  report.ci_lower = estimate - quantile * report.std_error;
  report.ci_upper = estimate + quantile * report.std_error;
  report.level = level;
  report.n_units = obs.size();
  report.n_treated = obs.alloc.n1;
  report.n_control = obs.alloc.n0;
  report.diagnostics = diagnostics;
  return report;
}

}  // namespace obcal
