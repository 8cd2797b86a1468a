#pragma once

#include <string>

#include "obcal/estimators.hpp"
#include "obcal/experiment.hpp"
#include "obcal/types.hpp"

namespace obcal {

struct ReportDiagnostics {
  double prediction_unbiasedness_gap = 0.0;
  bool base_converged = true;
  bool rank_deficient = false;
};

struct EstimateReport {
  std::string estimator_name;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double level = 0.95;
  Index n_units = 0;
  Index n_treated = 0;
  Index n_control = 0;
  ReportDiagnostics diagnostics;
};

/// Conservative plug-in variance s1^2/n1 + s0^2/n0, where s_z^2 is the sample
/// variance (denominator n_z - 1) of the within-arm residuals y_obs - mu_z.
/// The unidentifiable effect-heterogeneity term is dropped, which biases the
/// estimate upward. Requires at least two units per arm.
double variance_estimate(const ObservedExperiment& obs,
                         const Vector& mu0, const Vector& mu1);

double variance_estimate(const ObservedExperiment& obs, const CalibratedPair& calibrated);

/// Standard normal quantile (inverse CDF), p in (0, 1).
double normal_quantile(double p);

/// Symmetric normal-quantile confidence interval around the estimate.
/// Requires variance >= 0 and level in (0, 1).
EstimateReport make_report(std::string estimator_name, double estimate, double variance,
                           double level, const ObservedExperiment& obs,
                           ReportDiagnostics diagnostics);

}  // namespace obcal
