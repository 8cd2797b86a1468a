#pragma once

#include <optional>
#include <string_view>

#include "obcal/experiment.hpp"
#include "obcal/regression.hpp"
#include "obcal/types.hpp"

namespace obcal {

enum class BaseFamily { ols, logistic, poisson };

std::string_view to_string(BaseFamily family);
std::optional<BaseFamily> parse_family(std::string_view name);

struct ArmDiagnostics {
  bool converged = true;
  bool rank_deficient = false;
};

/// Per-unit predictions of both potential outcomes, each fitted on its own arm
/// and evaluated at every unit.
struct PredictionPair {
  Vector mu0;
  Vector mu1;
  BaseFamily base = BaseFamily::ols;
  ArmDiagnostics arm0;
  ArmDiagnostics arm1;
};

/// Output of the calibration step: per arm, a least squares regression of the
/// observed outcome on the prediction pair (plus intercept and any extra
/// features), evaluated at every unit.
struct CalibratedPair {
  Vector mu0_cal;
  Vector mu1_cal;
  LinearFit fit0;
  LinearFit fit1;
  double unbiasedness_gap = 0.0;  // max over arms of the relative fitted-vs-observed sum gap
};

/// Fits the outcome on covariates (with intercept) separately within each arm,
/// then evaluates both fits at all units.
PredictionPair fit_base_learners(const ObservedExperiment& obs, BaseFamily family);

/// Treated-minus-control difference in means.
double tau_unadj(const ObservedExperiment& obs);

/// Imputation estimator: observed outcome where available, prediction where
/// not, averaged as N^-1 * sum(yhat_i(1) - yhat_i(0)).
double tau_gob(const ObservedExperiment& obs, const PredictionPair& preds);

/// Per arm, regresses the observed outcome on (mu0, mu1) plus intercept and
/// optional extra features over that arm's rows; rank deficiency falls through
/// to the pseudoinverse so the calibrated predictions stay unique.
CalibratedPair calibrate(const ObservedExperiment& obs, const PredictionPair& preds,
                         const Matrix* extra_features = nullptr);

/// Like calibrate but each arm regression uses only its own-arm prediction.
CalibratedPair calibrate_single(const ObservedExperiment& obs, const PredictionPair& preds);

/// Calibrated estimator in its all-predicted form,
/// N^-1 * sum(mu1_cal - mu0_cal). With extra features this is the
/// feature-engineered variant.
double tau_cal(const ObservedExperiment& obs, const PredictionPair& preds,
               const Matrix* extra_features = nullptr);

/// Singly-calibrated estimator: own-arm prediction as the lone regressor.
double tau_gbcal(const ObservedExperiment& obs, const PredictionPair& preds);

/// Regression-adjusted estimator with arm-wise least squares on the raw
/// covariates.
double tau_lin(const ObservedExperiment& obs);

/// Calibrates a second time, treating the calibrated predictions as the new
/// prediction pair, and returns the sup-norm change across all units and both
/// arms. Calibration is idempotent, so this should be numerically zero.
double recalibrate_check(const ObservedExperiment& obs, const CalibratedPair& calibrated);

/// Max over arms of |sum fitted - sum observed| / (1 + |sum observed|),
/// sums taken within the arm.
double prediction_unbiasedness_gap(const ObservedExperiment& obs,
                                   const Vector& mu0, const Vector& mu1);

enum class Estimator { unadj, gob, gbcal, cal, cal2, lin };

std::string_view to_string(Estimator estimator);
std::optional<Estimator> parse_estimator(std::string_view name);

/// Dispatches one estimator. preds may be null for unadj and lin; cal2 uses
/// the raw covariates as the built-in extra features.
double evaluate_estimator(Estimator estimator, const ObservedExperiment& obs,
                          const PredictionPair* preds);

}  // namespace obcal
