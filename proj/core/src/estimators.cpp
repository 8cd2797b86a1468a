#include "obcal/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace obcal {

namespace {

void check_lengths(const ObservedExperiment& obs, const PredictionPair& preds) {
  if (preds.mu0.size() != obs.size() || preds.mu1.size() != obs.size()) {
    throw std::invalid_argument("prediction vectors must cover every unit");
  }
}

void check_arms(const ObservedExperiment& obs) {
  if (obs.alloc.n1 < 1 || obs.alloc.n0 < 1) {
    throw std::invalid_argument("both arms must be non-empty");
  }
}

std::vector<Index> arm_rows(const ObservedExperiment& obs, int arm) {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(arm == 1 ? obs.alloc.n1 : obs.alloc.n0));
  for (Index i = 0; i < obs.size(); ++i) {
    if (obs.alloc.z[i] == arm) rows.push_back(i);
  }
  return rows;
}

Matrix select_rows(const Matrix& X, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = X.row(rows[r]);
  return out;
}

Vector select_rows(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Index>(r)] = v[rows[r]];
  return out;
}

// Calibration with a caller-chosen feature matrix (evaluated at all units).
CalibratedPair calibrate_on(const ObservedExperiment& obs, const Matrix& features) {
  CalibratedPair out;
  for (int arm : {0, 1}) {
    const auto rows = arm_rows(obs, arm);
    const LinearFit fit = fit_ols(select_rows(features, rows), select_rows(obs.y_obs, rows), true);
    Vector predictions = predict_linear(fit, features);
    if (arm == 0) {
      out.fit0 = fit;
      out.mu0_cal = std::move(predictions);
    } else {
      out.fit1 = fit;
      out.mu1_cal = std::move(predictions);
    }
  }
  out.unbiasedness_gap = prediction_unbiasedness_gap(obs, out.mu0_cal, out.mu1_cal);
  return out;
}

}  // namespace

std::string_view to_string(BaseFamily family) {
  switch (family) {
    case BaseFamily::ols: return "ols";
    case BaseFamily::logistic: return "logistic";
    case BaseFamily::poisson: return "poisson";
  }
  return "?";
}

std::optional<BaseFamily> parse_family(std::string_view name) {
  if (name == "ols") return BaseFamily::ols;
  if (name == "logistic") return BaseFamily::logistic;
  if (name == "poisson") return BaseFamily::poisson;
  return std::nullopt;
}

PredictionPair fit_base_learners(const ObservedExperiment& obs, BaseFamily family) {
  check_arms(obs);
  PredictionPair preds;
  preds.base = family;
  for (int arm : {0, 1}) {
    const auto rows = arm_rows(obs, arm);
    const Matrix X_arm = select_rows(obs.X, rows);
    const Vector y_arm = select_rows(obs.y_obs, rows);
    Vector mu;
    ArmDiagnostics diag;
    if (family == BaseFamily::ols) {
      const LinearFit fit = fit_ols(X_arm, y_arm, true);
      mu = predict_linear(fit, obs.X);
      diag.rank_deficient = fit.rank_deficient;
    } else {
      const GlmFamily glm_family =
          family == BaseFamily::logistic ? GlmFamily::logistic : GlmFamily::poisson;
      const GlmFit fit = fit_glm(X_arm, y_arm, glm_family, true);
      mu = predict_glm(fit, obs.X);
      diag.converged = fit.converged;
      // Rank comes from an OLS probe of the same design.
      diag.rank_deficient = fit_ols(X_arm, y_arm, true).rank_deficient;
    }
    if (arm == 0) {
      preds.mu0 = std::move(mu);
      preds.arm0 = diag;
    } else {
      preds.mu1 = std::move(mu);
      preds.arm1 = diag;
    }
  }
  return preds;
}

double tau_unadj(const ObservedExperiment& obs) {
  check_arms(obs);
  double treated_sum = 0.0;
  double control_sum = 0.0;
  for (Index i = 0; i < obs.size(); ++i) {
    (obs.alloc.z[i] == 1 ? treated_sum : control_sum) += obs.y_obs[i];
  }
  return treated_sum / obs.alloc.n1 - control_sum / obs.alloc.n0;
}

double tau_gob(const ObservedExperiment& obs, const PredictionPair& preds) {
  check_arms(obs);
  check_lengths(obs, preds);
  double acc = 0.0;
  for (Index i = 0; i < obs.size(); ++i) {
    // yhat_i(1) - yhat_i(0): the observed outcome fills its own arm, the
    // prediction fills the counterfactual.
    acc += obs.alloc.z[i] == 1 ? obs.y_obs[i] - preds.mu0[i] : preds.mu1[i] - obs.y_obs[i];
  }
  return acc / static_cast<double>(obs.size());
}

CalibratedPair calibrate(const ObservedExperiment& obs, const PredictionPair& preds,
                         const Matrix* extra_features) {
  check_arms(obs);
  check_lengths(obs, preds);
  const Index n = obs.size();
  const Index extra = extra_features ? extra_features->cols() : 0;
  if (extra_features && extra_features->rows() != n) {
    throw std::invalid_argument("extra feature matrix must have one row per unit");
  }
  Matrix features(n, 2 + extra);
  features.col(0) = preds.mu0;
  features.col(1) = preds.mu1;
  if (extra > 0) features.rightCols(extra) = *extra_features;
  return calibrate_on(obs, features);
}

CalibratedPair calibrate_single(const ObservedExperiment& obs, const PredictionPair& preds) {
  check_arms(obs);
  check_lengths(obs, preds);
  CalibratedPair out;
  for (int arm : {0, 1}) {
    const Vector& own = arm == 0 ? preds.mu0 : preds.mu1;
    const auto rows = arm_rows(obs, arm);
    const LinearFit fit = fit_ols(select_rows(Matrix(own), rows), select_rows(obs.y_obs, rows), true);
    Vector predictions = predict_linear(fit, own);
    if (arm == 0) {
      out.fit0 = fit;
      out.mu0_cal = std::move(predictions);
    } else {
      out.fit1 = fit;
      out.mu1_cal = std::move(predictions);
    }
  }
  out.unbiasedness_gap = prediction_unbiasedness_gap(obs, out.mu0_cal, out.mu1_cal);
  return out;
}

double tau_cal(const ObservedExperiment& obs, const PredictionPair& preds,
               const Matrix* extra_features) {
  const CalibratedPair calibrated = calibrate(obs, preds, extra_features);
  return (calibrated.mu1_cal - calibrated.mu0_cal).mean();
}

double tau_gbcal(const ObservedExperiment& obs, const PredictionPair& preds) {
  const CalibratedPair calibrated = calibrate_single(obs, preds);
  return (calibrated.mu1_cal - calibrated.mu0_cal).mean();
}

double tau_lin(const ObservedExperiment& obs) {
  const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
  return (preds.mu1 - preds.mu0).mean();
}

double recalibrate_check(const ObservedExperiment& obs, const CalibratedPair& calibrated) {
  PredictionPair as_preds;
  as_preds.mu0 = calibrated.mu0_cal;
  as_preds.mu1 = calibrated.mu1_cal;
  const CalibratedPair again = calibrate(obs, as_preds);
  const double change0 = (again.mu0_cal - calibrated.mu0_cal).lpNorm<Eigen::Infinity>();
  const double change1 = (again.mu1_cal - calibrated.mu1_cal).lpNorm<Eigen::Infinity>();
  return std::max(change0, change1);
}

double prediction_unbiasedness_gap(const ObservedExperiment& obs,
                                   const Vector& mu0, const Vector& mu1) {
  double gap = 0.0;
  for (int arm : {0, 1}) {
    const Vector& mu = arm == 0 ? mu0 : mu1;
    double fitted_sum = 0.0;
    double observed_sum = 0.0;
    for (Index i = 0; i < obs.size(); ++i) {
      if (obs.alloc.z[i] == arm) {
        fitted_sum += mu[i];
        observed_sum += obs.y_obs[i];
      }
    }
    gap = std::max(gap, std::abs(fitted_sum - observed_sum) / (1.0 + std::abs(observed_sum)));
  }
  return gap;
}

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::unadj: return "unadj";
    case Estimator::gob: return "gob";
    case Estimator::gbcal: return "gbcal";
    case Estimator::cal: return "cal";
    case Estimator::cal2: return "cal2";
    case Estimator::lin: return "lin";
  }
  return "?";
}

std::optional<Estimator> parse_estimator(std::string_view name) {
  if (name == "unadj") return Estimator::unadj;
  if (name == "gob") return Estimator::gob;
  if (name == "gbcal") return Estimator::gbcal;
  if (name == "cal") return Estimator::cal;
  if (name == "cal2") return Estimator::cal2;
  if (name == "lin") return Estimator::lin;
  return std::nullopt;
}

double evaluate_estimator(Estimator estimator, const ObservedExperiment& obs,
                          const PredictionPair* preds) {
  const bool needs_preds = estimator == Estimator::gob || estimator == Estimator::gbcal ||
                           estimator == Estimator::cal || estimator == Estimator::cal2;
  if (needs_preds && preds == nullptr) {
    throw std::invalid_argument("estimator requires base-learner predictions");
  }
  switch (estimator) {
    case Estimator::unadj: return tau_unadj(obs);
    case Estimator::gob: return tau_gob(obs, *preds);
    case Estimator::gbcal: return tau_gbcal(obs, *preds);
    case Estimator::cal: return tau_cal(obs, *preds);
    case Estimator::cal2: return tau_cal(obs, *preds, &obs.X);
    case Estimator::lin: return tau_lin(obs);
  }
  throw std::invalid_argument("unknown estimator");
}

}  // namespace obcal
