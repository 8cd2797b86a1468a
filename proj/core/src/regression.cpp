#include "obcal/regression.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace obcal {

namespace {

void check_design(const Matrix& X, const Vector& y) {
  if (X.rows() < 1) throw std::invalid_argument("design matrix must have at least one row");
  if (y.size() != X.rows()) {
    throw std::invalid_argument("outcome length " + std::to_string(y.size()) +
                                " does not match design rows " + std::to_string(X.rows()));
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("design matrix and outcome must be finite");
  }
}

Matrix with_intercept_column(const Matrix& X, bool add_intercept) {
  if (!add_intercept) return X;
  Matrix D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X.cols()) = X;
  return D;
}

double stable_sigmoid(double eta) {
  if (eta >= 0.0) {
    const double e = std::exp(-eta);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

Vector inverse_link(GlmFamily family, const Vector& eta) {
  Vector mu(eta.size());
  if (family == GlmFamily::logistic) {
    for (Index i = 0; i < eta.size(); ++i) mu[i] = stable_sigmoid(eta[i]);
  } else {
    mu = eta.array().exp();
  }
  return mu;
}

void check_outcome_range(GlmFamily family, const Vector& y) {
  if (family == GlmFamily::logistic) {
    for (Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw std::invalid_argument("logistic outcomes must be 0 or 1 (row " +
                                    std::to_string(i + 1) + ")");
      }
    }
  } else {
    for (Index i = 0; i < y.size(); ++i) {
      if (y[i] < 0.0) {
        throw std::invalid_argument("poisson outcomes must be nonnegative (row " +
                                    std::to_string(i + 1) + ")");
      }
    }
  }
}

}  // namespace

std::string_view to_string(GlmFamily family) {
  return family == GlmFamily::logistic ? "logistic" : "poisson";
}

LinearFit fit_ols(const Matrix& X, const Vector& y, bool add_intercept) {
  check_design(X, y);
  const Index k = X.cols();
  LinearFit fit;
  fit.slopes = Vector::Zero(k);
  if (k == 0 && !add_intercept) return fit;  // no parameters, predictions are zero

  const Matrix D = with_intercept_column(X, add_intercept);
  Eigen::BDCSVD<Matrix> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(static_cast<double>(std::max(D.rows(), D.cols())) *
                   std::numeric_limits<double>::epsilon());
  const Vector beta = svd.solve(y);

  fit.effective_rank = svd.rank();
  fit.rank_deficient = fit.effective_rank < D.cols();
  if (add_intercept) {
    fit.intercept = beta[0];
    fit.slopes = beta.tail(k);
  } else {
    fit.slopes = beta;
  }
  return fit;
}

Vector predict_linear(const LinearFit& fit, const Matrix& X) {
  if (X.cols() != fit.slopes.size()) {
    throw std::invalid_argument("prediction matrix has " + std::to_string(X.cols()) +
                                " columns, fit expects " + std::to_string(fit.slopes.size()));
  }
  return (X * fit.slopes).array() + fit.intercept;
}

GlmFit fit_glm(const Matrix& X, const Vector& y, GlmFamily family,
               bool add_intercept, const IrlsOptions& options) {
  check_design(X, y);
  check_outcome_range(family, y);

  GlmFit fit;
  fit.family = family;
  fit.slopes = Vector::Zero(X.cols());
  const Matrix D = with_intercept_column(X, add_intercept);
  const Index p = D.cols();
  if (p == 0) {
    fit.converged = true;
    return fit;
  }

  Vector beta = Vector::Zero(p);
  if (family == GlmFamily::poisson && add_intercept) {
    beta[0] = std::log(y.mean() + 1e-6);
  }

  Vector safe = beta;  // last iterate whose linear predictor stayed in range
  bool diverged = false;
  bool stopped = false;
  int iter = 0;
  while (iter < options.max_iterations) {
    ++iter;
    const Vector eta = D * beta;
    if (eta.lpNorm<Eigen::Infinity>() > options.predictor_cap) {
      beta = safe;
      diverged = true;
      break;
    }
    safe = beta;

    const Vector mu = inverse_link(family, eta);
    Vector weights(eta.size());
    if (family == GlmFamily::logistic) {
      weights = (mu.array() * (1.0 - mu.array())).max(1e-10);
    } else {
      weights = mu.array().max(1e-10);
    }
    const Vector working = eta.array() + (y - mu).array() / weights.array();
    const Vector sqrt_w = weights.array().sqrt();
    const Matrix A = sqrt_w.asDiagonal() * D;
    const Vector b = sqrt_w.asDiagonal() * working;
    const Vector next = Eigen::ColPivHouseholderQR<Matrix>(A).solve(b);

    const double step = (next - beta).lpNorm<Eigen::Infinity>();
    beta = next;
    if (step <= options.step_tolerance) {
      stopped = true;
      break;
    }
  }
  // Exits via the step criterion or the iteration cap leave the final update
  // unchecked against the predictor cap.
  if (!diverged && (D * beta).lpNorm<Eigen::Infinity>() > options.predictor_cap) {
    beta = safe;
    diverged = true;
  }

  if (add_intercept) {
    fit.intercept = beta[0];
    fit.slopes = beta.tail(X.cols());
  } else {
    fit.slopes = beta;
  }
  fit.iterations = iter;
  fit.max_abs_score =
      (D.transpose() * (y - inverse_link(family, D * beta))).lpNorm<Eigen::Infinity>();
  fit.converged = !diverged && stopped && fit.max_abs_score <= options.converged_score;
  return fit;
}

Vector predict_glm(const GlmFit& fit, const Matrix& X) {
  if (X.cols() != fit.slopes.size()) {
    throw std::invalid_argument("prediction matrix has " + std::to_string(X.cols()) +
                                " columns, fit expects " + std::to_string(fit.slopes.size()));
  }
  const Vector eta = (X * fit.slopes).array() + fit.intercept;
  return inverse_link(fit.family, eta);
}

double glm_log_likelihood(const Matrix& X, const Vector& y, GlmFamily family,
                          const Vector& coefficients, bool with_intercept) {
  check_design(X, y);
  check_outcome_range(family, y);
  const Matrix D = with_intercept_column(X, with_intercept);
  if (coefficients.size() != D.cols()) {
    throw std::invalid_argument("coefficient length does not match design");
  }
  const Vector eta = D * coefficients;
  double ll = 0.0;
  if (family == GlmFamily::logistic) {
    // y*eta - log(1 + exp(eta)), with the softplus computed stably
    for (Index i = 0; i < eta.size(); ++i) {
      const double e = eta[i];
      const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      ll += y[i] * e - softplus;
    }
  } else {
    for (Index i = 0; i < eta.size(); ++i) {
      ll += y[i] * eta[i] - std::exp(eta[i]);
    }
  }
  return ll;
}

Vector glm_score(const Matrix& X, const Vector& y, GlmFamily family,
                 const Vector& coefficients, bool with_intercept) {
  check_design(X, y);
  check_outcome_range(family, y);
  const Matrix D = with_intercept_column(X, with_intercept);
  if (coefficients.size() != D.cols()) {
    throw std::invalid_argument("coefficient length does not match design");
  }
  return D.transpose() * (y - inverse_link(family, D * coefficients));
}

}  // namespace obcal
