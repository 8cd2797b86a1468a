#pragma once

#include <string_view>

#include "obcal/types.hpp"

namespace obcal {

/// Ordinary least squares coefficients. When the design is rank deficient the
/// coefficients are the minimum-norm solution, so fitted values stay unique.
struct LinearFit {
  double intercept = 0.0;
  Vector slopes;
  bool rank_deficient = false;
  Index effective_rank = 0;
};

enum class GlmFamily { logistic, poisson };

std::string_view to_string(GlmFamily family);

struct GlmFit {
  GlmFamily family = GlmFamily::logistic;
  double intercept = 0.0;
  Vector slopes;
  bool converged = false;
  int iterations = 0;
  double max_abs_score = 0.0;  // sup-norm of the score at the returned coefficients
};

struct IrlsOptions {
  double step_tolerance = 1e-10;  // stop when the coefficient update falls below
  double converged_score = 1e-6;  // fits reported converged satisfy this score bound
  double predictor_cap = 30.0;    // |linear predictor| beyond this flags divergence
  int max_iterations = 100;
};

/// Minimum-norm least squares of y on X (plus an intercept column when
/// requested), via SVD with singular values below
/// max(rows, cols) * eps * sigma_max treated as zero.
LinearFit fit_ols(const Matrix& X, const Vector& y, bool add_intercept = true);

/// Maximum likelihood for logistic or Poisson regression by iteratively
/// reweighted least squares. Hitting the iteration cap or the linear-predictor
/// cap (separation, divergence) returns the last safe iterate with
/// converged = false instead of failing.
GlmFit fit_glm(const Matrix& X, const Vector& y, GlmFamily family,
               bool add_intercept = true, const IrlsOptions& options = {});

Vector predict_linear(const LinearFit& fit, const Matrix& X);

/// Inverse-link of the linear predictor (logistic: sigmoid, poisson: exp).
Vector predict_glm(const GlmFit& fit, const Matrix& X);

/// Log-likelihood at the given coefficients, up to outcome-only constants.
/// coefficients = [intercept, slopes...] when with_intercept, else [slopes...].
double glm_log_likelihood(const Matrix& X, const Vector& y, GlmFamily family,
                          const Vector& coefficients, bool with_intercept);

/// Analytic score (gradient of glm_log_likelihood) at the given coefficients.
Vector glm_score(const Matrix& X, const Vector& y, GlmFamily family,
                 const Vector& coefficients, bool with_intercept);

}  // namespace obcal
