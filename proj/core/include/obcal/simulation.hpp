#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "obcal/estimators.hpp"
#include "obcal/experiment.hpp"
#include "obcal/rng.hpp"
#include "obcal/types.hpp"

namespace obcal {

/// Benchmark data-generating process: scalar covariate uniform on [-5, 5],
/// binary potential outcomes thresholded against Gaussian-bump probabilities,
/// with 30% of units treated.
struct DgpSpec {
  int n_units = 0;
  double n1_fraction = 0.3;
};

double dgp_prob_control(double x);  // exp(-(x + 0.85)^2 / 3.38)
double dgp_prob_treated(double x);  // exp(-(x - 1)^2 / 2)

/// floor(n1_fraction * n_units); validates the spec and the resulting arms.
int treated_count(const DgpSpec& spec);

/// Draws covariates and one shared uniform per unit, then thresholds both
/// response surfaces against the same uniform. Sharing the uniform makes the
/// two potential outcomes positively correlated.
FinitePopulation generate_population(const DgpSpec& spec, RngStream& rng);

/// y_i(z) = 1{u_i <= p_z(x_i)} for arbitrary response surfaces; the DGP above
/// delegates here.
FinitePopulation threshold_population(const Vector& x, const Vector& u,
                                      const std::function<double(double)>& p0,
                                      const std::function<double(double)>& p1);

struct MonteCarloRow {
  int n_units = 0;
  std::vector<std::pair<Estimator, double>> ratios;  // var(e) / var(unadj)
  long skipped = 0;                                  // replications excluded
  int flagged_populations = 0;                       // populations with > 5% skips
};

struct MonteCarloTable {
  std::vector<MonteCarloRow> rows;
  int populations = 0;  // S
  int allocations = 0;  // B
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

struct MonteCarloOptions {
  int workers = 1;
};

/// For each of S populations, draws B allocations, computes every requested
/// estimator plus the unadjusted baseline, and averages the per-population
/// variance ratios. Replications where an estimator throws are excluded from
/// that population's variances and counted.
///
/// Streams derive from (seed, population, allocation), and per-population
/// results are reduced in a fixed order, so the output is bit-identical for
/// any worker count.
MonteCarloTable run_monte_carlo(const DgpSpec& spec, int populations, int allocations,
                                BaseFamily family, const std::vector<Estimator>& estimators,
                                std::uint64_t seed, const MonteCarloOptions& options = {});

struct ExactSummary {
  std::vector<double> values;  // one per allocation, enumeration order
  double mean = 0.0;
  double variance = 0.0;  // population convention (divide by the count)
};

struct ExactDistribution {
  std::vector<std::pair<Estimator, ExactSummary>> per_estimator;
  std::uint64_t allocation_count = 0;
};

/// Exhaustive randomization distribution over every allocation. Requires
/// 2 <= n_treated <= N - 2 and C(N, n_treated) under the cap.
ExactDistribution exact_randomization_distribution(
    const FinitePopulation& population, int n_treated, BaseFamily family,
    const std::vector<Estimator>& estimators,
    std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace obcal
