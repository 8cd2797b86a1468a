#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <obcal/estimators.hpp>
#include <obcal/experiment.hpp>
#include <obcal/rng.hpp>

#include "test_util.hpp"

using namespace obcal;
using obcal::testutil::make_binary_dataset;
using obcal::testutil::make_continuous_dataset;
using obcal::testutil::make_observed;
using obcal::testutil::make_scalar_dataset;

TEST_CASE("difference in means basics") {
  const auto obs = make_observed({1, 1, 0, 0}, {1, 1, 0, 0}, Matrix::Zero(4, 0));
  CHECK(tau_unadj(obs) == doctest::Approx(1.0));

  const auto constant = make_observed({1, 0, 1, 0}, {2.5, 2.5, 2.5, 2.5}, Matrix::Zero(4, 0));
  CHECK(tau_unadj(constant) == doctest::Approx(0.0));
}

TEST_CASE("difference in means is exactly unbiased over the full enumeration") {
  FinitePopulation population;
  population.y0 = (Vector(6) << 0.4, -1.2, 2.2, 0.0, 1.7, -0.3).finished();
  population.y1 = (Vector(6) << 1.1, -0.2, 2.0, 0.9, 2.5, 0.4).finished();
  population.X = Matrix::Zero(6, 0);
  const double target = population.average_effect();

  double sum = 0.0;
  const auto all = enumerate_allocations(6, 3);
  for (const auto& alloc : all) sum += tau_unadj(observe(population, alloc));
  CHECK(std::abs(sum / static_cast<double>(all.size()) - target) <= 1e-12);
}

TEST_CASE("imputation with the true potential outcomes recovers the target exactly") {
  FinitePopulation population;
  population.y0 = (Vector(4) << 1.0, 2.0, 3.0, 4.0).finished();
  population.y1 = (Vector(4) << 2.0, 2.5, 3.5, 5.0).finished();
  population.X = Matrix::Zero(4, 0);
  RngStream rng(4);
  const ObservedExperiment obs = observe(population, sample_allocation(4, 2, rng));

  PredictionPair oracle;
  oracle.mu0 = population.y0;
  oracle.mu1 = population.y1;
  CHECK(tau_gob(obs, oracle) == doctest::Approx(population.average_effect()).epsilon(1e-14));
}

TEST_CASE("imputation with zero predictions matches the hand-evaluated hybrid form") {
  const auto obs = make_observed({1, 0, 1, 0}, {3, 1, 4, 2}, Matrix::Zero(4, 0));
  PredictionPair zero;
  zero.mu0 = Vector::Zero(4);
  zero.mu1 = Vector::Zero(4);
  // treated: y - 0 = 3, 4; control: 0 - y = -1, -2; mean = (3 - 1 + 4 - 2)/4
  CHECK(tau_gob(obs, zero) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("base learners fit within arms and evaluate everywhere") {
  // within-arm linear outcomes: treated y = 2x + 1, control y = -x + 3
  Matrix X(6, 1);
  X << 0, 1, 2, 0, 1, 2;
  const auto obs = make_observed({1, 1, 1, 0, 0, 0}, {1, 3, 5, 3, 2, 1}, X);
  const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
  for (Index i = 0; i < 6; ++i) {
    CHECK(preds.mu1[i] == doctest::Approx(2.0 * X(i, 0) + 1.0).epsilon(1e-10));
    CHECK(preds.mu0[i] == doctest::Approx(-X(i, 0) + 3.0).epsilon(1e-10));
  }

  // no covariates: arm means
  const auto flat = make_observed({1, 1, 0, 0}, {4.0, 6.0, 1.0, 3.0}, Matrix::Zero(4, 0));
  const PredictionPair means = fit_base_learners(flat, BaseFamily::ols);
  CHECK(means.mu1[0] == doctest::Approx(5.0));
  CHECK(means.mu0[0] == doctest::Approx(2.0));

  // logistic predictions live strictly inside the unit interval
  RngStream rng(31);
  const auto binary = make_binary_dataset(rng, 80, 2);
  const PredictionPair probs = fit_base_learners(binary, BaseFamily::logistic);
  for (Index i = 0; i < binary.size(); ++i) {
    CHECK(probs.mu0[i] > 0.0);
    CHECK(probs.mu0[i] < 1.0);
    CHECK(probs.mu1[i] > 0.0);
    CHECK(probs.mu1[i] < 1.0);
  }
}

TEST_CASE("ols base learners are a fixed point of calibration") {
  RngStream rng(55);
  const auto obs = make_continuous_dataset(rng, 40, 2);
  const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
  const CalibratedPair calibrated = calibrate(obs, preds);
  CHECK((calibrated.mu0_cal - preds.mu0).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((calibrated.mu1_cal - preds.mu1).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("scalar covariate with linear base learners is rank deficient but well defined") {
  RngStream rng(56);
  const auto obs = make_scalar_dataset(rng, 30);
  const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
  const CalibratedPair calibrated = calibrate(obs, preds);
  CHECK(calibrated.fit0.rank_deficient);
  CHECK(calibrated.fit1.rank_deficient);
  CHECK(calibrated.mu0_cal.allFinite());
  CHECK(calibrated.mu1_cal.allFinite());
  // predictions still reproduce the fixed point
  CHECK((calibrated.mu0_cal - preds.mu0).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("constant predictions calibrate to within-arm means") {
  const auto obs = make_observed({1, 1, 0, 0}, {4.0, 6.0, 1.0, 3.0}, Matrix::Zero(4, 0));
  PredictionPair constant;
  constant.mu0 = Vector::Constant(4, 0.7);
  constant.mu1 = Vector::Constant(4, 0.7);
  const CalibratedPair calibrated = calibrate(obs, constant);
  for (Index i = 0; i < 4; ++i) {
    CHECK(calibrated.mu1_cal[i] == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(calibrated.mu0_cal[i] == doctest::Approx(2.0).epsilon(1e-10));
  }
  CHECK(tau_gbcal(obs, constant) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("all-predicted and hybrid forms of the calibrated estimator agree") {
  RngStream rng(57);
  for (int rep = 0; rep < 20; ++rep) {
    const auto obs = make_binary_dataset(rng, 50, 3);
    const PredictionPair preds = fit_base_learners(obs, BaseFamily::logistic);
    const CalibratedPair calibrated = calibrate(obs, preds);

    const double all_predicted = (calibrated.mu1_cal - calibrated.mu0_cal).mean();
    PredictionPair as_preds;
    as_preds.mu0 = calibrated.mu0_cal;
    as_preds.mu1 = calibrated.mu1_cal;
    const double hybrid = tau_gob(obs, as_preds);
    CHECK(std::abs(all_predicted - hybrid) <= 1e-10);
    CHECK(tau_cal(obs, preds) == doctest::Approx(all_predicted).epsilon(1e-14));
  }
}

TEST_CASE("with ols base learners every adjusted estimator collapses to the linear one") {
  RngStream rng(58);
  for (int rep = 0; rep < 100; ++rep) {
    const auto obs = make_continuous_dataset(rng, 50, 3);
    const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
    const double lin = tau_lin(obs);
    CHECK(std::abs(tau_cal(obs, preds) - lin) <= 1e-10);
    CHECK(std::abs(tau_gob(obs, preds) - lin) <= 1e-10);
    CHECK(std::abs(tau_gbcal(obs, preds) - lin) <= 1e-10);
  }
}

TEST_CASE("null population enumeration centers the calibrated estimator") {
  FinitePopulation population;
  population.X = (Matrix(6, 1) << -2, -1, 0, 1, 2, 3).finished();
  population.y0 = (Vector(6) << 0.5, 1.0, 1.4, 2.1, 2.4, 3.1).finished();
  population.y1 = population.y0;  // exact null

  double sum = 0.0;
  const auto all = enumerate_allocations(6, 3);
  for (const auto& alloc : all) {
    const ObservedExperiment obs = observe(population, alloc);
    const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
    sum += tau_cal(obs, preds);
  }
  CHECK(std::abs(sum / static_cast<double>(all.size())) <= 0.05);
}

TEST_CASE("lin with no covariates reduces to the difference in means") {
  const auto obs = make_observed({1, 0, 1, 0}, {2.0, 0.5, 3.0, 1.5}, Matrix::Zero(4, 0));
  CHECK(tau_lin(obs) == doctest::Approx(tau_unadj(obs)).epsilon(1e-14));
}

TEST_CASE("lin recovers an exact constant shift") {
  Matrix X(6, 1);
  X << 0, 1, 2, 0, 1, 2;
  // same slope and intercept per arm, treated shifted by delta = 1.5
  const auto obs = make_observed({1, 1, 1, 0, 0, 0}, {2.5, 4.5, 6.5, 1.0, 3.0, 5.0}, X);
  CHECK(tau_lin(obs) == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("calibration is idempotent") {
  RngStream rng(59);
  for (int rep = 0; rep < 30; ++rep) {
    const auto obs = make_binary_dataset(rng, 60, 3);
    const CalibratedPair calibrated =
        calibrate(obs, fit_base_learners(obs, BaseFamily::logistic));
    CHECK(recalibrate_check(obs, calibrated) <= 1e-8);
  }
  for (int rep = 0; rep < 30; ++rep) {
    const auto obs = make_continuous_dataset(rng, 60, 3);
    const CalibratedPair calibrated = calibrate(obs, fit_base_learners(obs, BaseFamily::ols));
    CHECK(recalibrate_check(obs, calibrated) <= 1e-10);
  }
  // rank-deficient route
  for (int rep = 0; rep < 10; ++rep) {
    const auto obs = make_scalar_dataset(rng, 40);
    const CalibratedPair calibrated = calibrate(obs, fit_base_learners(obs, BaseFamily::ols));
    CHECK(calibrated.fit0.rank_deficient);
    CHECK(recalibrate_check(obs, calibrated) <= 1e-8);
  }
}

TEST_CASE("calibrated predictions are prediction unbiased") {
  RngStream rng(60);
  for (int rep = 0; rep < 50; ++rep) {
    const auto obs = rep % 2 == 0 ? make_continuous_dataset(rng, 50, 3)
                                  : make_binary_dataset(rng, 50, 3);
    const BaseFamily family = rep % 2 == 0 ? BaseFamily::ols : BaseFamily::logistic;
    const CalibratedPair calibrated = calibrate(obs, fit_base_learners(obs, family));
    CHECK(calibrated.unbiasedness_gap <= 1e-8);
  }
}

TEST_CASE("adding a constant to the outcomes leaves every estimator unchanged") {
  RngStream rng(61);
  const auto obs = make_continuous_dataset(rng, 50, 3);
  ObservedExperiment shifted = obs;
  shifted.y_obs.array() += 17.5;

  const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
  const PredictionPair shifted_preds = fit_base_learners(shifted, BaseFamily::ols);
  CHECK(std::abs(tau_unadj(shifted) - tau_unadj(obs)) <= 1e-8);
  CHECK(std::abs(tau_lin(shifted) - tau_lin(obs)) <= 1e-8);
  CHECK(std::abs(tau_gob(shifted, shifted_preds) - tau_gob(obs, preds)) <= 1e-8);
  CHECK(std::abs(tau_cal(shifted, shifted_preds) - tau_cal(obs, preds)) <= 1e-8);
  CHECK(std::abs(tau_gbcal(shifted, shifted_preds) - tau_gbcal(obs, preds)) <= 1e-8);
}

TEST_CASE("constant outcomes give exactly zero effect estimates") {
  Matrix X(6, 1);
  X << -1, 0, 1, 2, 3, 4;
  const auto obs = make_observed({1, 1, 1, 0, 0, 0}, {2.5, 2.5, 2.5, 2.5, 2.5, 2.5}, X);
  const PredictionPair preds = fit_base_learners(obs, BaseFamily::ols);
  CHECK(std::abs(tau_unadj(obs)) <= 1e-10);
  CHECK(std::abs(tau_lin(obs)) <= 1e-10);
  CHECK(std::abs(tau_gob(obs, preds)) <= 1e-10);
  CHECK(std::abs(tau_cal(obs, preds)) <= 1e-10);
  CHECK(std::abs(tau_gbcal(obs, preds)) <= 1e-10);

  const auto ones = make_observed({1, 1, 1, 0, 0, 0}, {1, 1, 1, 1, 1, 1}, X);
  const PredictionPair logit_preds = fit_base_learners(ones, BaseFamily::logistic);
  CHECK(std::abs(tau_unadj(ones)) <= 1e-10);
  CHECK(std::abs(tau_gob(ones, logit_preds)) <= 1e-10);
  CHECK(std::abs(tau_cal(ones, logit_preds)) <= 1e-10);
}

TEST_CASE("extra calibration features feed the feature-engineered estimator") {
  RngStream rng(62);
  const auto obs = make_binary_dataset(rng, 60, 2);
  const PredictionPair preds = fit_base_learners(obs, BaseFamily::logistic);
  const double cal2 = tau_cal(obs, preds, &obs.X);
  CHECK(std::isfinite(cal2));
  CHECK(evaluate_estimator(Estimator::cal2, obs, &preds) == doctest::Approx(cal2));

  // extra features must cover every unit
  const Matrix short_extra = Matrix::Zero(10, 1);
  CHECK_THROWS_AS(calibrate(obs, preds, &short_extra), std::invalid_argument);
}

TEST_CASE("estimator names round-trip") {
  for (Estimator e : {Estimator::unadj, Estimator::gob, Estimator::gbcal, Estimator::cal,
                      Estimator::cal2, Estimator::lin}) {
    CHECK(parse_estimator(to_string(e)) == e);
  }
  CHECK_FALSE(parse_estimator("nope").has_value());
  CHECK(parse_family("poisson") == BaseFamily::poisson);
  CHECK_FALSE(parse_family("gaussian").has_value());
}

TEST_CASE("evaluate_estimator guards missing predictions") {
  const auto obs = make_observed({1, 0, 1, 0}, {1, 0, 1, 0}, Matrix::Zero(4, 0));
  CHECK_THROWS_AS(evaluate_estimator(Estimator::cal, obs, nullptr), std::invalid_argument);
  CHECK(evaluate_estimator(Estimator::unadj, obs, nullptr) == doctest::Approx(1.0));
}
