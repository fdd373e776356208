#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clogit/clogit.hpp"
#include "testutil.hpp"

using namespace clogit;
using Catch::Matchers::WithinAbs;
using testutil::rel_close;

namespace {

ChoiceTask single_alternative_task(std::initializer_list<double> covariates,
                                   std::optional<Index> chosen = 0) {
  ChoiceTask task;
  Alternative alt;
  alt.covariates = VectorXd(covariates.size());
  Index i = 0;
  for (double v : covariates) alt.covariates(i++) = v;
  task.alternatives.push_back(std::move(alt));
  task.chosen = chosen;
  return task;
}

Coefficients coef(std::initializer_list<double> values) {
  Coefficients beta;
  beta.values = VectorXd(values.size());
  Index i = 0;
  for (double v : values) beta.values(i++) = v;
  return beta;
}

}  // namespace

TEST_CASE("utility is the covariate-coefficient dot product", "[model]") {
  Alternative alt;
  alt.covariates = VectorXd(3);
  alt.covariates << 1, 2, 3;
  CHECK(utility(alt, coef({0, 0, 0})) == 0.0);

  alt.covariates << 1, 0, 0;
  CHECK(utility(alt, coef({-3, 4, -1.7})) == -3.0);

  Alternative wide;
  wide.covariates = VectorXd(4);
  wide.covariates << 1, 1, 2.5, 100;
  CHECK_THAT(utility(wide, coef({-3, 4, -1.7, 0.00006})), WithinAbs(-3.244, 1e-12));

  Coefficients with_intercept = coef({2.0});
  with_intercept.intercept = 0.5;
  Alternative one;
  one.covariates = VectorXd(1);
  one.covariates << 3.0;
  CHECK(utility(one, with_intercept) == 6.5);

  CHECK_THROWS_AS(utility(one, coef({1, 2})), DimensionError);
}

TEST_CASE("choice probabilities match the closed forms", "[model]") {
  const auto task = single_alternative_task({0.0});

  SECTION("unit utility split with the outside option") {
    const VectorXd p =
        choice_probabilities(task, coef({1.0}), true, ProbabilityMode::stabilized);
    REQUIRE(p.size() == 2);
    CHECK_THAT(p(0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(p(1), WithinAbs(0.5, 1e-15));
  }

  SECTION("utility ln 2 gives 2/3 vs 1/3") {
    auto scaled = single_alternative_task({std::log(2.0)});
    const VectorXd p =
        choice_probabilities(scaled, coef({1.0}), true, ProbabilityMode::stabilized);
    CHECK_THAT(p(0), WithinAbs(2.0 / 3.0, 1e-15));
    CHECK_THAT(p(1), WithinAbs(1.0 / 3.0, 1e-15));
  }

  SECTION("uniform over four alternatives without an outside option") {
    ChoiceTask four;
    for (int j = 0; j < 4; ++j) {
      Alternative alt;
      alt.covariates = VectorXd::Zero(2);
      four.alternatives.push_back(std::move(alt));
    }
    four.chosen = 0;
    const VectorXd p =
        choice_probabilities(four, coef({3.0, -1.0}), false, ProbabilityMode::naive);
    REQUIRE(p.size() == 4);
    for (Index j = 0; j < 4; ++j) CHECK_THAT(p(j), WithinAbs(0.25, 1e-15));
  }

  SECTION("naive mode overflows at utility 800") {
    auto hot = single_alternative_task({800.0});
    CHECK_THROWS_AS(choice_probabilities(hot, coef({1.0}), true, ProbabilityMode::naive),
                    NonFiniteProbabilityError);
    try {
      choice_probabilities(hot, coef({1.0}), true, ProbabilityMode::naive);
    } catch (const NonFiniteProbabilityError& e) {
      CHECK(e.utility() == 800.0);
    }
    CHECK_NOTHROW(
        choice_probabilities(hot, coef({1.0}), true, ProbabilityMode::stabilized));
  }
}

TEST_CASE("stabilized probabilities are a proper distribution", "[model][property]") {
  Rng rng(101);
  for (int rep = 0; rep < 300; ++rep) {
    const bool outside = rng.bernoulli(0.5);
    const int n_alts = 1 + static_cast<int>(rng.uniform01() * 5);
    ChoiceTask task;
    for (int j = 0; j < n_alts; ++j) {
      Alternative alt;
      alt.covariates = testutil::random_vector(rng, 3, -30.0, 30.0);
      task.alternatives.push_back(std::move(alt));
    }
    task.chosen = 0;
    const Coefficients beta = testutil::random_coefficients(rng, 3);
    const VectorXd p = choice_probabilities(task, beta, outside, ProbabilityMode::stabilized);
    REQUIRE(p.size() == n_alts + (outside ? 1 : 0));
    CHECK(p.allFinite());
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);
    CHECK_THAT(p.sum(), WithinAbs(1.0, 1e-12));

    bool naive_ok = true;
    VectorXd p_naive;
    try {
      p_naive = choice_probabilities(task, beta, outside, ProbabilityMode::naive);
    } catch (const NonFiniteProbabilityError&) {
      naive_ok = false;
    }
    if (naive_ok) CHECK((p - p_naive).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("log-likelihood closed forms", "[model]") {
  ChoiceDataset data;
  data.includes_outside_option = true;
  data.covariate_names = {"x1"};
  data.tasks.push_back(single_alternative_task({0.0}));
  const Coefficients beta = coef({1.0});

  CHECK_THAT(log_likelihood(data, beta), WithinAbs(std::log(0.5), 1e-15));

  SECTION("additivity over identical tasks") {
    for (int copy = 0; copy < 9; ++copy) data.tasks.push_back(data.tasks.front());
    CHECK_THAT(log_likelihood(data, beta), WithinAbs(10.0 * std::log(0.5), 1e-12));
  }

  SECTION("uniform probabilities at beta zero") {
    ChoiceDataset wide;
    wide.includes_outside_option = true;
    wide.covariate_names = {"x1", "x2"};
    ChoiceTask task;
    Rng rng(7);
    for (int j = 0; j < 6; ++j) {
      Alternative alt;
      alt.covariates = testutil::random_vector(rng, 2, -1, 1);
      task.alternatives.push_back(std::move(alt));
    }
    task.chosen = 3;
    wide.tasks.push_back(task);
    CHECK_THAT(log_likelihood(wide, coef({0.0, 0.0})), WithinAbs(-std::log(7.0), 1e-12));
  }

  SECTION("strictly negative unless a probability is one") {
    Rng rng(11);
    const auto random = testutil::random_dataset(rng, 20, 3, 2);
    CHECK(log_likelihood(random, testutil::random_coefficients(rng, 2)) < 0.0);
  }

  SECTION("naive overflow propagates") {
    data.tasks.push_back(single_alternative_task({900.0}));
    CHECK_THROWS_AS(log_likelihood(data, beta, ProbabilityMode::naive),
                    NonFiniteProbabilityError);
  }
}

TEST_CASE("log-likelihood is concave", "[model][property]") {
  Rng rng(23);
  const auto data = testutil::random_dataset(rng, 40, 4, 3);
  for (int rep = 0; rep < 50; ++rep) {
    const Coefficients b1 = testutil::random_coefficients(rng, 3);
    const Coefficients b2 = testutil::random_coefficients(rng, 3);
    const double lambda = rng.uniform01();
    const Coefficients mix{lambda * b1.values + (1.0 - lambda) * b2.values, std::nullopt};
    const double lhs = log_likelihood(data, mix);
    const double rhs =
        lambda * log_likelihood(data, b1) + (1.0 - lambda) * log_likelihood(data, b2);
    CHECK(lhs >= rhs - 1e-10);
  }
}

TEST_CASE("score closed forms", "[model]") {
  SECTION("zero at a symmetric stationary point") {
    ChoiceDataset data;
    data.includes_outside_option = false;
    data.covariate_names = {"x1"};
    ChoiceTask task;
    for (double v : {1.0, -1.0, 0.0}) {
      Alternative alt;
      alt.covariates = VectorXd(1);
      alt.covariates << v;
      task.alternatives.push_back(std::move(alt));
    }
    task.chosen = 2;  // covariates equal the probability-weighted mean
    data.tasks.push_back(task);
    const VectorXd g = log_likelihood_gradient(data, coef({0.0}));
    CHECK_THAT(g(0), WithinAbs(0.0, 1e-15));
  }

  SECTION("all-outside dataset at beta zero") {
    Rng rng(31);
    ChoiceDataset data;
    data.includes_outside_option = true;
    data.covariate_names = {"x1", "x2"};
    const int n_alts = 3;
    VectorXd expected = VectorXd::Zero(2);
    for (int t = 0; t < 25; ++t) {
      ChoiceTask task;
      for (int j = 0; j < n_alts; ++j) {
        Alternative alt;
        alt.covariates = testutil::random_vector(rng, 2, -2, 2);
        expected -= alt.covariates / double(n_alts + 1);
        task.alternatives.push_back(std::move(alt));
      }
      task.chosen = std::nullopt;
      data.tasks.push_back(std::move(task));
    }
    const VectorXd g = log_likelihood_gradient(data, coef({0.0, 0.0}));
    CHECK((g - expected).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("score matches central finite differences", "[model][property]") {
  Rng rng(37);
  for (int rep = 0; rep < 8; ++rep) {
    const bool explicit_intercept = rep % 2 == 1;
    const auto data = testutil::random_dataset(rng, 30, 3, 3, true, explicit_intercept);
    const Coefficients beta = testutil::random_coefficients(rng, 3, explicit_intercept);
    const VectorXd g = log_likelihood_gradient(data, beta);
    const VectorXd fd = testutil::finite_difference_gradient(data, beta);
    for (Index i = 0; i < g.size(); ++i) CHECK(rel_close(g(i), fd(i), 1e-6));
  }
}

TEST_CASE("observed information closed form and properties", "[model]") {
  SECTION("single covariate variance form at beta zero") {
    ChoiceDataset data;
    data.includes_outside_option = true;
    data.covariate_names = {"x1"};
    ChoiceTask task;
    for (double v : {1.0, -2.0}) {
      Alternative alt;
      alt.covariates = VectorXd(1);
      alt.covariates << v;
      task.alternatives.push_back(std::move(alt));
    }
    task.chosen = 0;
    data.tasks.push_back(task);
    // three outcomes (two alternatives plus outside), uniform probabilities
    const double p = 1.0 / 3.0;
    const double moment2 = p * (1.0 + 4.0);
    const double moment1 = p * (1.0 - 2.0);
    const MatrixXd info = observed_information(data, coef({0.0}));
    CHECK_THAT(info(0, 0), WithinAbs(moment2 - moment1 * moment1, 1e-14));
  }

  SECTION("matches finite differences, symmetric, positive semi-definite") {
    Rng rng(41);
    for (int rep = 0; rep < 6; ++rep) {
      const bool explicit_intercept = rep % 2 == 1;
      const auto data = testutil::random_dataset(rng, 30, 3, 3, true, explicit_intercept);
      const Coefficients beta = testutil::random_coefficients(rng, 3, explicit_intercept);
      const MatrixXd info = observed_information(data, beta);
      CHECK((info - info.transpose()).lpNorm<Eigen::Infinity>() <= 1e-10);
      const MatrixXd fd = testutil::finite_difference_information(data, beta);
      for (Index i = 0; i < info.rows(); ++i)
        for (Index j = 0; j < info.cols(); ++j) CHECK(rel_close(info(i, j), fd(i, j), 1e-5));
      Eigen::SelfAdjointEigenSolver<MatrixXd> eigen(info);
      CHECK(eigen.eigenvalues()(0) >= -1e-10 * std::max(1.0, eigen.eigenvalues().maxCoeff()));
    }
  }
}

TEST_CASE("model input contracts", "[model]") {
  Rng rng(43);
  const auto data = testutil::random_dataset(rng, 5, 3, 2);
  CHECK_THROWS_AS(log_likelihood(data, coef({1.0, 2.0, 3.0})), DimensionError);
  CHECK_THROWS_AS(log_likelihood_gradient(data, coef({1.0})), DimensionError);
  CHECK_THROWS_AS(observed_information(data, coef({1.0})), DimensionError);

  Coefficients stray = coef({1.0, 2.0});
  stray.intercept = 0.4;  // dataset is not in explicit-intercept form
  CHECK_THROWS_AS(log_likelihood(data, stray), DimensionError);

  ChoiceDataset forced = data;
  forced.includes_outside_option = false;
  forced.tasks[0].chosen = std::nullopt;
  CHECK_THROWS_AS(log_likelihood(forced, coef({1.0, 2.0})), Error);
}
