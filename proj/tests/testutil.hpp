#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "clogit/clogit.hpp"

namespace testutil {

using clogit::ChoiceDataset;
using clogit::Coefficients;
using clogit::Index;
using clogit::MatrixXd;
using clogit::VectorXd;

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Largest elementwise relative difference, |a-b| / max(|a|,|b|).
inline double max_rel_diff(const MatrixXd& a, const MatrixXd& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      const double scale = std::max(std::abs(a(i, j)), std::abs(b(i, j)));
      if (scale < 1e-300) continue;
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  return worst;
}

inline VectorXd random_vector(clogit::Rng& rng, Index n, double lo, double hi) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * rng.uniform01();
  return v;
}

// Nonzero normalizing vector with entries of either sign in [0.5, 4].
inline VectorXd random_normalizer(clogit::Rng& rng, Index n) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) {
    const double magnitude = 0.5 + 3.5 * rng.uniform01();
    v(i) = rng.bernoulli(0.5) ? magnitude : -magnitude;
  }
  return v;
}

// Small random dataset with covariates on unit scale.
inline ChoiceDataset random_dataset(clogit::Rng& rng, int n_tasks, int n_alternatives,
                                    Index k, bool outside_option = true,
                                    bool explicit_intercept = false) {
  ChoiceDataset data;
  data.includes_outside_option = outside_option;
  data.explicit_intercept = explicit_intercept;
  for (Index c = 0; c < k; ++c) data.covariate_names.push_back("x" + std::to_string(c + 1));
  for (int t = 0; t < n_tasks; ++t) {
    clogit::ChoiceTask task;
    for (int j = 0; j < n_alternatives; ++j) {
      clogit::Alternative alt;
      alt.covariates = random_vector(rng, k, -2.0, 2.0);
      task.alternatives.push_back(std::move(alt));
    }
    const Index n_outcomes = n_alternatives + (outside_option ? 1 : 0);
    const Index pick = static_cast<Index>(rng.uniform01() * static_cast<double>(n_outcomes));
    if (outside_option && pick == n_alternatives)
      task.chosen = std::nullopt;
    else
      task.chosen = std::min<Index>(pick, n_alternatives - 1);
    data.tasks.push_back(std::move(task));
  }
  return data;
}

inline Coefficients random_coefficients(clogit::Rng& rng, Index k,
                                        bool explicit_intercept = false) {
  Coefficients beta;
  beta.values = random_vector(rng, k, -1.5, 1.5);
  if (explicit_intercept) beta.intercept = -1.0 + 2.0 * rng.uniform01();
  return beta;
}

// Mixed-scale simulation design: intercept column, a balanced binary
// covariate, a lognormal one, and a wide normal one whose sigma controls
// whether naive exponentiation survives.
inline clogit::SimulationConfig benchmark_config(double sigma4, int n_simulations,
                                                 int n_customers, int n_tasks,
                                                 std::uint64_t seed) {
  clogit::SimulationConfig config;
  config.n_simulations = n_simulations;
  config.n_customers = n_customers;
  config.n_tasks = n_tasks;
  config.n_options = 5;
  config.covariates = {
      clogit::CovariateSpec::intercept(),
      clogit::CovariateSpec::binomial(0.5),
      clogit::CovariateSpec::lognormal(0.0, 1.0),
      clogit::CovariateSpec::normal(0.0, sigma4),
  };
  config.true_beta = VectorXd(4);
  config.true_beta << -3.0, 4.0, -1.7, 0.00006;
  config.outside_option = true;
  config.seed = seed;
  return config;
}

// Design for centered-scaling checks: explicit intercept, two normal
// covariates with nonzero means so the centering correction matters, and a
// moderate outside-option share so the intercept is well identified.
inline clogit::SimulationConfig centered_config(int n_customers, int n_tasks,
                                                std::uint64_t seed) {
  clogit::SimulationConfig config;
  config.n_simulations = 1;
  config.n_customers = n_customers;
  config.n_tasks = n_tasks;
  config.n_options = 4;
  config.covariates = {
      clogit::CovariateSpec::intercept(),
      clogit::CovariateSpec::normal(1.5, 1.0),
      clogit::CovariateSpec::normal(-1.0, 1.2),
  };
  config.true_beta = VectorXd(3);
  config.true_beta << -2.0, 0.6, -0.5;
  config.outside_option = true;
  config.seed = seed;
  return config;
}

inline ChoiceDataset generate_explicit_intercept_dataset(const clogit::SimulationConfig& config,
                                                         std::uint64_t stream) {
  clogit::Rng rng = clogit::Rng::substream(config.seed, stream);
  return clogit::make_intercept_explicit(clogit::generate_dataset(config, rng), 0);
}

// Central finite differences of the log-likelihood in stabilized mode,
// in packed parameter space.
inline VectorXd finite_difference_gradient(const ChoiceDataset& data, const Coefficients& beta,
                                           double step = 1e-5) {
  const VectorXd theta = clogit::pack_parameters(beta);
  VectorXd g(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    VectorXd up = theta;
    VectorXd down = theta;
    up(i) += step;
    down(i) -= step;
    const double ll_up =
        clogit::log_likelihood(data, clogit::unpack_parameters(up, data.explicit_intercept));
    const double ll_down =
        clogit::log_likelihood(data, clogit::unpack_parameters(down, data.explicit_intercept));
    g(i) = (ll_up - ll_down) / (2.0 * step);
  }
  return g;
}

// Central finite differences of the analytic gradient; the negative of this
// is the finite-difference observed information.
inline MatrixXd finite_difference_information(const ChoiceDataset& data,
                                              const Coefficients& beta, double step = 1e-5) {
  const VectorXd theta = clogit::pack_parameters(beta);
  MatrixXd info(theta.size(), theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    VectorXd up = theta;
    VectorXd down = theta;
    up(i) += step;
    down(i) -= step;
    const VectorXd g_up = clogit::log_likelihood_gradient(
        data, clogit::unpack_parameters(up, data.explicit_intercept));
    const VectorXd g_down = clogit::log_likelihood_gradient(
        data, clogit::unpack_parameters(down, data.explicit_intercept));
    info.col(i) = -(g_up - g_down) / (2.0 * step);
  }
  return 0.5 * (info + info.transpose());
}

}  // namespace testutil
