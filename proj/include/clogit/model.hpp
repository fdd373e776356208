#pragma once

#include <cmath>
#include <limits>

#include "clogit/types.hpp"

namespace clogit {

// naive exponentiates utilities directly and fails loudly on overflow;
// stabilized shifts by the maximum utility first and is safe for any
// finite parameter vector.
enum class ProbabilityMode { naive, stabilized };

// Deterministic utility of one alternative: x'beta, plus the explicit
// intercept when the dataset models one.
inline double utility(const Alternative& alt, const Coefficients& beta) {
  if (alt.covariates.size() != beta.values.size())
    throw DimensionError("utility: covariate length " +
                         std::to_string(alt.covariates.size()) +
                         " vs coefficient length " + std::to_string(beta.values.size()));
  double u = beta.values.dot(alt.covariates);
  if (beta.intercept) u += *beta.intercept;
  return u;
}

namespace detail {

// Compensated (Kahan) accumulator so the task sum is insensitive to
// evaluation order well below the 1e-12 contract.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Utilities of every outcome of a task; the outside option is the trailing
// entry with utility fixed at zero.
inline VectorXd outcome_utilities(const ChoiceTask& task, const Coefficients& beta,
                                  bool outside_option) {
  const Index n_alts = static_cast<Index>(task.alternatives.size());
  VectorXd u(n_alts + (outside_option ? 1 : 0));
  for (Index j = 0; j < n_alts; ++j) u(j) = utility(task.alternatives[j], beta);
  if (outside_option) u(n_alts) = 0.0;
  return u;
}

inline Index chosen_slot(const ChoiceTask& task, Index n_outcomes) {
  return task.chose_outside() ? n_outcomes - 1 : *task.chosen;
}

}  // namespace detail

// Probability of each alternative, with a trailing entry for the outside
// option when enabled.
inline VectorXd choice_probabilities(const ChoiceTask& task, const Coefficients& beta,
                                     bool outside_option, ProbabilityMode mode) {
  VectorXd u = detail::outcome_utilities(task, beta, outside_option);
  VectorXd p(u.size());
  if (mode == ProbabilityMode::naive) {
    double denom = 0.0;
    for (Index j = 0; j < u.size(); ++j) {
      const double e = std::exp(u(j));
      if (!std::isfinite(e)) throw NonFiniteProbabilityError(u(j));
      p(j) = e;
      denom += e;
    }
    if (!std::isfinite(denom) || denom <= 0.0)
      throw NonFiniteProbabilityError(u.maxCoeff());
    p /= denom;
  } else {
    const double m = u.maxCoeff();
    double denom = 0.0;
    for (Index j = 0; j < u.size(); ++j) {
      p(j) = std::exp(u(j) - m);
      denom += p(j);
    }
    p /= denom;
  }
  return p;
}

namespace detail {

// Log probability of the chosen outcome of one task.
inline double chosen_log_probability(const ChoiceTask& task, const Coefficients& beta,
                                     bool outside_option, ProbabilityMode mode) {
  if (task.chose_outside() && !outside_option)
    throw Error("task chose the outside option but the dataset has none");
  VectorXd u = outcome_utilities(task, beta, outside_option);
  const Index c = chosen_slot(task, u.size());
  if (mode == ProbabilityMode::naive) {
    double denom = 0.0;
    for (Index j = 0; j < u.size(); ++j) {
      const double e = std::exp(u(j));
      if (!std::isfinite(e)) throw NonFiniteProbabilityError(u(j));
      denom += e;
    }
    if (!std::isfinite(denom)) throw NonFiniteProbabilityError(u.maxCoeff());
    const double lp = std::log(std::exp(u(c)) / denom);
    if (!std::isfinite(lp)) throw NonFiniteProbabilityError(u(c));
    return lp;
  }
  // log-sum-exp form, finite for every finite utility vector
  const double m = u.maxCoeff();
  double denom = 0.0;
  for (Index j = 0; j < u.size(); ++j) denom += std::exp(u(j) - m);
  return u(c) - m - std::log(denom);
}

}  // namespace detail

// Sum over tasks of the log probability of the observed outcome.
inline double log_likelihood(const ChoiceDataset& data, const Coefficients& beta,
                             ProbabilityMode mode = ProbabilityMode::stabilized) {
  if (beta.values.size() != data.n_covariates())
    throw DimensionError("log_likelihood: coefficient length does not match dataset");
  if (beta.intercept.has_value() != data.explicit_intercept)
    throw DimensionError("log_likelihood: intercept presence does not match dataset form");
  detail::KahanSum acc;
  for (const auto& task : data.tasks)
    acc.add(detail::chosen_log_probability(task, beta, data.includes_outside_option, mode));
  return acc.sum;
}

// Analytic score in packed parameter space (intercept first when explicit):
// sum over tasks of x_chosen - sum_k P_k x_k, where the outside option
// contributes a zero covariate row and probabilities are stabilized.
inline VectorXd log_likelihood_gradient(const ChoiceDataset& data, const Coefficients& beta) {
  if (beta.values.size() != data.n_covariates())
    throw DimensionError("log_likelihood_gradient: coefficient length does not match dataset");
  if (beta.intercept.has_value() != data.explicit_intercept)
    throw DimensionError("log_likelihood_gradient: intercept presence does not match dataset form");
  const Index n_params = data.n_parameters();
  const Index offset = data.explicit_intercept ? 1 : 0;
  VectorXd g = VectorXd::Zero(n_params);
  for (const auto& task : data.tasks) {
    const VectorXd p =
        choice_probabilities(task, beta, data.includes_outside_option, ProbabilityMode::stabilized);
    for (Index j = 0; j < static_cast<Index>(task.alternatives.size()); ++j) {
      if (offset) g(0) -= p(j);
      g.tail(data.n_covariates()) -= p(j) * task.alternatives[j].covariates;
    }
    if (!task.chose_outside()) {
      if (offset) g(0) += 1.0;
      g.tail(data.n_covariates()) += task.alternatives[*task.chosen].covariates;
    }
  }
  return g;
}

// Negative Hessian of the log-likelihood: sum over tasks of the
// probability-weighted covariate covariance. Symmetric and positive
// semi-definite by construction.
inline MatrixXd observed_information(const ChoiceDataset& data, const Coefficients& beta) {
  if (beta.values.size() != data.n_covariates())
    throw DimensionError("observed_information: coefficient length does not match dataset");
  if (beta.intercept.has_value() != data.explicit_intercept)
    throw DimensionError("observed_information: intercept presence does not match dataset form");
  const Index n_params = data.n_parameters();
  const Index offset = data.explicit_intercept ? 1 : 0;
  MatrixXd info = MatrixXd::Zero(n_params, n_params);
  VectorXd row(n_params);
  VectorXd mean(n_params);
  for (const auto& task : data.tasks) {
    const VectorXd p =
        choice_probabilities(task, beta, data.includes_outside_option, ProbabilityMode::stabilized);
    mean.setZero();
    for (Index j = 0; j < static_cast<Index>(task.alternatives.size()); ++j) {
      if (offset) row(0) = 1.0;
      row.tail(data.n_covariates()) = task.alternatives[j].covariates;
      info.noalias() += p(j) * row * row.transpose();
      mean.noalias() += p(j) * row;
    }
    info.noalias() -= mean * mean.transpose();
  }
  return info;
}

}  // namespace clogit
