#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>

#include "clogit/model.hpp"
#include "clogit/types.hpp"

namespace clogit {

struct FitOptions {
  int max_iterations = 200;
  // Infinity norm of the score at which the fit is declared converged.
  double gradient_tolerance = 1e-8;
  std::optional<Coefficients> initial_beta;
  ProbabilityMode mode = ProbabilityMode::stabilized;
};

struct FitResult {
  Coefficients beta_hat;
  // Inverse observed information at beta_hat. Zero matrix when the fit did
  // not converge and the information was not invertible.
  MatrixXd covariance;
  double log_likelihood_value = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::quiet_NaN();
};

// True iff the stacked covariate matrix (augmented with a ones column under
// the explicit-intercept form) has full column rank, judged by singular
// values above 1e-10 of the largest.
inline bool rank_check(const ChoiceDataset& data) {
  MatrixXd design = stacked_design(data);
  if (data.explicit_intercept) {
    MatrixXd augmented(design.rows(), design.cols() + 1);
    augmented.col(0).setOnes();
    augmented.rightCols(design.cols()) = design;
    design.swap(augmented);
  }
  if (design.rows() < design.cols()) return false;
  Eigen::JacobiSVD<MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > 1e-10 * sv(0);
}

namespace detail {

inline void validate_fit_options(const FitOptions& options, const ChoiceDataset& data) {
  if (options.max_iterations < 1) throw Error("max_iterations must be at least 1");
  if (!(options.gradient_tolerance > 0)) throw Error("gradient_tolerance must be positive");
  if (options.initial_beta) {
    if (options.initial_beta->values.size() != data.n_covariates())
      throw DimensionError("initial_beta length does not match dataset");
    if (options.initial_beta->intercept.has_value() != data.explicit_intercept)
      throw DimensionError("initial_beta intercept presence does not match dataset form");
  }
}

}  // namespace detail

// Maximum-likelihood fit. Newton ascent with step-halving, preceded by one
// identity-metric steepest-ascent probe step (the move a first-order
// optimizer makes from the start point). In naive mode an overflowing
// evaluation anywhere along the path raises NonFiniteLikelihoodError;
// nothing is clamped.
inline FitResult fit(const ChoiceDataset& data, const FitOptions& options = {}) {
  data.validate();
  detail::validate_fit_options(options, data);
  if (!rank_check(data))
    throw RankDeficientError("stacked covariate columns are not linearly independent");

  const Index n_params = data.n_parameters();
  VectorXd theta = options.initial_beta ? pack_parameters(*options.initial_beta)
                                        : VectorXd::Zero(n_params);

  const auto eval_ll = [&](const VectorXd& t) {
    try {
      return log_likelihood(data, unpack_parameters(t, data.explicit_intercept), options.mode);
    } catch (const NonFiniteProbabilityError& e) {
      throw NonFiniteLikelihoodError(e.utility());
    }
  };
  const auto eval_grad = [&](const VectorXd& t) {
    return log_likelihood_gradient(data, unpack_parameters(t, data.explicit_intercept));
  };

  double ll = eval_ll(theta);
  VectorXd g = eval_grad(theta);

  constexpr int kMaxHalvings = 60;

  if (g.lpNorm<Eigen::Infinity>() > options.gradient_tolerance) {
    const VectorXd direction = g / g.lpNorm<Eigen::Infinity>();
    double step = 1.0;
    for (int h = 0; h < kMaxHalvings; ++h) {
      const double trial = eval_ll(theta + step * direction);
      if (trial > ll) {
        theta += step * direction;
        ll = trial;
        g = eval_grad(theta);
        break;
      }
      step *= 0.5;
    }
  }

  int iterations = 0;
  while (g.lpNorm<Eigen::Infinity>() > options.gradient_tolerance &&
         iterations < options.max_iterations) {
    ++iterations;
    const MatrixXd info =
        observed_information(data, unpack_parameters(theta, data.explicit_intercept));
    VectorXd direction;
    Eigen::LDLT<MatrixXd> ldlt(info);
    bool usable = ldlt.info() == Eigen::Success;
    if (usable) {
      direction = ldlt.solve(g);
      usable = direction.allFinite() && g.dot(direction) > 0.0;
    }
    if (!usable) direction = g / g.lpNorm<Eigen::Infinity>();

    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      const double trial = eval_ll(theta + step * direction);
      if (trial > ll) {
        theta += step * direction;
        ll = trial;
        g = eval_grad(theta);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Improvement is below floating-point resolution. Take the full step
      // if it still shrinks the score, otherwise stop.
      const VectorXd g_trial = eval_grad(theta + direction);
      if (g_trial.allFinite() &&
          g_trial.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) {
        theta += direction;
        ll = eval_ll(theta);
        g = g_trial;
      } else {
        break;
      }
    }
  }

  FitResult result;
  result.beta_hat = unpack_parameters(theta, data.explicit_intercept);
  result.log_likelihood_value = ll;
  result.iterations = iterations;
  result.gradient_norm = g.lpNorm<Eigen::Infinity>();
  result.converged = result.gradient_norm <= options.gradient_tolerance;

  const MatrixXd info =
      observed_information(data, unpack_parameters(theta, data.explicit_intercept));
  Eigen::SelfAdjointEigenSolver<MatrixXd> eigen(info);
  const VectorXd& eigenvalues = eigen.eigenvalues();
  const double largest = eigenvalues(eigenvalues.size() - 1);
  if (largest <= 0.0 || eigenvalues(0) <= largest * 1e-13) {
    if (result.converged)
      throw SingularInformationError("observed information is not invertible at the optimum");
    result.covariance = MatrixXd::Zero(n_params, n_params);
    return result;
  }
  const MatrixXd inverse = eigen.eigenvectors() *
                           eigenvalues.cwiseInverse().asDiagonal() *
                           eigen.eigenvectors().transpose();
  result.covariance = 0.5 * (inverse + inverse.transpose());
  return result;
}

}  // namespace clogit
