#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "clogit/model.hpp"
#include "clogit/normalize.hpp"
#include "clogit/optimize.hpp"
#include "clogit/parallel.hpp"
#include "clogit/rng.hpp"
#include "clogit/stats.hpp"
#include "clogit/types.hpp"

namespace clogit {

// Inverse-transform standard Gumbel: -log(-log(u)) for u in (0, 1).
inline double gumbel_from_uniform(double u) { return -std::log(-std::log(u)); }

inline double draw_gumbel(Rng& rng) { return gumbel_from_uniform(rng.uniform01()); }

// Marginal distribution of one simulated covariate column.
struct CovariateSpec {
  enum class Kind { intercept, binomial, lognormal, normal };

  Kind kind = Kind::normal;
  double p = 0.5;       // binomial
  double mu = 0.0;      // lognormal / normal
  double sigma = 1.0;   // lognormal / normal

  static CovariateSpec intercept() { return {Kind::intercept}; }
  static CovariateSpec binomial(double p) { return {Kind::binomial, p}; }
  static CovariateSpec lognormal(double mu, double sigma) {
    return {Kind::lognormal, 0.5, mu, sigma};
  }
  static CovariateSpec normal(double mu, double sigma) {
    return {Kind::normal, 0.5, mu, sigma};
  }

  void validate() const {
    if (kind == Kind::binomial && !(p > 0.0 && p < 1.0))
      throw Error("binomial covariate needs p in (0, 1)");
    if ((kind == Kind::lognormal || kind == Kind::normal) && !(sigma > 0.0))
      throw Error("covariate sigma must be positive");
  }

  double draw(Rng& rng) const {
    switch (kind) {
      case Kind::intercept:
        return 1.0;
      case Kind::binomial:
        return rng.bernoulli(p) ? 1.0 : 0.0;
      case Kind::lognormal:
        return rng.lognormal(mu, sigma);
      case Kind::normal:
        return rng.normal(mu, sigma);
    }
    throw Error("unknown covariate kind");
  }
};

struct SimulationConfig {
  int n_simulations = 200;
  int n_customers = 300;
  int n_tasks = 10;
  int n_options = 5;
  std::vector<CovariateSpec> covariates;
  VectorXd true_beta;
  bool outside_option = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_simulations < 1 || n_customers < 1 || n_tasks < 1 || n_options < 1)
      throw Error("simulation counts must all be at least 1");
    if (covariates.empty()) throw Error("simulation needs at least one covariate");
    if (true_beta.size() != static_cast<Index>(covariates.size()))
      throw DimensionError("true_beta length does not match covariate count");
    for (const auto& c : covariates) c.validate();
  }
};

// Draws one dataset from the random-utility process: per alternative,
// covariates then utility noise; the outside option, when present, carries
// pure noise. The highest total utility wins, ties to the lowest index.
inline ChoiceDataset generate_dataset(const SimulationConfig& config, Rng& rng) {
  config.validate();
  const Index k = static_cast<Index>(config.covariates.size());
  const Coefficients beta{config.true_beta, std::nullopt};

  ChoiceDataset data;
  data.includes_outside_option = config.outside_option;
  data.covariate_names.reserve(k);
  for (Index c = 0; c < k; ++c) data.covariate_names.push_back("x" + std::to_string(c + 1));
  data.tasks.reserve(static_cast<std::size_t>(config.n_customers) * config.n_tasks);

  for (int customer = 0; customer < config.n_customers; ++customer) {
    for (int t = 0; t < config.n_tasks; ++t) {
      ChoiceTask task;
      task.alternatives.resize(config.n_options);
      Index best = 0;
      double best_utility = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < config.n_options; ++j) {
        VectorXd x(k);
        for (Index c = 0; c < k; ++c) x(c) = config.covariates[c].draw(rng);
        task.alternatives[j].covariates = std::move(x);
        const double u = utility(task.alternatives[j], beta) + draw_gumbel(rng);
        if (u > best_utility) {
          best_utility = u;
          best = j;
        }
      }
      if (config.outside_option && draw_gumbel(rng) > best_utility)
        task.chosen = std::nullopt;
      else
        task.chosen = best;
      data.tasks.push_back(std::move(task));
    }
  }
  return data;
}

struct CoefficientSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double mc_standard_error = 0.0;
};

struct MonteCarloResult {
  std::vector<std::string> coefficient_names;
  // One row per attempted simulation, denormalized scale. Rows of
  // non-converged simulations hold NaN.
  MatrixXd estimates;
  std::vector<std::uint8_t> converged;
  // Eigenvalue range of the observed information at each normalized
  // optimum; diagnostic for curvature checks.
  std::vector<double> min_information_eigenvalue;
  std::vector<double> max_information_eigenvalue;
  std::vector<CoefficientSummary> summary;  // converged rows only
  int n_converged = 0;
};

namespace detail {

inline void summarize(MonteCarloResult& result) {
  const Index k = result.estimates.cols();
  result.n_converged = 0;
  for (auto flag : result.converged)
    if (flag) ++result.n_converged;
  result.summary.assign(k, CoefficientSummary{});
  for (Index c = 0; c < k; ++c) {
    auto& s = result.summary[c];
    s.name = result.coefficient_names[c];
    if (result.n_converged == 0) continue;
    double mean = 0.0;
    for (Index r = 0; r < result.estimates.rows(); ++r)
      if (result.converged[r]) mean += result.estimates(r, c);
    mean /= result.n_converged;
    double ss = 0.0;
    for (Index r = 0; r < result.estimates.rows(); ++r)
      if (result.converged[r]) {
        const double d = result.estimates(r, c) - mean;
        ss += d * d;
      }
    s.mean = mean;
    s.sd = result.n_converged > 1 ? std::sqrt(ss / (result.n_converged - 1)) : 0.0;
    s.mc_standard_error = s.sd / std::sqrt(static_cast<double>(result.n_converged));
  }
}

}  // namespace detail

// Simulate, normalize, fit, denormalize, n_simulations times. Data-dependent
// normalizers (varmax, z-score) are resolved on each simulation's own
// design. Simulation s draws from substream (seed, s), so results are
// identical regardless of thread count or which other simulations ran.
// Individual fit failures are flagged, never fatal.
inline MonteCarloResult run_monte_carlo(const SimulationConfig& config,
                                        const NormalizationSpec& normalization,
                                        const FitOptions& fit_options = {}) {
  config.validate();
  const Index k = static_cast<Index>(config.covariates.size());
  MonteCarloResult result;
  for (Index c = 0; c < k; ++c) result.coefficient_names.push_back("x" + std::to_string(c + 1));
  result.estimates =
      MatrixXd::Constant(config.n_simulations, k, std::numeric_limits<double>::quiet_NaN());
  result.converged.assign(config.n_simulations, 0);
  result.min_information_eigenvalue.assign(config.n_simulations,
                                           std::numeric_limits<double>::quiet_NaN());
  result.max_information_eigenvalue.assign(config.n_simulations,
                                           std::numeric_limits<double>::quiet_NaN());

  parallel_for(static_cast<std::size_t>(config.n_simulations), [&](std::size_t s) {
    Rng rng = Rng::substream(config.seed, s);
    const ChoiceDataset data = generate_dataset(config, rng);
    try {
      const ResolvedNormalization norm = resolve_normalization(normalization, data);
      const ChoiceDataset normalized = apply_normalization(norm, data);
      const FitResult fitted = fit(normalized, fit_options);
      Eigen::SelfAdjointEigenSolver<MatrixXd> eigen(
          observed_information(normalized, fitted.beta_hat));
      result.min_information_eigenvalue[s] = eigen.eigenvalues()(0);
      result.max_information_eigenvalue[s] = eigen.eigenvalues()(eigen.eigenvalues().size() - 1);
      if (!fitted.converged) return;
      const DenormalizedEstimates estimates = denormalize_estimates(
          fitted.beta_hat, fitted.covariance, norm, CovarianceMethod::full_jacobian);
      result.estimates.row(static_cast<Index>(s)) = estimates.beta.values.transpose();
      result.converged[s] = 1;
    } catch (const Error&) {
      // flagged as non-converged
    }
  });
  detail::summarize(result);
  return result;
}

struct EquivalenceResult {
  std::vector<std::string> coefficient_names;
  MatrixXd raw_estimates;
  MatrixXd normalized_estimates;
  std::vector<std::uint8_t> raw_converged;
  std::vector<std::uint8_t> normalized_converged;
  // Per coefficient, across simulations where both arms converged.
  std::vector<KsResult> ks;
};

// Two arms on identical per-simulation datasets: fit raw, and fit
// varmax-scaled then denormalize. Distributional agreement is scored by a
// two-sample KS test per coefficient.
inline EquivalenceResult equivalence_experiment(const SimulationConfig& config,
                                                const FitOptions& fit_options = {}) {
  config.validate();
  const Index k = static_cast<Index>(config.covariates.size());
  EquivalenceResult result;
  for (Index c = 0; c < k; ++c) result.coefficient_names.push_back("x" + std::to_string(c + 1));
  result.raw_estimates =
      MatrixXd::Constant(config.n_simulations, k, std::numeric_limits<double>::quiet_NaN());
  result.normalized_estimates = result.raw_estimates;
  result.raw_converged.assign(config.n_simulations, 0);
  result.normalized_converged.assign(config.n_simulations, 0);

  parallel_for(static_cast<std::size_t>(config.n_simulations), [&](std::size_t s) {
    Rng rng = Rng::substream(config.seed, s);
    const ChoiceDataset data = generate_dataset(config, rng);
    try {
      const FitResult raw = fit(data, fit_options);
      if (raw.converged) {
        result.raw_estimates.row(static_cast<Index>(s)) = raw.beta_hat.values.transpose();
        result.raw_converged[s] = 1;
      }
    } catch (const Error&) {
    }
    try {
      const VectorXd x_m = varmax(data);
      const FitResult normalized = fit(apply_scaling(data, x_m), fit_options);
      if (normalized.converged) {
        result.normalized_estimates.row(static_cast<Index>(s)) =
            denormalize_scaling(normalized.beta_hat, x_m).values.transpose();
        result.normalized_converged[s] = 1;
      }
    } catch (const Error&) {
    }
  });

  for (Index c = 0; c < k; ++c) {
    std::vector<double> a;
    std::vector<double> b;
    for (int s = 0; s < config.n_simulations; ++s)
      if (result.raw_converged[s] && result.normalized_converged[s]) {
        a.push_back(result.raw_estimates(s, c));
        b.push_back(result.normalized_estimates(s, c));
      }
    result.ks.push_back(ks_two_sample(std::move(a), std::move(b)));
  }
  return result;
}

}  // namespace clogit
