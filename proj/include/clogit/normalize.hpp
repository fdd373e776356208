#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "clogit/types.hpp"

namespace clogit {

namespace detail {

inline void require_nonzero(const VectorXd& x_m) {
  for (Index i = 0; i < x_m.size(); ++i)
    if (x_m(i) == 0.0)
      throw ZeroNormalizerError("normalizing vector has a zero at position " +
                                std::to_string(i));
}

inline void require_length(const VectorXd& v, Index n, const char* what) {
  if (v.size() != n)
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
}

}  // namespace detail

// Per-column maximum absolute value of a design matrix.
inline VectorXd varmax(const MatrixXd& design) {
  if (design.rows() == 0 || design.cols() == 0) throw Error("varmax of an empty matrix");
  VectorXd v = design.cwiseAbs().colwise().maxCoeff();
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) == 0.0)
      throw ZeroColumnError("column " + std::to_string(i) + " is identically zero");
  return v;
}

inline VectorXd varmax(const ChoiceDataset& data) { return varmax(stacked_design(data)); }

// Replaces every covariate row x with x / x_m elementwise.
inline ChoiceDataset apply_scaling(const ChoiceDataset& data, const VectorXd& x_m) {
  detail::require_length(x_m, data.n_covariates(), "apply_scaling");
  detail::require_nonzero(x_m);
  ChoiceDataset scaled = data;
  for (auto& task : scaled.tasks)
    for (auto& alt : task.alternatives)
      alt.covariates = alt.covariates.cwiseQuotient(x_m);
  return scaled;
}

// Replaces every covariate row x with (x - a) / x_m elementwise. Requires
// the explicit-intercept form; a covariate column of ones would otherwise
// be silently destroyed by the centering.
inline ChoiceDataset apply_centered_scaling(const ChoiceDataset& data, const VectorXd& a,
                                            const VectorXd& x_m) {
  if (!data.explicit_intercept)
    throw ImplicitInterceptError(
        "centered scaling requires the explicit-intercept dataset form");
  detail::require_length(a, data.n_covariates(), "apply_centered_scaling");
  detail::require_length(x_m, data.n_covariates(), "apply_centered_scaling");
  detail::require_nonzero(x_m);
  ChoiceDataset scaled = data;
  for (auto& task : scaled.tasks)
    for (auto& alt : task.alternatives)
      alt.covariates = (alt.covariates - a).cwiseQuotient(x_m);
  return scaled;
}

// Recovers data-generating coefficients from a fit on scaled covariates:
// beta = beta_star / x_m elementwise. The explicit intercept, when present,
// passes through unchanged (centering vector zero).
inline Coefficients denormalize_scaling(const Coefficients& beta_star, const VectorXd& x_m) {
  detail::require_length(x_m, beta_star.values.size(), "denormalize_scaling");
  detail::require_nonzero(x_m);
  return Coefficients{beta_star.values.cwiseQuotient(x_m), beta_star.intercept};
}

// Covariance of the denormalized coefficients under scaling:
// sigma[i][j] = sigma_star[i][j] / (x_m[i] * x_m[j]).
inline MatrixXd denormalize_cov_scaling(const MatrixXd& sigma_star, const VectorXd& x_m) {
  if (sigma_star.rows() != sigma_star.cols())
    throw DimensionError("denormalize_cov_scaling: covariance must be square");
  detail::require_length(x_m, sigma_star.rows(), "denormalize_cov_scaling");
  detail::require_nonzero(x_m);
  const VectorXd inv = x_m.cwiseInverse();
  return inv.asDiagonal() * sigma_star * inv.asDiagonal();
}

// Recovers (intercept, gamma) from a fit on centered-scaled covariates:
// gamma = gamma_star / x_m, intercept = beta0_star - a'gamma. The correction
// uses the denormalized gamma.
inline Coefficients denormalize_centered(double beta0_star, const VectorXd& gamma_star,
                                         const VectorXd& a, const VectorXd& x_m) {
  detail::require_length(a, gamma_star.size(), "denormalize_centered");
  detail::require_length(x_m, gamma_star.size(), "denormalize_centered");
  detail::require_nonzero(x_m);
  const VectorXd gamma = gamma_star.cwiseQuotient(x_m);
  return Coefficients{gamma, beta0_star - a.dot(gamma)};
}

enum class CovarianceMethod { paper_formula, full_jacobian };

// Covariance of the denormalized (intercept, gamma) estimates. sigma_star is
// (K+1)x(K+1) with the intercept first.
//
// paper_formula rescales by diag(1, x_m) on both sides, treating the
// centering correction as a constant. full_jacobian propagates through the
// exact map (b0*, g*) -> (b0* - a'(g*/x_m), g*/x_m), whose Jacobian is
// [[1, -(a/x_m)'], [0, diag(x_m)^-1]]. The two coincide when a = 0.
inline MatrixXd denormalize_cov_centered(const MatrixXd& sigma_star, const VectorXd& a,
                                         const VectorXd& x_m, CovarianceMethod method) {
  if (sigma_star.rows() != sigma_star.cols())
    throw DimensionError("denormalize_cov_centered: covariance must be square");
  const Index k = x_m.size();
  if (sigma_star.rows() != k + 1)
    throw DimensionError("denormalize_cov_centered: covariance must be (K+1)x(K+1)");
  detail::require_length(a, k, "denormalize_cov_centered");
  detail::require_nonzero(x_m);
  if (method == CovarianceMethod::paper_formula) {
    VectorXd tilde(k + 1);
    tilde(0) = 1.0;
    tilde.tail(k) = x_m;
    return denormalize_cov_scaling(sigma_star, tilde);
  }
  MatrixXd jac = MatrixXd::Zero(k + 1, k + 1);
  jac(0, 0) = 1.0;
  jac.row(0).tail(k) = -a.cwiseQuotient(x_m).transpose();
  jac.bottomRightCorner(k, k) = x_m.cwiseInverse().asDiagonal();
  const MatrixXd cov = jac * sigma_star * jac.transpose();
  return 0.5 * (cov + cov.transpose());
}

// (x . y) * z == x . (y * z) for elementwise products, within 1e-12
// relative (absolute floor 1).
inline bool hadamard_associativity_check(const VectorXd& x, const VectorXd& y,
                                         const VectorXd& z) {
  if (x.size() != y.size() || y.size() != z.size())
    throw DimensionError("hadamard_associativity_check: lengths differ");
  const double lhs = x.cwiseProduct(y).dot(z);
  const double rhs = x.dot(y.cwiseProduct(z));
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return std::abs(lhs - rhs) <= 1e-12 * scale;
}

// Converts a covariate column of ones into the explicit-intercept form.
inline ChoiceDataset make_intercept_explicit(const ChoiceDataset& data, Index column) {
  if (data.explicit_intercept) throw Error("dataset already uses an explicit intercept");
  if (column < 0 || column >= data.n_covariates())
    throw DimensionError("make_intercept_explicit: column out of range");
  ChoiceDataset out = data;
  out.explicit_intercept = true;
  out.covariate_names.erase(out.covariate_names.begin() + column);
  for (auto& task : out.tasks)
    for (auto& alt : task.alternatives) {
      if (alt.covariates(column) != 1.0)
        throw Error("make_intercept_explicit: column is not identically one");
      VectorXd reduced(alt.covariates.size() - 1);
      reduced.head(column) = alt.covariates.head(column);
      reduced.tail(reduced.size() - column) = alt.covariates.tail(reduced.size() - column);
      alt.covariates = reduced;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Declarative normalization choice, resolvable against a dataset.

enum class NormalizationKind { none, scaling, centered_scaling };

// How a normalizing vector is obtained when the dataset is seen.
enum class VectorRule { explicit_values, varmax, column_mean, column_stddev };

struct NormalizationSpec {
  NormalizationKind kind = NormalizationKind::none;
  VectorRule x_m_rule = VectorRule::varmax;
  VectorXd x_m;  // used when x_m_rule == explicit_values
  VectorRule a_rule = VectorRule::column_mean;
  VectorXd a;

  static NormalizationSpec none() { return {}; }
  static NormalizationSpec varmax_scaling() {
    NormalizationSpec s;
    s.kind = NormalizationKind::scaling;
    s.x_m_rule = VectorRule::varmax;
    return s;
  }
  static NormalizationSpec scaling_by(VectorXd x_m) {
    NormalizationSpec s;
    s.kind = NormalizationKind::scaling;
    s.x_m_rule = VectorRule::explicit_values;
    s.x_m = std::move(x_m);
    return s;
  }
  static NormalizationSpec zscore() {
    NormalizationSpec s;
    s.kind = NormalizationKind::centered_scaling;
    s.a_rule = VectorRule::column_mean;
    s.x_m_rule = VectorRule::column_stddev;
    return s;
  }
  static NormalizationSpec centered_by(VectorXd a, VectorXd x_m) {
    NormalizationSpec s;
    s.kind = NormalizationKind::centered_scaling;
    s.a_rule = VectorRule::explicit_values;
    s.a = std::move(a);
    s.x_m_rule = VectorRule::explicit_values;
    s.x_m = std::move(x_m);
    return s;
  }
};

// Concrete normalizer derived from a spec and a dataset's stacked design.
struct ResolvedNormalization {
  NormalizationKind kind = NormalizationKind::none;
  VectorXd x_m;
  VectorXd a;
};

namespace detail {

inline VectorXd column_means(const MatrixXd& design) {
  return design.colwise().mean();
}

inline VectorXd column_stddevs(const MatrixXd& design) {
  if (design.rows() < 2) throw Error("column standard deviation needs at least two rows");
  const VectorXd mean = column_means(design);
  VectorXd sd(design.cols());
  for (Index c = 0; c < design.cols(); ++c)
    sd(c) = std::sqrt((design.col(c).array() - mean(c)).square().sum() /
                      static_cast<double>(design.rows() - 1));
  for (Index c = 0; c < sd.size(); ++c)
    if (sd(c) == 0.0)
      throw ZeroNormalizerError("column " + std::to_string(c) + " is constant");
  return sd;
}

inline VectorXd resolve_vector(VectorRule rule, const VectorXd& explicit_values,
                               const MatrixXd& design) {
  switch (rule) {
    case VectorRule::explicit_values:
      return explicit_values;
    case VectorRule::varmax:
      return varmax(design);
    case VectorRule::column_mean:
      return column_means(design);
    case VectorRule::column_stddev:
      return column_stddevs(design);
  }
  throw Error("unknown vector rule");
}

}  // namespace detail

inline ResolvedNormalization resolve_normalization(const NormalizationSpec& spec,
                                                   const ChoiceDataset& data) {
  ResolvedNormalization resolved;
  resolved.kind = spec.kind;
  if (spec.kind == NormalizationKind::none) return resolved;
  const MatrixXd design = stacked_design(data);
  resolved.x_m = detail::resolve_vector(spec.x_m_rule, spec.x_m, design);
  detail::require_length(resolved.x_m, data.n_covariates(), "resolve_normalization x_m");
  if (spec.kind == NormalizationKind::centered_scaling) {
    resolved.a = detail::resolve_vector(spec.a_rule, spec.a, design);
    detail::require_length(resolved.a, data.n_covariates(), "resolve_normalization a");
  }
  return resolved;
}

inline ChoiceDataset apply_normalization(const ResolvedNormalization& norm,
                                         const ChoiceDataset& data) {
  switch (norm.kind) {
    case NormalizationKind::none:
      return data;
    case NormalizationKind::scaling:
      return apply_scaling(data, norm.x_m);
    case NormalizationKind::centered_scaling:
      return apply_centered_scaling(data, norm.a, norm.x_m);
  }
  throw Error("unknown normalization kind");
}

// Estimates mapped back to the data-generating scale.
struct DenormalizedEstimates {
  Coefficients beta;
  MatrixXd covariance;
  VectorXd standard_errors;
  CovarianceMethod covariance_method = CovarianceMethod::full_jacobian;
};

namespace detail {

inline VectorXd diagonal_roots(const MatrixXd& cov) {
  VectorXd se(cov.rows());
  for (Index i = 0; i < cov.rows(); ++i) se(i) = std::sqrt(cov(i, i));
  return se;
}

}  // namespace detail

// Maps a fit in normalized parameter space back to the raw scale, together
// with its covariance. cov_star must be in packed order (intercept first
// when the coefficients carry one).
inline DenormalizedEstimates denormalize_estimates(const Coefficients& beta_star,
                                                   const MatrixXd& cov_star,
                                                   const ResolvedNormalization& norm,
                                                   CovarianceMethod method) {
  DenormalizedEstimates out;
  out.covariance_method = method;
  switch (norm.kind) {
    case NormalizationKind::none:
      out.beta = beta_star;
      out.covariance = cov_star;
      break;
    case NormalizationKind::scaling: {
      out.beta = denormalize_scaling(beta_star, norm.x_m);
      if (beta_star.intercept) {
        const VectorXd zero = VectorXd::Zero(norm.x_m.size());
        out.covariance = denormalize_cov_centered(cov_star, zero, norm.x_m, method);
      } else {
        out.covariance = denormalize_cov_scaling(cov_star, norm.x_m);
      }
      break;
    }
    case NormalizationKind::centered_scaling: {
      if (!beta_star.intercept)
        throw ImplicitInterceptError(
            "centered-scaling estimates require an explicit intercept");
      out.beta =
          denormalize_centered(*beta_star.intercept, beta_star.values, norm.a, norm.x_m);
      out.covariance = denormalize_cov_centered(cov_star, norm.a, norm.x_m, method);
      break;
    }
  }
  out.standard_errors = detail::diagonal_roots(out.covariance);
  return out;
}

}  // namespace clogit
