#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "clogit/errors.hpp"

namespace clogit {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// One alternative in a choice set: its covariate row.
struct Alternative {
  VectorXd covariates;
};

// A single choice occasion: the alternatives shown and the outcome.
// chosen == std::nullopt marks the outside (no-purchase) option.
struct ChoiceTask {
  std::vector<Alternative> alternatives;
  std::optional<Index> chosen;

  bool chose_outside() const { return !chosen.has_value(); }
};

// Utility weights. `intercept` is engaged iff the dataset uses the
// explicit-intercept parameterization.
struct Coefficients {
  VectorXd values;
  std::optional<double> intercept;
};

struct ChoiceDataset {
  std::vector<ChoiceTask> tasks;
  std::vector<std::string> covariate_names;
  bool includes_outside_option = true;
  // When true the intercept is a separate parameter rather than a
  // covariate column of ones.
  bool explicit_intercept = false;

  Index n_covariates() const { return static_cast<Index>(covariate_names.size()); }
  Index n_parameters() const { return n_covariates() + (explicit_intercept ? 1 : 0); }

  Index n_rows() const {
    Index n = 0;
    for (const auto& task : tasks) n += static_cast<Index>(task.alternatives.size());
    return n;
  }

  // Checks the structural invariants. Throws on violation.
  void validate() const {
    const Index k = n_covariates();
    if (tasks.empty()) throw Error("dataset has no tasks");
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const auto& task = tasks[t];
      if (task.alternatives.empty())
        throw Error("task " + std::to_string(t) + " has no alternatives");
      if (task.chose_outside()) {
        if (!includes_outside_option)
          throw Error("task " + std::to_string(t) +
                      " chose the outside option but the dataset has none");
      } else if (*task.chosen < 0 ||
                 *task.chosen >= static_cast<Index>(task.alternatives.size())) {
        throw Error("task " + std::to_string(t) + " chosen index out of range");
      }
      for (const auto& alt : task.alternatives) {
        if (alt.covariates.size() != k)
          throw DimensionError("covariate length " +
                               std::to_string(alt.covariates.size()) +
                               " does not match declared count " + std::to_string(k));
        if (!alt.covariates.allFinite())
          throw Error("non-finite covariate value in task " + std::to_string(t));
      }
    }
  }
};

// All covariate rows stacked in task order, one row per alternative.
inline MatrixXd stacked_design(const ChoiceDataset& data) {
  MatrixXd design(data.n_rows(), data.n_covariates());
  Index row = 0;
  for (const auto& task : data.tasks)
    for (const auto& alt : task.alternatives) design.row(row++) = alt.covariates;
  return design;
}

// Parameter packing. The explicit intercept, when present, occupies slot 0.
inline VectorXd pack_parameters(const Coefficients& c) {
  if (!c.intercept) return c.values;
  VectorXd theta(c.values.size() + 1);
  theta(0) = *c.intercept;
  theta.tail(c.values.size()) = c.values;
  return theta;
}

inline Coefficients unpack_parameters(const VectorXd& theta, bool explicit_intercept) {
  if (!explicit_intercept) return Coefficients{theta, std::nullopt};
  if (theta.size() < 1) throw DimensionError("parameter vector too short for an intercept");
  return Coefficients{theta.tail(theta.size() - 1), theta(0)};
}

inline std::vector<std::string> parameter_names(const ChoiceDataset& data) {
  std::vector<std::string> names;
  if (data.explicit_intercept) names.push_back("(intercept)");
  names.insert(names.end(), data.covariate_names.begin(), data.covariate_names.end());
  return names;
}

}  // namespace clogit
