#pragma once

#include <stdexcept>
#include <string>

namespace clogit {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Contract violation: vector/matrix sizes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Direct exponentiation produced a non-finite softmax value.
// Carries the utility at which exp() left the double range.
class NonFiniteProbabilityError : public Error {
 public:
  explicit NonFiniteProbabilityError(double utility)
      : Error("softmax produced a non-finite value at utility " +
              std::to_string(utility)),
        utility_(utility) {}
  double utility() const noexcept { return utility_; }

 private:
  double utility_;
};

// A fit evaluated a non-finite log-likelihood in naive mode.
class NonFiniteLikelihoodError : public Error {
 public:
  explicit NonFiniteLikelihoodError(double utility)
      : Error("log-likelihood became non-finite at utility " +
              std::to_string(utility)),
        utility_(utility) {}
  double utility() const noexcept { return utility_; }

 private:
  double utility_;
};

// Stacked covariate columns are not linearly independent.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

// The observed information at the optimum is not invertible.
class SingularInformationError : public Error {
 public:
  using Error::Error;
};

// varmax input contains an identically-zero column.
class ZeroColumnError : public Error {
 public:
  using Error::Error;
};

// A normalizing vector contains a zero entry.
class ZeroNormalizerError : public Error {
 public:
  using Error::Error;
};

// Centered scaling was requested on a dataset that models the intercept
// as a covariate column instead of an explicit parameter.
class ImplicitInterceptError : public Error {
 public:
  using Error::Error;
};

class EmptySampleError : public Error {
 public:
  using Error::Error;
};

// Sample has no spread (constant input).
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace clogit
