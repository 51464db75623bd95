#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace symvar {

// Base of every error the library raises. kind() names the condition as
// listed in the operation contracts.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define SYMVAR_ERROR(Name)                                      \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

SYMVAR_ERROR(InvalidGrid)
SYMVAR_ERROR(InvalidExponent)
SYMVAR_ERROR(SpaceMismatch)
SYMVAR_ERROR(OutsideDomain)
SYMVAR_ERROR(BadStart)
SYMVAR_ERROR(SymmetryViolation)
SYMVAR_ERROR(DivergenceAssumptionViolated)
SYMVAR_ERROR(ConstraintDegeneracy)
SYMVAR_ERROR(NoMountainPass)
SYMVAR_ERROR(IntegrandError)
SYMVAR_ERROR(NotBoundedBelow)
SYMVAR_ERROR(InvalidEpsilon)
SYMVAR_ERROR(AssumptionViolated)
SYMVAR_ERROR(SeparationViolated)
SYMVAR_ERROR(NotSymmetricInput)
SYMVAR_ERROR(InvalidArgument)

#undef SYMVAR_ERROR

// Carries the last residual and, for engines, the best iterate's values.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual,
                     std::vector<double> best = {})
      : Error("ConvergenceFailure", what), residual_(residual), best_(std::move(best)) {}
  double residual() const { return residual_; }
  const std::vector<double>& best() const { return best_; }

 private:
  double residual_;
  std::vector<double> best_;
};

}  // namespace symvar
