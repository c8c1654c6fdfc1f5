#pragma once

#include <stdexcept>
#include <string>

namespace rmtp {

// Exit-code class used by the CLI: 2 for bad input, 3 for numerical failure.
enum class ErrorClass { Config, Numerical };

class Error : public std::runtime_error {
 public:
  Error(const std::string& what, ErrorClass cls) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

#define RMTP_DEFINE_ERROR(Name, Cls)                                            \
  class Name : public Error {                                                   \
   public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what, Cls) {}   \
  };

RMTP_DEFINE_ERROR(PoleHit, ErrorClass::Numerical)
RMTP_DEFINE_ERROR(Unsupported, ErrorClass::Config)
RMTP_DEFINE_ERROR(NoConvergence, ErrorClass::Numerical)
RMTP_DEFINE_ERROR(BranchAmbiguity, ErrorClass::Numerical)
RMTP_DEFINE_ERROR(IllConditioned, ErrorClass::Numerical)
RMTP_DEFINE_ERROR(QuadratureNotConverged, ErrorClass::Numerical)
RMTP_DEFINE_ERROR(PrefactorPole, ErrorClass::Config)
RMTP_DEFINE_ERROR(DomainError, ErrorClass::Config)
RMTP_DEFINE_ERROR(OutOfSupport, ErrorClass::Config)
RMTP_DEFINE_ERROR(OrderViolation, ErrorClass::Config)
RMTP_DEFINE_ERROR(OverflowRisk, ErrorClass::Config)
RMTP_DEFINE_ERROR(PrecisionBudgetExceeded, ErrorClass::Config)
RMTP_DEFINE_ERROR(TooFewTrials, ErrorClass::Config)
RMTP_DEFINE_ERROR(MixedShapes, ErrorClass::Config)
RMTP_DEFINE_ERROR(StepSizeFailure, ErrorClass::Numerical)
RMTP_DEFINE_ERROR(OnCut, ErrorClass::Config)
RMTP_DEFINE_ERROR(ConfigError, ErrorClass::Config)

#undef RMTP_DEFINE_ERROR

}  // namespace rmtp
