#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace svreg {

// Typed runtime errors. The CLI maps Error subclasses to exit code 1 with a
// JSON body on stderr; UsageError maps to exit code 2.
struct Error : std::runtime_error {
  Error(std::string kind_, const std::string& what_)
      : std::runtime_error(what_), kind(std::move(kind_)) {}
  std::string kind;
};

#define SVREG_ERROR_TYPE(Name)                                            \
  struct Name : Error {                                                   \
    explicit Name(const std::string& what_) : Error(#Name, what_) {}      \
  }

SVREG_ERROR_TYPE(DomainError);
SVREG_ERROR_TYPE(EmptyData);
SVREG_ERROR_TYPE(NormBudgetExceeded);
SVREG_ERROR_TYPE(DegenerateScale);
SVREG_ERROR_TYPE(UnknownFamily);
SVREG_ERROR_TYPE(NotAMinimizer);
SVREG_ERROR_TYPE(NonFinite);
SVREG_ERROR_TYPE(TooLarge);
SVREG_ERROR_TYPE(InvalidEpsilon);
SVREG_ERROR_TYPE(Overflow);
SVREG_ERROR_TYPE(CertificationFailure);
SVREG_ERROR_TYPE(AuditViolation);
SVREG_ERROR_TYPE(QuadratureFailure);
SVREG_ERROR_TYPE(UsageError);

#undef SVREG_ERROR_TYPE

}  // namespace svreg
