#ifndef MARO_ERROR_H_
#define MARO_ERROR_H_

#include <stdexcept>
#include <string>

namespace maro {

enum class ErrorKind {
  kDimensionMismatch,
  kOutOfBounds,
  kNonFiniteEvaluation,
  kInvalidSpec,
  kDimensionTooLarge,
  kEmptyScenarioSet,
  kInfeasibleModel,
  kNsrInfeasible,
  kDisjointRanges,
  kMissingNsr,
  kInfeasibleRestrictions,
  kTargetOutOfRange,
  kSchema,
  kUsage,
};

const char* ErrorKindName(ErrorKind kind);

// All library failures are reported through this type; `kind()` lets the CLI
// and the HTTP service map them onto exit codes and status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace maro

#endif  // MARO_ERROR_H_
