#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcopt {

enum class Errc {
  InvalidCircuit,
  QubitCapExceeded,
  NotUnitary,
  DomainError,
  InjectivityViolation,
  StaleTransformation,
  NotApplicable,
  NoSoftTransformation,
  CapacityExceeded,
  MaskedAction,
  AllMasked,
  NonfiniteLoss,
  TuningFailed,
  TooManyNodes,
  InvalidGraph,
  Parse,
  Io,
};

std::string_view to_string(Errc code);

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qcopt
