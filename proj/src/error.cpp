#include "qcopt/error.hpp"

namespace qcopt {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidCircuit: return "InvalidCircuit";
    case Errc::QubitCapExceeded: return "QubitCapExceeded";
    case Errc::NotUnitary: return "NotUnitary";
    case Errc::DomainError: return "DomainError";
    case Errc::InjectivityViolation: return "InjectivityViolation";
    case Errc::StaleTransformation: return "StaleTransformation";
    case Errc::NotApplicable: return "NotApplicable";
    case Errc::NoSoftTransformation: return "NoSoftTransformationAvailable";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::MaskedAction: return "MaskedAction";
    case Errc::AllMasked: return "AllMasked";
    case Errc::NonfiniteLoss: return "NonfiniteLoss";
    case Errc::TuningFailed: return "TuningFailed";
    case Errc::TooManyNodes: return "TooManyNodes";
    case Errc::InvalidGraph: return "InvalidGraph";
    case Errc::Parse: return "ParseError";
    case Errc::Io: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace qcopt
