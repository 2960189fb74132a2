#include "sepnmf/error.hpp"

namespace sepnmf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroColumn: return "ZeroColumn";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::EmptyAnchorSet: return "EmptyAnchorSet";
    case ErrorKind::RegimeMismatch: return "RegimeMismatch";
    case ErrorKind::NoRegime: return "NoRegime";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace sepnmf
