#include "loco/error.hpp"

namespace loco {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidField: return "invalid-field";
    case ErrorKind::InvalidTrace: return "invalid-trace";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateSample: return "degenerate-sample";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::FileNotFound: return "file-not-found";
    case ErrorKind::MalformedConfig: return "malformed-config";
    case ErrorKind::PortInUse: return "port-in-use";
  }
  return "unknown";
}

}  // namespace loco
