#include "rydbeat/error.hpp"

namespace rydbeat {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::DegenerateFit: return "degenerate-fit";
    case ErrorCode::InsufficientCoverage: return "insufficient-coverage";
    case ErrorCode::InsufficientDecay: return "insufficient-decay";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace rydbeat
