#include "tailwise/errors.hpp"

namespace tailwise {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_sample:
      return "EmptySample";
    case ErrorCode::domain_error:
      return "DomainError";
    case ErrorCode::degenerate_tail:
      return "DegenerateTail";
    case ErrorCode::kind_mismatch:
      return "KindMismatch";
    case ErrorCode::sample_too_small:
      return "SampleTooSmall";
    case ErrorCode::insufficient_grid:
      return "InsufficientGrid";
    case ErrorCode::schema_error:
      return "SchemaError";
    case ErrorCode::io_error:
      return "IoError";
    case ErrorCode::singular_design:
      return "SingularDesign";
    case ErrorCode::render_error:
      return "RenderError";
    case ErrorCode::config_error:
      return "ConfigError";
  }
  return "Error";
}

} // namespace tailwise
