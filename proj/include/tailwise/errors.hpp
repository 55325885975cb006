#pragma once

#include <stdexcept>
#include <string>

namespace tailwise {

enum class ErrorCode {
  empty_sample,
  domain_error,
  degenerate_tail,
  kind_mismatch,
  sample_too_small,
  insufficient_grid,
  schema_error,
  io_error,
  singular_design,
  render_error,
  config_error,
};

const char* to_string(ErrorCode code);

/// Base class for every error raised by the library. The code is stable and
/// is what the CLI maps onto exit statuses.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code) {
  }

  [[nodiscard]] ErrorCode code() const noexcept {
    return code_;
  }

private:
  ErrorCode code_;
};

#define TAILWISE_DEFINE_ERROR(Name, Code)                                      \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {   \
    }                                                                          \
  }

TAILWISE_DEFINE_ERROR(EmptySample, empty_sample);
TAILWISE_DEFINE_ERROR(DomainError, domain_error);
TAILWISE_DEFINE_ERROR(DegenerateTail, degenerate_tail);
TAILWISE_DEFINE_ERROR(KindMismatch, kind_mismatch);
TAILWISE_DEFINE_ERROR(SampleTooSmall, sample_too_small);
TAILWISE_DEFINE_ERROR(InsufficientGrid, insufficient_grid);
TAILWISE_DEFINE_ERROR(SchemaError, schema_error);
TAILWISE_DEFINE_ERROR(IoError, io_error);
TAILWISE_DEFINE_ERROR(SingularDesign, singular_design);
TAILWISE_DEFINE_ERROR(RenderError, render_error);
TAILWISE_DEFINE_ERROR(ConfigError, config_error);

#undef TAILWISE_DEFINE_ERROR

} // namespace tailwise
