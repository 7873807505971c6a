#pragma once

#include <stdexcept>
#include <string>

namespace tcda {

enum class ErrorCode {
  invalid_argument = 1,
  config,
  io,
  format,
  numeric,
  retry_exhausted,
  undefined,
  shape,
};

// Base exception for every failure raised by the library. The C API maps
// `code()` one-to-one onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the simulation guards; callers resample the SCM.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what)
      : Error(ErrorCode::numeric, what) {}
};

}  // namespace tcda
