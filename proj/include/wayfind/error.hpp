#pragma once

#include <stdexcept>
#include <string>

namespace wayfind {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Validation,
  Unreachable,
  Infeasible,
  NotFound,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// All engine failures surface as this exception; the C API maps `code` onto
// its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wayfind
