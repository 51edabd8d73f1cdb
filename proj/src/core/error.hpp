#pragma once

#include <stdexcept>
#include <string>

namespace wsvad {

enum class ErrorCode {
  argument,
  io,
  format,
  validation,
  shape,
  internal,
};

const char* to_string(ErrorCode code);

// Every fallible core operation throws Error; the C boundary maps the code
// to a status value and keeps the message for wsvad_last_error().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace wsvad
