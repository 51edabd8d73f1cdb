#include "error.hpp"

namespace wsvad {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::argument: return "argument";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::validation: return "validation";
    case ErrorCode::shape: return "shape";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace wsvad
