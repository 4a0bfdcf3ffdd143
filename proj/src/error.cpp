#include "punchdet/error.hpp"

namespace punchdet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::degenerate_box: return "degenerate-box";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::unsupported_format: return "unsupported-format";
    case ErrorCode::out_of_bounds_frame: return "out-of-bounds-frame";
    case ErrorCode::image_too_small: return "image-too-small";
    case ErrorCode::insufficient_annotated_area: return "insufficient-annotated-area";
    case ErrorCode::unknown_frame_index: return "unknown-frame-index";
    case ErrorCode::backend_failure: return "backend-failure";
    case ErrorCode::manifest_mismatch: return "manifest-mismatch";
    case ErrorCode::schema_violation: return "schema-violation";
    case ErrorCode::input_too_large: return "input-too-large";
    case ErrorCode::class_absent: return "class-absent";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace punchdet
