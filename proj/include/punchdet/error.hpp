#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace punchdet {

enum class ErrorCode {
  invalid_argument,
  undefined_ratio,
  degenerate_box,
  io_failure,
  unsupported_format,
  out_of_bounds_frame,
  image_too_small,
  insufficient_annotated_area,
  unknown_frame_index,
  backend_failure,
  manifest_mismatch,
  schema_violation,
  input_too_large,
  class_absent,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can branch on the kind of error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace punchdet
