#pragma once

// Overlap-ratio kernels over structure-of-arrays box columns.
//
// Every ISA variant evaluates the same operation sequence (no FMA contraction,
// same min/max operand order), so results are bit-identical to the scalar
// reference. The equivalence tests rely on that.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "punchdet/geometry.hpp"

namespace punchdet::simd {

enum class Isa { scalar, avx2, neon };

enum class Overlap { iou, iom };

std::string_view to_string(Isa isa) noexcept;

/// Column-major storage for a batch of boxes.
class BoxColumns {
 public:
  BoxColumns() = default;
  explicit BoxColumns(std::span<const BoundingBox> boxes);

  void reserve(std::size_t n);
  void push_back(const BoundingBox& b);
  std::size_t size() const noexcept { return x_min_.size(); }
  bool empty() const noexcept { return x_min_.empty(); }

  const double* x_min() const noexcept { return x_min_.data(); }
  const double* y_min() const noexcept { return y_min_.data(); }
  const double* x_max() const noexcept { return x_max_.data(); }
  const double* y_max() const noexcept { return y_max_.data(); }
  const double* area() const noexcept { return area_.data(); }

 private:
  std::vector<double> x_min_, y_min_, x_max_, y_max_, area_;
};

/// Read-only window over a contiguous range of BoxColumns.
struct ColumnsView {
  const double* x_min = nullptr;
  const double* y_min = nullptr;
  const double* x_max = nullptr;
  const double* y_max = nullptr;
  const double* area = nullptr;
  std::size_t size = 0;

  static ColumnsView of(const BoxColumns& c, std::size_t first = 0);
};

// Per-ISA entry points. out.size() must equal others.size. All areas must be
// positive; callers validate before invoking a kernel.
void overlap_row_scalar(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                        std::span<double> out) noexcept;
#if defined(__x86_64__) || defined(_M_X64)
void overlap_row_avx2(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                      std::span<double> out) noexcept;
#endif
#if defined(__aarch64__)
void overlap_row_neon(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                      std::span<double> out) noexcept;
#endif

/// Whether the running CPU (and this build) can execute the given ISA.
bool isa_available(Isa isa) noexcept;

/// ISA picked at first use: best available, unless PUNCHDET_SIMD=scalar|avx2|neon
/// names an available one.
Isa active_isa() noexcept;

/// Overrides the runtime choice; nullopt restores automatic selection.
/// Throws Error(invalid_argument) for an unavailable ISA.
void force_isa(std::optional<Isa> isa);

/// Dispatches to the active ISA.
void overlap_row(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                 std::span<double> out) noexcept;

}  // namespace punchdet::simd
