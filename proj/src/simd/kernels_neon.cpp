#include <arm_neon.h>

#include "punchdet/simd/kernels.hpp"

namespace punchdet::simd {

// vminq_f64/vmaxq_f64 differ from the scalar reference only on NaN inputs,
// which valid boxes never produce.
void overlap_row_neon(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                      std::span<double> out) noexcept {
  const double pivot_area = (pivot.x_max - pivot.x_min) * (pivot.y_max - pivot.y_min);
  const float64x2_t px0 = vdupq_n_f64(pivot.x_min);
  const float64x2_t py0 = vdupq_n_f64(pivot.y_min);
  const float64x2_t px1 = vdupq_n_f64(pivot.x_max);
  const float64x2_t py1 = vdupq_n_f64(pivot.y_max);
  const float64x2_t pa = vdupq_n_f64(pivot_area);
  const float64x2_t zero = vdupq_n_f64(0.0);

  std::size_t j = 0;
  const std::size_t n = others.size;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t x0 = vld1q_f64(others.x_min + j);
    const float64x2_t y0 = vld1q_f64(others.y_min + j);
    const float64x2_t x1 = vld1q_f64(others.x_max + j);
    const float64x2_t y1 = vld1q_f64(others.y_max + j);
    const float64x2_t a = vld1q_f64(others.area + j);

    float64x2_t w = vsubq_f64(vminq_f64(px1, x1), vmaxq_f64(px0, x0));
    float64x2_t h = vsubq_f64(vminq_f64(py1, y1), vmaxq_f64(py0, y0));
    w = vmaxq_f64(w, zero);
    h = vmaxq_f64(h, zero);
    const float64x2_t inter = vmulq_f64(w, h);
    const float64x2_t denom =
        kind == Overlap::iom ? vminq_f64(pa, a) : vsubq_f64(vaddq_f64(pa, a), inter);
    vst1q_f64(out.data() + j, vdivq_f64(inter, denom));
  }
  if (j < n) {
    ColumnsView tail{others.x_min + j, others.y_min + j, others.x_max + j,
                     others.y_max + j, others.area + j, n - j};
    overlap_row_scalar(pivot, tail, kind, out.subspan(j));
  }
}

}  // namespace punchdet::simd
