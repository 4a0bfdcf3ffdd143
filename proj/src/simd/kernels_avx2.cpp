#include <immintrin.h>

#include "punchdet/simd/kernels.hpp"

namespace punchdet::simd {

void overlap_row_avx2(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                      std::span<double> out) noexcept {
  const double pivot_area = (pivot.x_max - pivot.x_min) * (pivot.y_max - pivot.y_min);
  const __m256d px0 = _mm256_set1_pd(pivot.x_min);
  const __m256d py0 = _mm256_set1_pd(pivot.y_min);
  const __m256d px1 = _mm256_set1_pd(pivot.x_max);
  const __m256d py1 = _mm256_set1_pd(pivot.y_max);
  const __m256d pa = _mm256_set1_pd(pivot_area);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t j = 0;
  const std::size_t n = others.size;
  for (; j + 4 <= n; j += 4) {
    const __m256d x0 = _mm256_loadu_pd(others.x_min + j);
    const __m256d y0 = _mm256_loadu_pd(others.y_min + j);
    const __m256d x1 = _mm256_loadu_pd(others.x_max + j);
    const __m256d y1 = _mm256_loadu_pd(others.y_max + j);
    const __m256d a = _mm256_loadu_pd(others.area + j);

    __m256d w = _mm256_sub_pd(_mm256_min_pd(px1, x1), _mm256_max_pd(px0, x0));
    __m256d h = _mm256_sub_pd(_mm256_min_pd(py1, y1), _mm256_max_pd(py0, y0));
    w = _mm256_max_pd(w, zero);
    h = _mm256_max_pd(h, zero);
    const __m256d inter = _mm256_mul_pd(w, h);
    const __m256d denom = kind == Overlap::iom ? _mm256_min_pd(pa, a)
                                               : _mm256_sub_pd(_mm256_add_pd(pa, a), inter);
    _mm256_storeu_pd(out.data() + j, _mm256_div_pd(inter, denom));
  }
  if (j < n) {
    ColumnsView tail{others.x_min + j, others.y_min + j, others.x_max + j,
                     others.y_max + j, others.area + j, n - j};
    overlap_row_scalar(pivot, tail, kind, out.subspan(j));
  }
}

}  // namespace punchdet::simd
