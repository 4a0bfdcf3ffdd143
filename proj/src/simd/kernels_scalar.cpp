#include "punchdet/simd/kernels.hpp"

namespace punchdet::simd {

namespace {

// Operand order mirrors _mm256_min_pd / _mm256_max_pd so both paths agree
// on signed zeros.
inline double vmin(double a, double b) noexcept { return a < b ? a : b; }
inline double vmax(double a, double b) noexcept { return a > b ? a : b; }

}  // namespace

BoxColumns::BoxColumns(std::span<const BoundingBox> boxes) {
  reserve(boxes.size());
  for (const auto& b : boxes) push_back(b);
}

void BoxColumns::reserve(std::size_t n) {
  x_min_.reserve(n);
  y_min_.reserve(n);
  x_max_.reserve(n);
  y_max_.reserve(n);
  area_.reserve(n);
}

void BoxColumns::push_back(const BoundingBox& b) {
  x_min_.push_back(b.x_min);
  y_min_.push_back(b.y_min);
  x_max_.push_back(b.x_max);
  y_max_.push_back(b.y_max);
  area_.push_back((b.x_max - b.x_min) * (b.y_max - b.y_min));
}

ColumnsView ColumnsView::of(const BoxColumns& c, std::size_t first) {
  if (first > c.size()) first = c.size();
  return {c.x_min() + first, c.y_min() + first, c.x_max() + first,
          c.y_max() + first, c.area() + first, c.size() - first};
}

void overlap_row_scalar(const BoundingBox& pivot, ColumnsView others, Overlap kind,
                        std::span<double> out) noexcept {
  const double pivot_area = (pivot.x_max - pivot.x_min) * (pivot.y_max - pivot.y_min);
  for (std::size_t j = 0; j < others.size; ++j) {
    double w = vmin(pivot.x_max, others.x_max[j]) - vmax(pivot.x_min, others.x_min[j]);
    double h = vmin(pivot.y_max, others.y_max[j]) - vmax(pivot.y_min, others.y_min[j]);
    w = vmax(w, 0.0);
    h = vmax(h, 0.0);
    const double inter = w * h;
    const double denom = kind == Overlap::iom ? vmin(pivot_area, others.area[j])
                                              : (pivot_area + others.area[j]) - inter;
    out[j] = inter / denom;
  }
}

}  // namespace punchdet::simd
