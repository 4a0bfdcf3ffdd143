#include "punchdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "punchdet/error.hpp"

namespace punchdet {

bool is_valid(const BoundingBox& b) noexcept {
  return std::isfinite(b.x_min) && std::isfinite(b.y_min) && std::isfinite(b.x_max) &&
         std::isfinite(b.y_max) && b.x_min <= b.x_max && b.y_min <= b.y_max;
}

void require_valid(const BoundingBox& b) {
  if (!is_valid(b)) {
    std::ostringstream os;
    os << "invalid box [" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max
       << "]";
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

double area(const BoundingBox& b) {
  require_valid(b);
  return (b.x_max - b.x_min) * (b.y_max - b.y_min);
}

std::optional<BoundingBox> intersection(const BoundingBox& a, const BoundingBox& b) noexcept {
  BoundingBox r{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min),
                std::min(a.x_max, b.x_max), std::min(a.y_max, b.y_max)};
  if (r.x_min >= r.x_max || r.y_min >= r.y_max) return std::nullopt;
  return r;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double area_a = area(a);
  const double area_b = area(b);
  if (area_a <= 0.0 && area_b <= 0.0) {
    throw Error(ErrorCode::undefined_ratio, "IoU of two zero-area boxes");
  }
  if (area_a <= 0.0 || area_b <= 0.0) {
    throw Error(ErrorCode::degenerate_box, "IoU with a zero-area box");
  }
  const double inter = intersection_area(a, b);
  return inter / (area_a + area_b - inter);
}

double iom(const BoundingBox& a, const BoundingBox& b) {
  const double smaller = std::min(area(a), area(b));
  if (smaller <= 0.0) {
    throw Error(ErrorCode::undefined_ratio, "IoM with a zero-area box");
  }
  return intersection_area(a, b) / smaller;
}

bool contains(const BoundingBox& outer, const BoundingBox& inner) noexcept {
  return inner.x_min >= outer.x_min && inner.y_min >= outer.y_min &&
         inner.x_max <= outer.x_max && inner.y_max <= outer.y_max;
}

BoundingBox translate(const BoundingBox& b, double dx, double dy) noexcept {
  return {b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
}

BoundingBox to_global(const BoundingBox& b, FrameOrigin origin) noexcept {
  return translate(b, static_cast<double>(origin.x), static_cast<double>(origin.y));
}

BoundingBox to_local(const BoundingBox& b, FrameOrigin origin) noexcept {
  return translate(b, -static_cast<double>(origin.x), -static_cast<double>(origin.y));
}

}  // namespace punchdet
