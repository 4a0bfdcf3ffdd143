#pragma once

#include <cstdint>
#include <optional>

namespace punchdet {

// Axis-aligned box in continuous pixel coordinates. Origin top-left, y down.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Top-left corner of a window in global image space.
struct FrameOrigin {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const FrameOrigin&, const FrameOrigin&) = default;
};

/// True when min <= max on both axes and every coordinate is finite.
bool is_valid(const BoundingBox& b) noexcept;

/// Throws Error(invalid_argument) for inverted or non-finite boxes.
void require_valid(const BoundingBox& b);

double area(const BoundingBox& b);

/// Overlap rectangle, or nullopt when the boxes do not overlap with positive area.
std::optional<BoundingBox> intersection(const BoundingBox& a, const BoundingBox& b) noexcept;

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Intersection over union. Throws Error(undefined_ratio) when both areas are zero
/// and Error(degenerate_box) when only one of them is.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Intersection over the smaller of the two areas. Equals 1 for nested boxes.
/// Throws Error(undefined_ratio) when the smaller area is zero.
double iom(const BoundingBox& a, const BoundingBox& b);

/// Inner contains outer, boundaries inclusive.
bool contains(const BoundingBox& outer, const BoundingBox& inner) noexcept;

BoundingBox translate(const BoundingBox& b, double dx, double dy) noexcept;
BoundingBox to_global(const BoundingBox& b, FrameOrigin origin) noexcept;
BoundingBox to_local(const BoundingBox& b, FrameOrigin origin) noexcept;

}  // namespace punchdet
