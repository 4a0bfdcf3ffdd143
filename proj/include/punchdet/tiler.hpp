#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "punchdet/geometry.hpp"

namespace punchdet {

/// Sliding-window geometry. Overlap 324 px is the largest ground-truth box side,
/// so any instance up to that size fits wholly inside some window.
struct TilingConfig {
  std::int64_t tile = 1088;
  std::int64_t overlap = 324;

  std::int64_t stride() const noexcept { return tile - overlap; }
  void validate() const;
};

/// One window of a plan. pad_x/pad_y are non-zero only on an axis where the
/// image is shorter than the tile; the image then sits centred in the window
/// and frame-local coordinate u maps to global u + x - pad_x.
struct Frame {
  std::int64_t index = 0;
  FrameOrigin origin;
  bool padded = false;
  std::int64_t pad_x = 0;
  std::int64_t pad_y = 0;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct FramePlan {
  std::string image_id;
  std::int64_t image_width = 0;
  std::int64_t image_height = 0;
  std::int64_t tile = 0;
  std::int64_t columns = 0;
  std::int64_t rows = 0;
  std::vector<Frame> frames;  // row-major

  std::size_t size() const noexcept { return frames.size(); }

  /// Global-space rectangle covered by real image pixels of a frame.
  BoundingBox frame_box(const Frame& f) const noexcept;

  /// Frame-local box to global coordinates, honouring padding.
  BoundingBox local_to_global(const BoundingBox& local, const Frame& f) const noexcept;

  friend bool operator==(const FramePlan&, const FramePlan&) = default;
};

/// Window origins along one axis: k*stride, with the final one clamped to
/// length - tile. A single origin 0 when length <= tile.
std::vector<std::int64_t> axis_origins(std::int64_t length, const TilingConfig& cfg);

/// Closed-form per-axis window count.
std::int64_t axis_frame_count(std::int64_t length, const TilingConfig& cfg);

FramePlan plan_frames(std::int64_t width, std::int64_t height, const TilingConfig& cfg = {},
                      std::string image_id = {});

/// Indices of every frame that wholly contains b (global coordinates).
std::vector<std::int64_t> frames_covering(const FramePlan& plan, const BoundingBox& b);

}  // namespace punchdet
