#include "punchdet/tiler.hpp"

#include <algorithm>
#include <string>

#include "punchdet/error.hpp"

namespace punchdet {

void TilingConfig::validate() const {
  if (tile < 1 || overlap < 0 || overlap >= tile) {
    throw Error(ErrorCode::invalid_argument, "tiling needs 0 <= overlap < tile, got tile " +
                                                 std::to_string(tile) + " overlap " +
                                                 std::to_string(overlap));
  }
}

std::int64_t axis_frame_count(std::int64_t length, const TilingConfig& cfg) {
  cfg.validate();
  if (length <= cfg.tile) return 1;
  const std::int64_t stride = cfg.stride();
  return (length - cfg.tile + stride - 1) / stride + 1;
}

std::vector<std::int64_t> axis_origins(std::int64_t length, const TilingConfig& cfg) {
  const std::int64_t n = axis_frame_count(length, cfg);
  std::vector<std::int64_t> origins;
  origins.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k + 1 < n; ++k) origins.push_back(k * cfg.stride());
  origins.push_back(std::max<std::int64_t>(length - cfg.tile, 0));
  return origins;
}

BoundingBox FramePlan::frame_box(const Frame& f) const noexcept {
  const auto x0 = static_cast<double>(f.origin.x);
  const auto y0 = static_cast<double>(f.origin.y);
  return {x0, y0, x0 + static_cast<double>(std::min(tile, image_width)),
          y0 + static_cast<double>(std::min(tile, image_height))};
}

BoundingBox FramePlan::local_to_global(const BoundingBox& local, const Frame& f) const noexcept {
  return translate(local, static_cast<double>(f.origin.x - f.pad_x),
                   static_cast<double>(f.origin.y - f.pad_y));
}

FramePlan plan_frames(std::int64_t width, std::int64_t height, const TilingConfig& cfg,
                      std::string image_id) {
  cfg.validate();
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
  }
  FramePlan plan;
  plan.image_id = std::move(image_id);
  plan.image_width = width;
  plan.image_height = height;
  plan.tile = cfg.tile;

  const auto xs = axis_origins(width, cfg);
  const auto ys = axis_origins(height, cfg);
  plan.columns = static_cast<std::int64_t>(xs.size());
  plan.rows = static_cast<std::int64_t>(ys.size());

  const std::int64_t pad_x = width < cfg.tile ? (cfg.tile - width) / 2 : 0;
  const std::int64_t pad_y = height < cfg.tile ? (cfg.tile - height) / 2 : 0;
  const bool padded = width < cfg.tile || height < cfg.tile;

  plan.frames.reserve(xs.size() * ys.size());
  for (std::int64_t y : ys) {
    for (std::int64_t x : xs) {
      plan.frames.push_back(Frame{static_cast<std::int64_t>(plan.frames.size()),
                                  FrameOrigin{x, y}, padded, pad_x, pad_y});
    }
  }
  return plan;
}

std::vector<std::int64_t> frames_covering(const FramePlan& plan, const BoundingBox& b) {
  std::vector<std::int64_t> out;
  for (const auto& f : plan.frames) {
    if (contains(plan.frame_box(f), b)) out.push_back(f.index);
  }
  return out;
}

}  // namespace punchdet
