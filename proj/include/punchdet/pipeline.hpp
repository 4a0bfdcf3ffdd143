#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "punchdet/backends.hpp"
#include "punchdet/nms.hpp"
#include "punchdet/tiler.hpp"

namespace punchdet {

struct MergedResult {
  std::string image_id;
  std::vector<Detection> before_nms;  // canonical order
  std::vector<Detection> after_nms;   // canonical order
  NmsConfig nms;
  FramePlan plan;
};

/// Translates every frame's detections to global coordinates (frame index
/// order), clipping to the image and dropping boxes left with no area.
/// Throws Error(unknown_frame_index) for indices outside the plan.
std::vector<Detection> merge_windows(const PerFrameDetections& per_frame, const FramePlan& plan);

/// Crop for one frame, zero-padded where the image is smaller than the tile.
PixelBuffer read_frame_pixels(const ImageSource& src, const FramePlan& plan, const Frame& frame);

struct RunOptions {
  int jobs = 1;
  // Processing order for the frames; empty means index order. Results never
  // depend on it.
  std::vector<std::int64_t> frame_order;
};

/// Runs the backend over every frame of the plan. src may be null when the
/// backend does not need pixels. Failures surface as Error(backend_failure)
/// naming the lowest failing frame index.
PerFrameDetections run_backend(const ImageSource* src, const FramePlan& plan,
                               DetectorBackend& backend, const RunOptions& options = {});

/// Merge, then custom NMS; keeps both lists.
MergedResult merge_and_suppress(const PerFrameDetections& per_frame, const FramePlan& plan,
                                const NmsConfig& nms);

MergedResult infer_large_image(const ImageSource& src, DetectorBackend& backend,
                               const TilingConfig& tiling, const NmsConfig& nms,
                               const RunOptions& options = {});

}  // namespace punchdet
