#include "punchdet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "punchdet/error.hpp"

namespace punchdet {

namespace {

void check_backend_output(const std::vector<Detection>& dets, const FramePlan& plan,
                          std::int64_t frame_index) {
  const auto tile = static_cast<double>(plan.tile);
  for (const auto& d : dets) {
    const auto& b = d.box;
    const bool inside = is_valid(b) && b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= tile &&
                        b.y_max <= tile;
    if (!inside || !(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw Error(ErrorCode::backend_failure, "frame " + std::to_string(frame_index) +
                                                  ": detection outside the tile or with "
                                                  "confidence outside [0, 1]");
    }
  }
}

}  // namespace

std::vector<Detection> merge_windows(const PerFrameDetections& per_frame, const FramePlan& plan) {
  const BoundingBox image{0.0, 0.0, static_cast<double>(plan.image_width),
                          static_cast<double>(plan.image_height)};
  std::vector<Detection> out;
  for (const auto& [index, dets] : per_frame) {
    if (index < 0 || index >= static_cast<std::int64_t>(plan.size())) {
      throw Error(ErrorCode::unknown_frame_index,
                  "frame " + std::to_string(index) + " is not in the plan");
    }
    const Frame& frame = plan.frames[static_cast<std::size_t>(index)];
    for (const auto& d : dets) {
      const auto clipped = intersection(plan.local_to_global(d.box, frame), image);
      if (!clipped) continue;
      out.push_back({*clipped, d.class_id, d.confidence});
    }
  }
  return out;
}

PixelBuffer read_frame_pixels(const ImageSource& src, const FramePlan& plan, const Frame& frame) {
  if (!frame.padded) return src.read_crop(frame.origin.x, frame.origin.y, plan.tile, plan.tile);
  const std::int64_t w = std::min(plan.tile, src.width());
  const std::int64_t h = std::min(plan.tile, src.height());
  const PixelBuffer real = src.read_crop(frame.origin.x, frame.origin.y, w, h);
  PixelBuffer out(plan.tile, plan.tile);
  for (std::int64_t row = 0; row < h; ++row) {
    std::memcpy(out.pixel(frame.pad_x, frame.pad_y + row), real.pixel(0, row),
                static_cast<std::size_t>(w * 3));
  }
  return out;
}

PerFrameDetections run_backend(const ImageSource* src, const FramePlan& plan,
                               DetectorBackend& backend, const RunOptions& options) {
  if (backend.needs_pixels() && src == nullptr) {
    throw Error(ErrorCode::invalid_argument, "backend '" + backend.name() + "' needs pixels");
  }
  std::vector<std::int64_t> order = options.frame_order;
  if (order.empty()) {
    for (const auto& f : plan.frames) order.push_back(f.index);
  }
  {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != static_cast<std::int64_t>(i) || sorted.size() != plan.size()) {
        throw Error(ErrorCode::invalid_argument, "frame order must be a permutation of the plan");
      }
    }
  }

  std::vector<std::vector<Detection>> results(plan.size());
  std::vector<std::optional<std::string>> failures(plan.size());
  std::mutex serial;
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      const auto index = static_cast<std::size_t>(order[k]);
      const Frame& frame = plan.frames[index];
      try {
        std::optional<PixelBuffer> pixels;
        if (backend.needs_pixels()) pixels = read_frame_pixels(*src, plan, frame);
        FrameContext ctx{plan, frame, pixels ? &*pixels : nullptr};
        std::vector<Detection> dets;
        if (backend.concurrent_safe()) {
          dets = backend.detect(ctx);
        } else {
          std::lock_guard lock(serial);
          dets = backend.detect(ctx);
        }
        check_backend_output(dets, plan, frame.index);
        results[index] = std::move(dets);
      } catch (const std::exception& e) {
        failures[index] = e.what();
      }
    }
  };

  const int jobs = std::clamp(options.jobs, 1, std::max(1, static_cast<int>(order.size())));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (failures[i]) {
      throw Error(ErrorCode::backend_failure, "frame " + std::to_string(i) + ": " + *failures[i]);
    }
  }
  PerFrameDetections out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out[static_cast<std::int64_t>(i)] = std::move(results[i]);
  }
  return out;
}

MergedResult merge_and_suppress(const PerFrameDetections& per_frame, const FramePlan& plan,
                                const NmsConfig& nms) {
  MergedResult result;
  result.image_id = plan.image_id;
  result.nms = nms;
  result.plan = plan;
  result.before_nms = merge_windows(per_frame, plan);
  sort_canonical(result.before_nms);
  result.after_nms = custom_nms(result.before_nms, nms);
  return result;
}

MergedResult infer_large_image(const ImageSource& src, DetectorBackend& backend,
                               const TilingConfig& tiling, const NmsConfig& nms,
                               const RunOptions& options) {
  nms.validate();
  const FramePlan plan = plan_frames(src.width(), src.height(), tiling, src.image_id());
  const PerFrameDetections per_frame = run_backend(&src, plan, backend, options);
  return merge_and_suppress(per_frame, plan, nms);
}

}  // namespace punchdet
