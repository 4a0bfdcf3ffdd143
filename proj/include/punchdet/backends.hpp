#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "punchdet/detection.hpp"
#include "punchdet/formats.hpp"
#include "punchdet/image_store.hpp"
#include "punchdet/tiler.hpp"

namespace punchdet {

/// What a backend sees for one window. pixels is null unless the backend asked
/// for them through needs_pixels().
struct FrameContext {
  const FramePlan& plan;
  const Frame& frame;
  const PixelBuffer* pixels = nullptr;
};

// Produces frame-local detections for one window. Returned boxes must lie in
// [0, tile]^2 with confidences in [0, 1]; the pipeline rejects anything else.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;

  virtual std::vector<Detection> detect(const FrameContext& ctx) = 0;

  virtual bool needs_pixels() const noexcept { return false; }
  /// False means the pipeline serialises detect() calls.
  virtual bool concurrent_safe() const noexcept { return true; }
  virtual std::string name() const = 0;
};

/// Replays per-frame detections recorded against a frame manifest.
class OracleBackend final : public DetectorBackend {
 public:
  /// Throws Error(manifest_mismatch) when the file was produced against a
  /// different manifest or names frames the plan does not have.
  OracleBackend(FrameDetectionsFile recorded, const FramePlan& plan,
                const std::string& manifest_hash);

  std::vector<Detection> detect(const FrameContext& ctx) override;
  std::string name() const override { return "oracle"; }

  /// Stored records of one frame (empty when none were recorded).
  const std::vector<Detection>& stored(std::int64_t frame_index) const;

 private:
  PerFrameDetections per_frame_;
  std::int64_t frame_count_ = 0;
};

struct SyntheticScenario {
  std::uint64_t seed = 0;
  std::vector<Annotation> ground_truth;  // global coordinates, one image
  double fn_rate = 0.0;
  std::map<ClassId, double> fn_rate_by_class;  // overrides fn_rate
  double fp_rate = 0.0;  // mean of the Poisson false-positive count per frame
  double jitter = 0.0;   // max absolute per-coordinate offset, pixels
  double tp_confidence_mean = 0.9;
  double tp_confidence_sd = 0.05;
  double fp_confidence_mean = 0.6;
  double fp_confidence_sd = 0.15;

  void validate() const;
  double miss_rate(ClassId cls) const;
};

struct SyntheticOutput {
  PerFrameDetections per_frame;
  std::vector<Annotation> ground_truth;  // instances of the plan's image
};

/// Noisy detections for one frame. Every ground-truth instance wholly inside
/// the frame is reported, jittered, with probability 1 - miss rate; false
/// positives follow a Poisson count with sides drawn from the ground truth.
/// The RNG stream is derived from (seed, image id, frame index).
std::vector<Detection> synthesize_frame(const SyntheticScenario& scenario, const FramePlan& plan,
                                        const Frame& frame);

SyntheticOutput synthesize_detections(const SyntheticScenario& scenario, const FramePlan& plan);

class SyntheticBackend final : public DetectorBackend {
 public:
  explicit SyntheticBackend(SyntheticScenario scenario);

  std::vector<Detection> detect(const FrameContext& ctx) override;
  std::string name() const override { return "synthetic"; }

 private:
  SyntheticScenario scenario_;
};

}  // namespace punchdet
