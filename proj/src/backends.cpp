#include "punchdet/backends.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "punchdet/error.hpp"

namespace punchdet {

namespace {

void require_rate(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must lie in [0, 1]");
  }
}

double clamped_gaussian(std::mt19937_64& rng, double mean, double sd) {
  if (sd <= 0.0) return std::clamp(mean, 0.0, 1.0);
  return std::clamp(std::normal_distribution<double>(mean, sd)(rng), 0.0, 1.0);
}

std::mt19937_64 frame_stream(std::uint64_t seed, const std::string& image_id,
                             std::int64_t frame_index) {
  std::vector<std::uint32_t> material{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(frame_index),
      static_cast<std::uint32_t>(static_cast<std::uint64_t>(frame_index) >> 32)};
  for (unsigned char c : image_id) material.push_back(c);
  std::seed_seq seq(material.begin(), material.end());
  return std::mt19937_64(seq);
}

}  // namespace

OracleBackend::OracleBackend(FrameDetectionsFile recorded, const FramePlan& plan,
                             const std::string& manifest_hash)
    : per_frame_(std::move(recorded.per_frame)),
      frame_count_(static_cast<std::int64_t>(plan.size())) {
  if (recorded.manifest_hash != manifest_hash) {
    throw Error(ErrorCode::manifest_mismatch, "detections were produced against manifest " +
                                                  recorded.manifest_hash + ", expected " +
                                                  manifest_hash);
  }
  if (recorded.frame_count != frame_count_) {
    throw Error(ErrorCode::manifest_mismatch,
                "detections cover " + std::to_string(recorded.frame_count) +
                    " frames, plan has " + std::to_string(frame_count_));
  }
  for (const auto& [index, dets] : per_frame_) {
    if (index < 0 || index >= frame_count_) {
      throw Error(ErrorCode::manifest_mismatch,
                  "frame index " + std::to_string(index) + " is not in the plan");
    }
  }
}

const std::vector<Detection>& OracleBackend::stored(std::int64_t frame_index) const {
  static const std::vector<Detection> kNone;
  const auto it = per_frame_.find(frame_index);
  return it == per_frame_.end() ? kNone : it->second;
}

std::vector<Detection> OracleBackend::detect(const FrameContext& ctx) {
  if (ctx.frame.index < 0 || ctx.frame.index >= frame_count_) {
    throw Error(ErrorCode::manifest_mismatch,
                "frame index " + std::to_string(ctx.frame.index) + " is not in the recording");
  }
  return stored(ctx.frame.index);
}

void SyntheticScenario::validate() const {
  require_rate(fn_rate, "false-negative rate");
  for (const auto& [cls, r] : fn_rate_by_class) require_rate(r, "per-class false-negative rate");
  require_rate(fp_rate, "false-positive rate");
  if (!(jitter >= 0.0)) throw Error(ErrorCode::invalid_argument, "jitter must be >= 0");
  if (tp_confidence_sd < 0.0 || fp_confidence_sd < 0.0) {
    throw Error(ErrorCode::invalid_argument, "confidence spread must be >= 0");
  }
}

double SyntheticScenario::miss_rate(ClassId cls) const {
  const auto it = fn_rate_by_class.find(cls);
  return it == fn_rate_by_class.end() ? fn_rate : it->second;
}

std::vector<Detection> synthesize_frame(const SyntheticScenario& scenario, const FramePlan& plan,
                                        const Frame& frame) {
  std::mt19937_64 rng = frame_stream(scenario.seed, plan.image_id, frame.index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const BoundingBox window = plan.frame_box(frame);
  const double shift_x = static_cast<double>(frame.origin.x - frame.pad_x);
  const double shift_y = static_cast<double>(frame.origin.y - frame.pad_y);
  const auto tile = static_cast<double>(plan.tile);

  std::vector<Detection> out;
  for (const auto& gt : scenario.ground_truth) {
    if (gt.image_id != plan.image_id || !contains(window, gt.box)) continue;
    // Draw in a fixed order so the stream does not depend on outcomes.
    const double miss = unit(rng);
    double offsets[4];
    for (double& o : offsets) o = scenario.jitter > 0.0 ? (2.0 * unit(rng) - 1.0) * scenario.jitter : 0.0;
    const double confidence =
        clamped_gaussian(rng, scenario.tp_confidence_mean, scenario.tp_confidence_sd);
    if (miss < scenario.miss_rate(gt.class_id)) continue;

    const BoundingBox local = translate(gt.box, -shift_x, -shift_y);
    BoundingBox b{std::clamp(local.x_min + offsets[0], 0.0, tile),
                  std::clamp(local.y_min + offsets[1], 0.0, tile),
                  std::clamp(local.x_max + offsets[2], 0.0, tile),
                  std::clamp(local.y_max + offsets[3], 0.0, tile)};
    if (b.x_max <= b.x_min || b.y_max <= b.y_min) b = local;
    out.push_back({b, gt.class_id, confidence});
  }

  if (scenario.fp_rate > 0.0) {
    std::vector<ClassId> classes;
    for (const auto& gt : scenario.ground_truth) classes.push_back(gt.class_id);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    const double real_w = window.width();
    const double real_h = window.height();
    const int count = std::poisson_distribution<int>(scenario.fp_rate)(rng);
    for (int k = 0; k < count; ++k) {
      double w = tile / 10.0;
      double h = tile / 10.0;
      if (!scenario.ground_truth.empty()) {
        const auto& sample = scenario.ground_truth[std::uniform_int_distribution<std::size_t>(
            0, scenario.ground_truth.size() - 1)(rng)];
        w = sample.box.width();
        h = sample.box.height();
      }
      w = std::clamp(w, 1.0, real_w);
      h = std::clamp(h, 1.0, real_h);
      const double x = static_cast<double>(frame.pad_x) + unit(rng) * (real_w - w);
      const double y = static_cast<double>(frame.pad_y) + unit(rng) * (real_h - h);
      const ClassId cls =
          classes.empty()
              ? 0
              : classes[std::uniform_int_distribution<std::size_t>(0, classes.size() - 1)(rng)];
      const double confidence =
          clamped_gaussian(rng, scenario.fp_confidence_mean, scenario.fp_confidence_sd);
      out.push_back({{x, y, x + w, y + h}, cls, confidence});
    }
  }
  return out;
}

SyntheticOutput synthesize_detections(const SyntheticScenario& scenario, const FramePlan& plan) {
  scenario.validate();
  SyntheticOutput out;
  for (const auto& f : plan.frames) out.per_frame[f.index] = synthesize_frame(scenario, plan, f);
  for (const auto& gt : scenario.ground_truth) {
    if (gt.image_id == plan.image_id) out.ground_truth.push_back(gt);
  }
  return out;
}

SyntheticBackend::SyntheticBackend(SyntheticScenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
}

std::vector<Detection> SyntheticBackend::detect(const FrameContext& ctx) {
  return synthesize_frame(scenario_, ctx.plan, ctx.frame);
}

}  // namespace punchdet
