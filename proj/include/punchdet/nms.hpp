#pragma once

#include <span>
#include <vector>

#include "punchdet/detection.hpp"

namespace punchdet {

struct NmsConfig {
  double iom_threshold = 0.7;         // t
  double confidence_threshold = 0.75; // c*

  void validate() const;
};

/// Detections with confidence >= c_star, in input order.
std::vector<Detection> filter_confidence(std::span<const Detection> dets, double c_star);

/// Symmetric IoM matrix, row-major n*n, unit diagonal.
/// Throws Error(degenerate_box) if any box has zero area.
std::vector<double> pairwise_iom(std::span<const BoundingBox> boxes);

/// Strict weak order used everywhere a deterministic order of detections is
/// needed: larger area first, then higher confidence, then ascending
/// (x_min, y_min, x_max, y_max, class_id).
bool canonical_less(const Detection& a, const Detection& b) noexcept;

void sort_canonical(std::vector<Detection>& dets);

/// Confidence filter followed by same-class IoM coalescing that keeps the
/// largest box of each group. Output is in canonical order.
///
/// Survivors are visited in canonical order. A detection that is still alive
/// pulls every later live same-class detection whose IoM with it is >= t into
/// its group and removes them; being first in canonical order it is the group's
/// largest member. Grouping is against the pivot only, never transitive.
/// Thresholds above 1 disable grouping.
std::vector<Detection> custom_nms(std::span<const Detection> dets, const NmsConfig& cfg);

}  // namespace punchdet
