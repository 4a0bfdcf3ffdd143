#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "punchdet/metrics.hpp"

namespace punchdet {

enum class Objective { map, map50, f1, precision, recall };

std::string_view to_string(Objective o) noexcept;
Objective objective_from_string(std::string_view s);

struct SweepSpec {
  double c_star_min = 0.5;
  double c_star_max = 0.8;
  double t_min = 0.5;
  double t_max = 0.95;
  double step = 0.05;
  Objective objective = Objective::map;
  // Upper end of the mAP IoU range; 0.95 by default, 0.90 for the .5:.9 variant.
  double map_iou_max = 0.95;
  MatchConfig match;

  void validate() const;
  std::vector<double> c_star_values() const;
  std::vector<double> t_values() const;
};

struct SweepPoint {
  double c_star = 0.0;
  double t = 0.0;
  double objective = 0.0;
};

/// Objective for one NMS configuration applied to the before-NMS detections.
double evaluate_objective(const DetectionsByImage& before_nms, std::span<const Annotation> gts,
                          const SweepSpec& spec, double c_star, double t);

/// Every grid point, best first; ties prefer higher c_star, then higher t.
/// Grid points are evaluated on up to `jobs` threads.
std::vector<SweepPoint> sweep(const DetectionsByImage& before_nms,
                              std::span<const Annotation> gts, const SweepSpec& spec,
                              int jobs = 1);

}  // namespace punchdet
