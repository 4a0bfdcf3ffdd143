#include "punchdet/tune.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "punchdet/error.hpp"
#include "punchdet/nms.hpp"

namespace punchdet {

namespace {

// Grid values snapped to 1e-9 so 0.5 + 5 * 0.05 is exactly 0.75.
std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = std::round((lo + k * step) * 1e9) / 1e9;
    if (v > hi + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::string_view to_string(Objective o) noexcept {
  switch (o) {
    case Objective::map: return "map";
    case Objective::map50: return "map50";
    case Objective::f1: return "f1";
    case Objective::precision: return "precision";
    case Objective::recall: return "recall";
  }
  return "map";
}

Objective objective_from_string(std::string_view s) {
  for (Objective o : {Objective::map, Objective::map50, Objective::f1, Objective::precision,
                      Objective::recall}) {
    if (s == to_string(o)) return o;
  }
  throw Error(ErrorCode::invalid_argument, "unknown objective '" + std::string(s) + "'");
}

void SweepSpec::validate() const {
  const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(c_star_min) || !unit(c_star_max) || !unit(t_min) || !unit(t_max) ||
      c_star_min > c_star_max || t_min > t_max) {
    throw Error(ErrorCode::invalid_argument, "sweep ranges must be ordered and lie in [0, 1]");
  }
  if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "sweep step must be > 0");
  if (!(map_iou_max >= 0.5 && map_iou_max <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "mAP IoU upper bound must lie in [0.5, 1]");
  }
  match.validate();
}

std::vector<double> SweepSpec::c_star_values() const { return grid(c_star_min, c_star_max, step); }

std::vector<double> SweepSpec::t_values() const { return grid(t_min, t_max, step); }

double evaluate_objective(const DetectionsByImage& before_nms, std::span<const Annotation> gts,
                          const SweepSpec& spec, double c_star, double t) {
  const NmsConfig nms{t, c_star};
  DetectionsByImage after;
  for (const auto& [id, dets] : before_nms) after[id] = custom_nms(dets, nms);

  switch (spec.objective) {
    case Objective::map: {
      const auto taus = iou_threshold_range(0.5, spec.map_iou_max);
      return mean_average_precision(after, gts, taus);
    }
    case Objective::map50: {
      const double tau[] = {0.5};
      return mean_average_precision(after, gts, tau);
    }
    default:
      break;
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [cls, tally_row] : tally(after, gts, spec.match)) {
    tp += tally_row.tp;
    fp += tally_row.fp;
    fn += tally_row.fn;
  }
  const Scores s = precision_recall_f1(tp, fp, fn);
  switch (spec.objective) {
    case Objective::f1: return s.f1.value_or(0.0);
    case Objective::precision: return s.precision;
    case Objective::recall: return s.recall.value_or(0.0);
    default: return 0.0;
  }
}

std::vector<SweepPoint> sweep(const DetectionsByImage& before_nms,
                              std::span<const Annotation> gts, const SweepSpec& spec, int jobs) {
  spec.validate();
  std::vector<SweepPoint> points;
  for (double c : spec.c_star_values()) {
    for (double t : spec.t_values()) points.push_back({c, t, 0.0});
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(points.size());
  const auto work = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      try {
        points[k].objective =
            evaluate_objective(before_nms, gts, spec, points[k].c_star, points[k].t);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  jobs = std::clamp(jobs, 1, std::max(1, static_cast<int>(points.size())));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::stable_sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    if (a.c_star != b.c_star) return a.c_star > b.c_star;
    return a.t > b.t;
  });
  return points;
}

}  // namespace punchdet
