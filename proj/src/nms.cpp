#include "punchdet/nms.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>

#include "punchdet/error.hpp"
#include "punchdet/simd/kernels.hpp"

namespace punchdet {

namespace {

void require_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

void require_positive_area(const BoundingBox& b) {
  if (!is_valid(b) || b.x_max <= b.x_min || b.y_max <= b.y_min) {
    throw Error(ErrorCode::degenerate_box, "detection box has zero area");
  }
}

double box_area(const BoundingBox& b) noexcept {
  return (b.x_max - b.x_min) * (b.y_max - b.y_min);
}

}  // namespace

void NmsConfig::validate() const {
  require_unit_interval(confidence_threshold, "confidence threshold");
  // t > 1 is accepted and means "never group".
  if (!(iom_threshold >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "IoM threshold must be >= 0");
  }
}

std::vector<Detection> filter_confidence(std::span<const Detection> dets, double c_star) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [c_star](const Detection& d) { return d.confidence >= c_star; });
  return out;
}

std::vector<double> pairwise_iom(std::span<const BoundingBox> boxes) {
  for (const auto& b : boxes) require_positive_area(b);
  const std::size_t n = boxes.size();
  const simd::BoxColumns columns(boxes);
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    simd::overlap_row(boxes[i], simd::ColumnsView::of(columns), simd::Overlap::iom,
                      std::span<double>(m.data() + i * n, n));
    m[i * n + i] = 1.0;
  }
  return m;
}

bool canonical_less(const Detection& a, const Detection& b) noexcept {
  const double area_a = box_area(a.box);
  const double area_b = box_area(b.box);
  if (area_a != area_b) return area_a > area_b;
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return std::tie(a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max, a.class_id) <
         std::tie(b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max, b.class_id);
}

void sort_canonical(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), canonical_less);
}

std::vector<Detection> custom_nms(std::span<const Detection> dets, const NmsConfig& cfg) {
  cfg.validate();
  std::vector<Detection> survivors = filter_confidence(dets, cfg.confidence_threshold);
  for (const auto& d : survivors) require_positive_area(d.box);
  sort_canonical(survivors);

  // Classes never interact, so each class is coalesced over its own columns.
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    by_class[survivors[i].class_id].push_back(i);
  }

  std::vector<char> removed(survivors.size(), 0);
  std::vector<double> row;
  for (const auto& [cls, members] : by_class) {
    simd::BoxColumns columns;
    columns.reserve(members.size());
    for (std::size_t idx : members) columns.push_back(survivors[idx].box);

    for (std::size_t a = 0; a < members.size(); ++a) {
      if (removed[members[a]]) continue;
      const std::size_t rest = members.size() - a - 1;
      if (rest == 0) break;
      row.resize(rest);
      simd::overlap_row(survivors[members[a]].box, simd::ColumnsView::of(columns, a + 1),
                        simd::Overlap::iom, row);
      for (std::size_t k = 0; k < rest; ++k) {
        if (row[k] >= cfg.iom_threshold) removed[members[a + 1 + k]] = 1;
      }
    }
  }

  std::vector<Detection> kept;
  kept.reserve(survivors.size());
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (!removed[i]) kept.push_back(survivors[i]);
  }
  return kept;
}

}  // namespace punchdet
