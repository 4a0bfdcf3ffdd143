#include "punchdet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "punchdet/error.hpp"
#include "punchdet/nms.hpp"
#include "punchdet/simd/kernels.hpp"

namespace punchdet {

namespace {

void require_positive_area(const BoundingBox& b, const char* what) {
  if (!is_valid(b) || b.x_max <= b.x_min || b.y_max <= b.y_min) {
    throw Error(ErrorCode::degenerate_box, std::string(what) + " box has zero area");
  }
}

bool by_confidence(const Detection& a, const Detection& b) noexcept {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return canonical_less(a, b);
}

// Ground truth of one image grouped by class, with SoA columns for the IoU kernel.
struct ClassTruth {
  std::vector<std::size_t> index;  // into the caller's ground-truth span
  simd::BoxColumns columns;
};

std::map<ClassId, ClassTruth> group_truth(std::span<const Annotation> gts) {
  std::map<ClassId, ClassTruth> out;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    require_positive_area(gts[g].box, "ground-truth");
    auto& t = out[gts[g].class_id];
    t.index.push_back(g);
    t.columns.push_back(gts[g].box);
  }
  return out;
}

// Claims the best unmatched ground truth for one prediction; returns the
// position inside `truth` or npos.
std::size_t claim(const Detection& pred, const ClassTruth& truth, std::vector<char>& taken,
                  double tau, std::vector<double>& row, double& best_iou) {
  row.resize(truth.index.size());
  simd::overlap_row(pred.box, simd::ColumnsView::of(truth.columns), simd::Overlap::iou, row);
  std::size_t best = static_cast<std::size_t>(-1);
  best_iou = -1.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (taken[k] || row[k] < tau) continue;
    if (row[k] > best_iou) {
      best_iou = row[k];
      best = k;
    }
  }
  if (best != static_cast<std::size_t>(-1)) taken[best] = 1;
  return best;
}

std::map<std::string, std::vector<Annotation>> truth_by_image(std::span<const Annotation> gts) {
  std::map<std::string, std::vector<Annotation>> out;
  for (const auto& a : gts) out[a.image_id].push_back(a);
  return out;
}

std::string fmt(std::optional<double> v, int precision = 4) {
  if (!v) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

std::string fmt_pct(std::optional<double> v) {
  if (!v) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v);
  return buf;
}

}  // namespace

void MatchConfig::validate() const {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "IoU threshold must lie in [0, 1]");
  }
}

MatchResult match(std::span<const Detection> preds, std::span<const Annotation> gts,
                  const MatchConfig& cfg) {
  cfg.validate();
  for (const auto& p : preds) require_positive_area(p.box, "prediction");
  auto truth = group_truth(gts);

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return by_confidence(preds[a], preds[b]);
  });

  std::map<ClassId, std::vector<char>> taken;
  for (const auto& [cls, t] : truth) taken[cls].assign(t.index.size(), 0);

  MatchResult result;
  std::vector<double> row;
  for (std::size_t p : order) {
    const auto it = truth.find(preds[p].class_id);
    if (it == truth.end()) {
      result.false_positives.push_back(p);
      continue;
    }
    double best_iou = 0.0;
    const std::size_t k = claim(preds[p], it->second, taken[it->first], cfg.iou_threshold, row,
                                best_iou);
    if (k == static_cast<std::size_t>(-1)) {
      result.false_positives.push_back(p);
    } else {
      result.pairs.push_back({p, it->second.index[k], best_iou});
    }
  }
  for (const auto& [cls, t] : truth) {
    const auto& flags = taken[cls];
    for (std::size_t k = 0; k < flags.size(); ++k) {
      if (!flags[k]) result.false_negatives.push_back(t.index[k]);
    }
  }
  std::sort(result.false_positives.begin(), result.false_positives.end());
  std::sort(result.false_negatives.begin(), result.false_negatives.end());
  return result;
}

double f1_score(double precision, double recall) noexcept {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

Scores precision_recall_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  Scores s;
  const std::size_t predicted = tp + fp;
  s.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  const std::size_t actual = tp + fn;
  if (actual > 0) {
    s.recall = static_cast<double>(tp) / static_cast<double>(actual);
    s.f1 = f1_score(s.precision, *s.recall);
  }
  return s;
}

Scores precision_recall_f1(const MatchResult& m) {
  return precision_recall_f1(m.tp(), m.fp(), m.fn());
}

std::optional<double> delta_percent(std::optional<double> before, std::optional<double> after) {
  if (!before || !after || *after == 0.0) return std::nullopt;
  return (*after - *before) / *after * 100.0;
}

std::map<ClassId, ClassTally> tally(const DetectionsByImage& preds,
                                    std::span<const Annotation> gts, const MatchConfig& cfg) {
  const auto truth = truth_by_image(gts);
  std::set<std::string> images;
  for (const auto& [id, dets] : preds) images.insert(id);
  for (const auto& [id, anns] : truth) images.insert(id);

  static const std::vector<Detection> kNoDetections;
  static const std::vector<Annotation> kNoTruth;
  std::map<ClassId, ClassTally> out;
  for (const auto& id : images) {
    const auto p = preds.find(id);
    const auto g = truth.find(id);
    const auto& dets = p == preds.end() ? kNoDetections : p->second;
    const auto& anns = g == truth.end() ? kNoTruth : g->second;
    const MatchResult m = match(dets, anns, cfg);
    for (const auto& d : dets) ++out[d.class_id].predictions;
    for (const auto& pair : m.pairs) ++out[dets[pair.prediction].class_id].tp;
    for (std::size_t i : m.false_positives) ++out[dets[i].class_id].fp;
    for (std::size_t i : m.false_negatives) ++out[anns[i].class_id].fn;
  }
  return out;
}

double average_precision(const DetectionsByImage& preds, std::span<const Annotation> gts,
                         const MatchConfig& cfg, ClassId class_id) {
  cfg.validate();
  std::map<std::string, ClassTruth> truth;
  std::size_t positives = 0;
  for (const auto& a : gts) {
    if (a.class_id != class_id) continue;
    require_positive_area(a.box, "ground-truth");
    auto& t = truth[a.image_id];
    t.index.push_back(t.index.size());
    t.columns.push_back(a.box);
    ++positives;
  }
  if (positives == 0) {
    throw Error(ErrorCode::class_absent,
                "class " + std::to_string(class_id) + " has no ground truth");
  }

  struct Ranked {
    const Detection* det;
    const std::string* image;
  };
  std::vector<Ranked> ranked;
  for (const auto& [id, dets] : preds) {
    for (const auto& d : dets) {
      if (d.class_id != class_id) continue;
      require_positive_area(d.box, "prediction");
      ranked.push_back({&d, &id});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (by_confidence(*a.det, *b.det)) return true;
    if (by_confidence(*b.det, *a.det)) return false;
    return *a.image < *b.image;
  });

  std::map<std::string, std::vector<char>> taken;
  for (const auto& [id, t] : truth) taken[id].assign(t.index.size(), 0);

  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  std::size_t tp = 0;
  std::vector<double> row;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto t = truth.find(*ranked[r].image);
    if (t != truth.end()) {
      double best_iou = 0.0;
      if (claim(*ranked[r].det, t->second, taken[t->first], cfg.iou_threshold, row, best_iou) !=
          static_cast<std::size_t>(-1)) {
        ++tp;
      }
    }
    precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
    recall[r] = static_cast<double>(tp) / static_cast<double>(positives);
  }
  // Interpolated precision: best precision at any equal-or-higher recall.
  for (std::size_t r = precision.size(); r-- > 1;) {
    precision[r - 1] = std::max(precision[r - 1], precision[r]);
  }

  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double level = static_cast<double>(k) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

std::vector<double> iou_threshold_range(double lo, double hi, double step) {
  if (!(step > 0.0) || lo > hi) {
    throw Error(ErrorCode::invalid_argument, "bad IoU threshold range");
  }
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = std::round((lo + k * step) * 1e9) / 1e9;
    if (v > hi + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

double mean_average_precision(const DetectionsByImage& preds, std::span<const Annotation> gts,
                              std::span<const double> iou_thresholds) {
  std::set<ClassId> classes;
  for (const auto& a : gts) classes.insert(a.class_id);
  if (classes.empty() || iou_thresholds.empty()) return 0.0;
  double sum = 0.0;
  for (ClassId cls : classes) {
    for (double tau : iou_thresholds) {
      sum += average_precision(preds, gts, MatchConfig{tau}, cls);
    }
  }
  return sum / static_cast<double>(classes.size() * iou_thresholds.size());
}

namespace {

ReportSide build_side(const DetectionsByImage& preds, std::span<const Annotation> gts,
                      const std::set<ClassId>& gt_classes, bool show_others,
                      const MatchConfig& cfg, const ReportOptions& options) {
  const auto tallies = tally(preds, gts, cfg);
  ReportSide side;
  ReportRow all;
  all.label = "ALL";
  ReportRow others;
  others.label = "others";

  double ap_sum = 0.0;
  for (ClassId cls : gt_classes) {
    ReportRow row;
    row.label = std::to_string(cls);
    row.class_id = cls;
    if (const auto it = tallies.find(cls); it != tallies.end()) {
      row.n = it->second.predictions;
      row.tp = it->second.tp;
      row.fp = it->second.fp;
      row.fn = it->second.fn;
    }
    row.scores = precision_recall_f1(row.tp, row.fp, row.fn);
    if (options.with_map) {
      double s = 0.0;
      for (double tau : options.map_thresholds) {
        s += average_precision(preds, gts, MatchConfig{tau}, cls);
      }
      row.ap = options.map_thresholds.empty()
                   ? 0.0
                   : s / static_cast<double>(options.map_thresholds.size());
      ap_sum += *row.ap;
    }
    side.rows.push_back(row);
  }
  for (const auto& [cls, t] : tallies) {
    if (gt_classes.contains(cls)) continue;
    others.n += t.predictions;
    others.fp += t.fp;
  }
  for (const auto& [cls, t] : tallies) {
    all.n += t.predictions;
    all.tp += t.tp;
    all.fp += t.fp;
    all.fn += t.fn;
  }
  if (show_others) {
    others.scores.precision = 0.0;
    side.rows.push_back(others);
  }
  all.scores = precision_recall_f1(all.tp, all.fp, all.fn);
  if (options.with_map) {
    side.map = gt_classes.empty() ? 0.0 : ap_sum / static_cast<double>(gt_classes.size());
    all.ap = side.map;
  }
  side.rows.push_back(all);
  return side;
}

bool has_foreign_class(const DetectionsByImage& preds, const std::set<ClassId>& gt_classes) {
  for (const auto& [id, dets] : preds) {
    for (const auto& d : dets) {
      if (!gt_classes.contains(d.class_id)) return true;
    }
  }
  return false;
}

}  // namespace

EvalReport build_report(const DetectionsByImage& before, const DetectionsByImage& after,
                        std::span<const Annotation> gts, const MatchConfig& cfg,
                        const ReportOptions& options) {
  cfg.validate();
  std::set<ClassId> gt_classes;
  for (const auto& a : gts) gt_classes.insert(a.class_id);
  const bool show_others =
      has_foreign_class(before, gt_classes) || has_foreign_class(after, gt_classes);

  EvalReport report;
  report.iou_threshold = cfg.iou_threshold;
  report.before = build_side(before, gts, gt_classes, show_others, cfg, options);
  report.after = build_side(after, gts, gt_classes, show_others, cfg, options);
  for (std::size_t i = 0; i < report.after.rows.size(); ++i) {
    const ReportRow& b = report.before.rows[i];
    const ReportRow& a = report.after.rows[i];
    DeltaRow d;
    d.label = a.label;
    if (a.label != "others") {
      d.precision = delta_percent(b.scores.precision, a.scores.precision);
      d.recall = delta_percent(b.scores.recall, a.scores.recall);
      d.f1 = delta_percent(b.scores.f1, a.scores.f1);
    }
    report.delta.push_back(d);
  }
  return report;
}

std::string render_report(const EvalReport& report) {
  const bool with_ap = report.after.map.has_value();
  char tau[16];
  std::snprintf(tau, sizeof tau, "@%.2g", report.iou_threshold);
  const std::string p = std::string("P") + tau, r = std::string("R") + tau,
                    f = std::string("F1") + tau;

  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-8s | %-*s | %-*s | %s\n", "", with_ap ? 38 : 29,
                "Before NMS", with_ap ? 38 : 29, "After NMS", "Delta%");
  os << line;
  auto header_side = [&](std::ostringstream& s) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%6s %7s %7s %7s", "n", p.c_str(), r.c_str(), f.c_str());
    s << buf;
    if (with_ap) {
      std::snprintf(buf, sizeof buf, " %8s", "AP");
      s << buf;
    }
  };
  std::ostringstream head;
  char cat[16];
  std::snprintf(cat, sizeof cat, "%-8s | ", "Cat.");
  head << cat;
  header_side(head);
  head << " | ";
  header_side(head);
  std::snprintf(line, sizeof line, " | %9s %9s %9s\n", p.c_str(), r.c_str(), f.c_str());
  head << line;
  os << head.str();

  auto side_cells = [&](const ReportRow& row) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%6zu %7s %7s %7s", row.n, fmt(row.scores.precision).c_str(),
                  fmt(row.scores.recall).c_str(), fmt(row.scores.f1).c_str());
    std::string s = buf;
    if (with_ap) {
      std::snprintf(buf, sizeof buf, " %8s", fmt(row.ap).c_str());
      s += buf;
    }
    return s;
  };
  for (std::size_t i = 0; i < report.after.rows.size(); ++i) {
    const auto& d = report.delta[i];
    std::snprintf(line, sizeof line, "%-8s | %s | %s | %9s %9s %9s\n",
                  report.after.rows[i].label.c_str(), side_cells(report.before.rows[i]).c_str(),
                  side_cells(report.after.rows[i]).c_str(), fmt_pct(d.precision).c_str(),
                  fmt_pct(d.recall).c_str(), fmt_pct(d.f1).c_str());
    os << line;
  }
  return os.str();
}

}  // namespace punchdet
