#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "punchdet/detection.hpp"

namespace punchdet {

struct MatchConfig {
  double iou_threshold = 0.5;  // tau

  void validate() const;
};

struct MatchedPair {
  std::size_t prediction = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

/// Indices refer to the prediction / ground-truth spans passed to match().
struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> false_positives;
  std::vector<std::size_t> false_negatives;

  std::size_t tp() const noexcept { return pairs.size(); }
  std::size_t fp() const noexcept { return false_positives.size(); }
  std::size_t fn() const noexcept { return false_negatives.size(); }
};

/// Greedy one-to-one matching within one image. Predictions are visited by
/// descending confidence (ties in canonical order); each claims the unmatched
/// same-class ground truth with the highest IoU >= tau (lowest index on ties).
MatchResult match(std::span<const Detection> preds, std::span<const Annotation> gts,
                  const MatchConfig& cfg = {});

/// Recall is absent without ground truth; F1 is absent whenever recall is.
struct Scores {
  double precision = 0.0;
  std::optional<double> recall;
  std::optional<double> f1;
};

Scores precision_recall_f1(std::size_t tp, std::size_t fp, std::size_t fn);
Scores precision_recall_f1(const MatchResult& m);

/// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall) noexcept;

/// (after - before) / after, in percent. Absent when after is 0 or either side is absent.
std::optional<double> delta_percent(std::optional<double> before, std::optional<double> after);

/// Per-class TP/FP/FN tallies pooled over images.
struct ClassTally {
  std::size_t predictions = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

std::map<ClassId, ClassTally> tally(const DetectionsByImage& preds,
                                    std::span<const Annotation> gts, const MatchConfig& cfg);

/// 101-point interpolated area under the precision/recall curve for one class,
/// pooled over images. Throws Error(class_absent) when the ground truth has no
/// instance of class_id.
double average_precision(const DetectionsByImage& preds, std::span<const Annotation> gts,
                         const MatchConfig& cfg, ClassId class_id);

/// IoU thresholds lo, lo+0.05, ..., hi (inclusive).
std::vector<double> iou_threshold_range(double lo = 0.50, double hi = 0.95, double step = 0.05);

/// Mean over ground-truth classes and over the given IoU thresholds.
/// 0 when the ground truth is empty.
double mean_average_precision(const DetectionsByImage& preds, std::span<const Annotation> gts,
                              std::span<const double> iou_thresholds);

struct ReportRow {
  std::string label;  // class id, "others" or "ALL"
  std::optional<ClassId> class_id;
  std::size_t n = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  Scores scores;
  std::optional<double> ap;  // mAP over the configured IoU range; set when requested
};

struct ReportSide {
  std::vector<ReportRow> rows;  // GT classes ascending, then "others" if any, then "ALL"
  std::optional<double> map;
};

struct DeltaRow {
  std::string label;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

struct EvalReport {
  double iou_threshold = 0.5;
  ReportSide before;
  ReportSide after;
  std::vector<DeltaRow> delta;
};

struct ReportOptions {
  bool with_map = false;
  std::vector<double> map_thresholds = iou_threshold_range();
};

/// Before/after-NMS evaluation with per-class rows, an "others" row for
/// predicted classes missing from the ground truth (P = 0, R and F1 absent),
/// an ALL row and relative change columns.
EvalReport build_report(const DetectionsByImage& before, const DetectionsByImage& after,
                        std::span<const Annotation> gts, const MatchConfig& cfg = {},
                        const ReportOptions& options = {});

/// Fixed-width text table; absent values print as "--".
std::string render_report(const EvalReport& report);

}  // namespace punchdet
