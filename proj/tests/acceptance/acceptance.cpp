// Acceptance suite: one PASS/FAIL line per primary criterion.
//
// Exit status is 0 when every criterion passes, or when the only failures are
// the documented known failures below, each failing in exactly the recorded
// way. Anything else (a new failure, or a known failure that starts passing)
// exits 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "punchdet/backends.hpp"
#include "punchdet/dataset.hpp"
#include "punchdet/metrics.hpp"
#include "punchdet/nms.hpp"
#include "punchdet/pipeline.hpp"
#include "punchdet/tiler.hpp"
#include "punchdet/tune.hpp"
#include "support/nms_oracle.hpp"
#include "support/random_detections.hpp"
#include "support/tune_scenario.hpp"

using namespace punchdet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  // Failure signature compared against the known-failure list.
  std::string signature;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> check;
};

// Per-category results table: n, P, R, F1 before and after NMS, then the
// printed relative changes in percent. Absent cells are nullopt.
struct TableRow {
  const char* model;
  const char* category;
  int n_before;
  double p_before;
  std::optional<double> r_before, f1_before;
  int n_after;
  double p_after;
  std::optional<double> r_after, f1_after;
  std::optional<double> dp, dr, df1;
};

constexpr std::nullopt_t na = std::nullopt;

const std::vector<TableRow>& results_table() {
  static const std::vector<TableRow> rows{
      {"YOLOv10n", "47", 532, 0.7274, 0.9748, 0.8332, 210, 0.9381, 0.9517, 0.9448, 22.46, -2.43, 11.81},
      {"YOLOv10n", "138", 614, 0.6889, 0.9883, 0.8119, 210, 0.9095, 0.9745, 0.9409, 24.26, -0.14, 13.71},
      {"YOLOv10n", "333", 138, 0.7826, 0.6750, 0.7248, 74, 0.9595, 0.5772, 0.7208, 18.44, -16.94, -0.55},
      {"YOLOv10n", "388", 404, 0.9183, 0.9027, 0.9104, 197, 0.9797, 0.8283, 0.8977, 6.27, -8.98, -1.41},
      {"YOLOv10n", "others", 2, 0.0, na, na, 2, 0.0, na, na, na, na, na},
      {"YOLOv10n", "ALL", 1690, 0.7627, 0.9234, 0.8354, 693, 0.9408, 0.8590, 0.8981, 18.93, -7.50, 6.98},
      {"YOLOv10s", "47", 470, 0.7191, 0.9160, 0.8057, 185, 0.9405, 0.8406, 0.8878, 23.54, -8.97, 9.25},
      {"YOLOv10s", "138", 615, 0.6992, 0.9931, 0.8206, 205, 0.9415, 0.9847, 0.9626, 25.74, -0.85, 14.75},
      {"YOLOv10s", "333", 139, 0.7770, 0.6585, 0.7129, 64, 0.9375, 0.4878, 0.6417, 17.12, -34.99, -11.10},
      {"YOLOv10s", "388", 400, 0.8575, 0.8728, 0.8651, 183, 0.9672, 0.7597, 0.8510, 11.34, -14.89, -1.66},
      {"YOLOv10s", "others", 1, 0.0, na, na, 1, 0.0, na, na, na, na, na},
      {"YOLOv10s", "ALL", 1625, 0.7502, 0.8970, 0.8170, 638, 0.9467, 0.7958, 0.8647, 20.76, -12.72, 5.52},
      {"YOLOv10l", "47", 192, 0.7962, 0.8032, 0.7997, 150, 0.9400, 0.6812, 0.7899, 15.30, -17.91, -1.24},
      {"YOLOv10l", "138", 165, 0.7022, 0.7957, 0.7460, 198, 0.9444, 0.9541, 0.9492, 25.65, 16.60, 21.41},
      {"YOLOv10l", "333", 2, 0.7817, 0.9790, 0.8693, 28, 0.6786, 0.1545, 0.2517, -15.19, -533.66, -245.37},
      {"YOLOv10l", "388", 29, 0.5897, 0.1811, 0.2771, 167, 0.9820, 0.7039, 0.8200, 39.95, 74.27, 66.21},
      {"YOLOv10l", "ALL", 1625, 0.9485, 0.8194, 0.8792, 543, 0.9411, 0.6733, 0.7849, -0.79, -21.70, -12.01},
  };
  return rows;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome harmonic_mean_audit() {
  std::size_t checked = 0;
  double worst = 0.0;
  std::vector<std::string> bad;
  for (const auto& row : results_table()) {
    const std::pair<double, std::optional<double>> sides[] = {{row.p_before, row.r_before},
                                                              {row.p_after, row.r_after}};
    const std::optional<double> printed[] = {row.f1_before, row.f1_after};
    for (int s = 0; s < 2; ++s) {
      if (!sides[s].second || !printed[s]) continue;
      ++checked;
      const double err = std::abs(f1_score(sides[s].first, *sides[s].second) - *printed[s]);
      worst = std::max(worst, err);
      if (!(err < 5e-4)) bad.push_back(std::string(row.model) + "/" + row.category);
    }
  }
  Outcome o;
  o.pass = bad.empty() && checked >= 30;
  o.detail = std::to_string(checked) + " triplets, max |F1 - 2PR/(P+R)| = " + fmt("%.2e", worst) +
             " (tol 5e-4)";
  for (const auto& b : bad) o.signature += b + ";";
  return o;
}

Outcome delta_audit() {
  std::size_t checked = 0;
  std::vector<std::string> bad;
  std::string shown;
  const auto check = [&](const TableRow& row, const char* metric, std::optional<double> before,
                         std::optional<double> after, std::optional<double> printed) {
    const auto got = delta_percent(before, after);
    if (!printed) {
      if (got && row.category != std::string("others")) bad.push_back("unexpected value");
      return;
    }
    ++checked;
    if (!got || std::abs(*got - *printed) > 0.02) {
      const std::string cell = std::string(row.model) + "/" + row.category + "/" + metric;
      bad.push_back(cell);
      shown += " " + cell + " printed " + fmt("%.2f%%", *printed) + " computed " +
               (got ? fmt("%.2f%%", *got) : std::string("--")) + ";";
    }
  };
  for (const auto& row : results_table()) {
    const bool others = row.category == std::string("others");
    // The others row carries no Δ by definition.
    check(row, "P", others ? std::optional<double>{} : row.p_before,
          others ? std::optional<double>{} : row.p_after, row.dp);
    check(row, "R", row.r_before, row.r_after, row.dr);
    check(row, "F1", row.f1_before, row.f1_after, row.df1);
  }

  // build_report reports exactly delta_percent of its own rows.
  const std::vector<Annotation> gts{{"i", {0, 0, 10, 10}, 1}, {"i", {20, 0, 30, 10}, 1}};
  DetectionsByImage before, after;
  before["i"] = {{{0, 0, 10, 10}, 1, 0.9}, {{1, 1, 9, 9}, 1, 0.8}, {{20, 0, 30, 10}, 1, 0.7},
                 {{40, 40, 50, 50}, 5, 0.6}};
  after["i"] = {{{0, 0, 10, 10}, 1, 0.9}, {{40, 40, 50, 50}, 5, 0.6}};
  const auto rep = build_report(before, after, gts);
  for (std::size_t i = 0; i < rep.delta.size(); ++i) {
    const auto& b = rep.before.rows[i].scores;
    const auto& a = rep.after.rows[i].scores;
    const bool others = rep.delta[i].label == "others";
    const auto want_p = others ? std::nullopt : delta_percent(b.precision, a.precision);
    if (rep.delta[i].precision != want_p || rep.delta[i].recall != delta_percent(b.recall, a.recall) ||
        rep.delta[i].f1 != delta_percent(b.f1, a.f1)) {
      bad.push_back("build_report/" + rep.delta[i].label);
    }
  }

  Outcome o;
  o.pass = bad.empty();
  o.detail = std::to_string(checked) + " cells, " + std::to_string(checked - bad.size()) +
             " within 0.02 pp of (after - before)/after";
  if (!bad.empty()) o.detail += ";" + shown;
  for (const auto& b : bad) o.signature += b + ";";
  return o;
}

Outcome tiler_arithmetic() {
  const TilingConfig cfg;
  const auto plan = plan_frames(36451, 27274, cfg, "held_out");
  bool ok = plan.columns == 48 && plan.rows == 36 && plan.size() == 1728;

  // Closed form against a brute-force walk of origins.
  const auto walk = [&](std::int64_t len) {
    std::int64_t n = 0;
    for (std::int64_t x = 0;; x += cfg.stride()) {
      ++n;
      if (x + cfg.tile >= len) break;
    }
    return n;
  };
  ok = ok && walk(36451) == 48 && walk(27274) == 36;

  // Coverage per axis: starts at 0, no gaps, last window flush with the edge.
  for (std::int64_t len : {std::int64_t{36451}, std::int64_t{27274}}) {
    const auto o = axis_origins(len, cfg);
    ok = ok && o.front() == 0 && o.back() == len - cfg.tile;
    for (std::size_t i = 1; i < o.size(); ++i) {
      ok = ok && o[i] > o[i - 1] && o[i] - o[i - 1] <= cfg.stride() && o[i] <= o[i - 1] + cfg.tile;
    }
  }
  const auto& last = plan.frames.back();
  ok = ok && last.origin == FrameOrigin{36451 - 1088, 27274 - 1088};
  for (const auto& f : plan.frames) {
    const auto b = plan.frame_box(f);
    ok = ok && b.x_min >= 0 && b.y_min >= 0 && b.x_max <= 36451 && b.y_max <= 27274 &&
         b.width() == 1088 && b.height() == 1088;
  }
  return {ok,
          std::to_string(plan.columns) + " x " + std::to_string(plan.rows) + " = " +
              std::to_string(plan.size()) + " frames, last origin (" +
              std::to_string(last.origin.x) + ", " + std::to_string(last.origin.y) + ")",
          ok ? "" : "tiler"};
}

Outcome containment_property() {
  std::mt19937_64 rng(20240601);
  const TilingConfig cfg;
  constexpr int cases = 12000;
  int failures = 0;
  std::optional<FramePlan> plan;
  for (int k = 0; k < cases; ++k) {
    if (k % 200 == 0) {
      const auto w = std::uniform_int_distribution<std::int64_t>(200, 9000)(rng);
      const auto h = std::uniform_int_distribution<std::int64_t>(200, 9000)(rng);
      plan = plan_frames(w, h, cfg);
    }
    const double iw = static_cast<double>(plan->image_width);
    const double ih = static_cast<double>(plan->image_height);
    std::uniform_real_distribution<double> side(0.5, 324.0);
    const double bw = std::min(side(rng), iw), bh = std::min(side(rng), ih);
    // A quarter of the boxes are pushed to the maximal side.
    const double sw = k % 4 == 0 ? std::min(324.0, iw) : bw;
    const double sh = k % 4 == 0 ? std::min(324.0, ih) : bh;
    const double x = std::uniform_real_distribution<double>(0, iw - sw)(rng);
    const double y = std::uniform_real_distribution<double>(0, ih - sh)(rng);
    if (frames_covering(*plan, {x, y, x + sw, y + sh}).empty()) ++failures;
  }
  return {failures == 0,
          std::to_string(cases) + " random boxes with sides <= 324, " + std::to_string(failures) +
              " not wholly inside a frame",
          failures ? "containment" : ""};
}

Outcome nms_oracle_equivalence() {
  std::mt19937_64 rng(777);
  constexpr int instances = 12000;
  const double ts[] = {0.0, 0.3, 0.5, 0.6, 0.7, 0.8, 0.95, 1.0, 1.2};
  const double cs[] = {0.0, 0.5, 0.75, 0.8};
  int mismatch = 0, not_idempotent = 0, order_dependent = 0;
  for (int k = 0; k < instances; ++k) {
    auto dets = punchdet::testing::random_detections(rng, 10, 1 + k % 3);
    const NmsConfig cfg{ts[k % 9], cs[k % 4]};
    const auto got = custom_nms(dets, cfg);
    auto a = got, b = punchdet::testing::brute_force_nms_oracle(dets, cfg.iom_threshold,
                                                                cfg.confidence_threshold);
    std::sort(a.begin(), a.end(), canonical_less);
    std::sort(b.begin(), b.end(), canonical_less);
    if (a != b) ++mismatch;
    if (custom_nms(got, cfg) != got) ++not_idempotent;
    std::shuffle(dets.begin(), dets.end(), rng);
    if (custom_nms(dets, cfg) != got) ++order_dependent;
  }
  const bool ok = mismatch == 0 && not_idempotent == 0 && order_dependent == 0;
  return {ok,
          std::to_string(instances) + " instances of <= 10 detections: " +
              std::to_string(mismatch) + " oracle mismatches, " + std::to_string(not_idempotent) +
              " non-idempotent, " + std::to_string(order_dependent) + " order-dependent",
          ok ? "" : "nms"};
}

Outcome nested_regression() {
  const Detection large{{0, 0, 100, 100}, 1, 0.90};
  const Detection small{{10, 10, 90, 90}, 1, 0.95};
  const auto kept = custom_nms(std::vector<Detection>{small, large}, {0.7, 0.75});
  const bool ok = kept.size() == 1 && kept[0] == large;
  return {ok,
          "nested pair conf 0.90 (outer) / 0.95 (inner) keeps " +
              std::string(kept.size() == 1 ? (kept[0] == large ? "the outer box" : "the inner box")
                                           : std::to_string(kept.size()) + " boxes"),
          ok ? "" : "nested"};
}

Outcome no_leakage() {
  std::mt19937_64 sizes(4242);
  constexpr int seeds = 120;
  std::size_t frames = 0, pairs = 0, overlaps = 0;
  int tested = 0;
  for (int seed = 0; tested < seeds; ++seed) {
    const auto w = std::uniform_int_distribution<std::int64_t>(2160, 14000)(sizes);
    const auto h = std::uniform_int_distribution<std::int64_t>(2160, 11000)(sizes);
    const auto grid = build_grid(w, h);
    const auto assignment = assign_cells(grid, 0.8, derive_seed(seed, "synthetic"));
    // Grids too small to hold both splits cannot leak.
    if (assignment.count(Split::train) == 0 || assignment.count(Split::validation) == 0) continue;
    ++tested;
    std::mt19937_64 rng(seed);
    std::vector<Annotation> anns;
    for (int i = 0; i < 400; ++i) {
      const double x = std::uniform_real_distribution<double>(0, static_cast<double>(w) - 200)(rng);
      const double y = std::uniform_real_distribution<double>(0, static_cast<double>(h) - 200)(rng);
      const double s = std::uniform_real_distribution<double>(20, 190)(rng);
      anns.push_back({"synthetic", {x, y, x + s, y + s}, i % 5});
    }
    SamplingConfig cfg;
    cfg.train_frames = 24;
    cfg.validation_frames = 8;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto samples = sample_frames(grid, assignment, anns, "synthetic", cfg);
    frames += samples.size();
    for (const auto& a : samples) {
      if (a.split != Split::train) continue;
      for (const auto& b : samples) {
        if (b.split != Split::validation) continue;
        ++pairs;
        if (intersection_area(a.frame_box(), b.frame_box()) > 0.0) ++overlaps;
      }
    }
  }
  return {overlaps == 0 && pairs > 0,
          std::to_string(seeds) + " seeds, " + std::to_string(frames) + " frames, " +
              std::to_string(pairs) + " train/validation pairs, " + std::to_string(overlaps) +
              " intersecting",
          overlaps ? "leakage" : ""};
}

Outcome rebalance_property() {
  // Worked example {a:100, b:50, c:10}.
  std::vector<FrameSample> example;
  const auto frame = [](std::initializer_list<std::pair<ClassId, int>> content) {
    FrameSample s;
    s.image_id = "x";
    s.tile = 64;
    for (const auto& [c, n] : content)
      for (int i = 0; i < n; ++i) s.annotations.push_back({{0, 0, 4, 4}, c});
    return s;
  };
  for (int i = 0; i < 45; ++i) example.push_back(frame({{1, 2}}));
  for (int i = 0; i < 10; ++i) example.push_back(frame({{1, 1}, {2, 5}}));
  for (int i = 0; i < 10; ++i) example.push_back(frame({{3, 1}}));
  const auto ex = rebalance(example, 35.0);
  bool ok = ex.threshold == 50 && ex.after.at(2) == 50 && ex.after.at(3) == 10 &&
            ex.after.at(1) <= 100 && ex.after.at(1) >= 50;
  for (std::size_t i : ex.removed_indices) {
    for (const auto& a : example[i].annotations) ok = ok && a.class_id == 1;
  }

  std::mt19937_64 rng(99);
  constexpr int cases = 2000;
  int violations = 0;
  for (int k = 0; k < cases; ++k) {
    std::vector<FrameSample> samples;
    const int frames = std::uniform_int_distribution<int>(1, 80)(rng);
    const int classes = std::uniform_int_distribution<int>(1, 10)(rng);
    std::geometric_distribution<int> skew(std::uniform_real_distribution<double>(0.15, 0.7)(rng));
    for (int f = 0; f < frames; ++f) {
      FrameSample s = frame({});
      const int n = std::uniform_int_distribution<int>(1, 6)(rng);
      for (int i = 0; i < n; ++i) s.annotations.push_back({{0, 0, 4, 4}, std::min(classes - 1, skew(rng))});
      samples.push_back(s);
    }
    const auto r = rebalance(samples, 35.0);
    bool good = r.threshold == nearest_rank_percentile(r.before, 35.0);
    for (const auto& [cls, n] : r.before) {
      const auto after = r.after.at(cls);
      good = good && after <= n && (n > r.threshold || after == n) &&
             after >= std::min(n, r.threshold);
    }
    if (!good) ++violations;
  }
  ok = ok && violations == 0;
  return {ok,
          "example threshold " + std::to_string(ex.threshold) + "; " + std::to_string(cases) +
              " random histograms, " + std::to_string(violations) + " violations",
          ok ? "" : "rebalance"};
}

Outcome end_to_end_noiseless() {
  const std::int64_t w = 7300, h = 5100;
  const auto plan = plan_frames(w, h, {}, "painting");
  SyntheticScenario sc;
  sc.seed = 1;
  sc.tp_confidence_sd = 0.0;
  std::mt19937_64 rng(5);
  // Instances sit on a jittered lattice so none overlap; many straddle window seams.
  for (double y = 20; y + 340 < static_cast<double>(h); y += 380) {
    for (double x = 20; x + 340 < static_cast<double>(w); x += 380) {
      const double bw = std::uniform_real_distribution<double>(8, 324)(rng);
      const double bh = std::uniform_real_distribution<double>(8, 324)(rng);
      sc.ground_truth.push_back({"painting", {x, y, x + bw, y + bh},
                                 std::uniform_int_distribution<ClassId>(0, 3)(rng)});
    }
  }
  SyntheticBackend backend(sc);
  const auto per_frame = run_backend(nullptr, plan, backend, {4, {}});
  const auto merged = merge_and_suppress(per_frame, plan, {});
  DetectionsByImage before, after;
  before["painting"] = merged.before_nms;
  after["painting"] = merged.after_nms;
  const auto rep = build_report(before, after, sc.ground_truth, {0.5});
  const auto& all = rep.after.rows.back();
  const bool ok = all.label == "ALL" && all.scores.precision == 1.0 && all.scores.recall == 1.0 &&
                  all.scores.f1 == 1.0 && merged.after_nms.size() == sc.ground_truth.size() &&
                  merged.before_nms.size() > sc.ground_truth.size();
  std::ostringstream d;
  d << sc.ground_truth.size() << " instances over " << plan.size() << " frames, "
    << merged.before_nms.size() << " merged -> " << merged.after_nms.size()
    << " after NMS, P=" << all.scores.precision << " R=" << all.scores.recall.value_or(-1)
    << " F1=" << all.scores.f1.value_or(-1);
  return {ok, d.str(), ok ? "" : "e2e"};
}

Outcome tune_sanity() {
  const SweepSpec base;
  const auto cs = base.c_star_values();
  const auto ts = base.t_values();
  const auto has = [](const std::vector<double>& v, double x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  bool ok = has(cs, 0.75) && has(ts, 0.7) && has(cs, 0.8) && has(ts, 0.6) && has(ts, 0.5);

  std::size_t optimal = 0, below = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto sc = punchdet::testing::enclosing_false_positives(seed);
    for (Objective obj : {Objective::map, Objective::map50, Objective::f1}) {
      SweepSpec spec;
      spec.objective = obj;
      const auto points = sweep(sc.before_nms, sc.truth, spec, 4);
      for (const auto& p : points) {
        if (p.objective != points.front().objective) break;
        ++optimal;
        if (p.c_star < 0.6) ++below;
      }
    }
  }
  ok = ok && below == 0 && optimal > 0;
  return {ok,
          "grid " + std::to_string(cs.size()) + " x " + std::to_string(ts.size()) +
              " includes (0.75, 0.7), (0.8, 0.6), (0.8, 0.5); " + std::to_string(optimal) +
              " optimal points, " + std::to_string(below) + " with c* < 0.6",
          ok ? "" : "tune"};
}

// Criterion name -> failure signature it is known to produce.
const std::vector<std::pair<std::string, std::string>> known_failures{
    {"delta-audit", "YOLOv10n/138/R;"},
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"harmonic-mean-audit", harmonic_mean_audit},
      {"delta-audit", delta_audit},
      {"tiler-arithmetic", tiler_arithmetic},
      {"containment-property", containment_property},
      {"nms-oracle-equivalence", nms_oracle_equivalence},
      {"nested-prediction-regression", nested_regression},
      {"no-leakage-property", no_leakage},
      {"rebalance-property", rebalance_property},
      {"end-to-end-noiseless", end_to_end_noiseless},
      {"tune-sweep-sanity", tune_sanity},
  };

  int unexpected = 0, passed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), "exception"};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto known = std::find_if(known_failures.begin(), known_failures.end(),
                                    [&](const auto& k) { return k.first == c.name; });
    std::string note;
    if (o.pass) {
      ++passed;
      if (known != known_failures.end()) {
        ++unexpected;
        note = " [known failure now passes]";
      }
    } else if (known != known_failures.end() && known->second == o.signature) {
      note = " [known failure]";
    } else {
      ++unexpected;
    }
    std::printf("%s %s: %s (%.2fs)%s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(),
                o.detail.c_str(), secs, note.c_str());
  }
  std::printf("%d/%zu criteria passed, %d unexpected\n", passed, criteria.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
