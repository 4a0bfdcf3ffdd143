#include <doctest.h>

#include <random>
#include <set>

#include "punchdet/error.hpp"
#include "punchdet/metrics.hpp"
#include "support/ap_oracle.hpp"

using namespace punchdet;
using punchdet::testing::OracleImage;
using punchdet::testing::threshold_sweep_ap;

namespace {

Annotation gt(const std::string& id, BoundingBox b, ClassId c) { return {id, b, c}; }

const ReportRow& row(const ReportSide& side, const std::string& label) {
  for (const auto& r : side.rows) {
    if (r.label == label) return r;
  }
  FAIL("missing row " << label);
  return side.rows.front();
}

}  // namespace

TEST_CASE("match examples") {
  const std::vector<Annotation> truth{gt("i", {0, 0, 10, 10}, 1)};
  const std::vector<Detection> same{{{0, 0, 10, 10}, 1, 0.9}};
  auto m = match(same, truth);
  CHECK(m.tp() == 1);
  CHECK(m.fp() == 0);
  CHECK(m.fn() == 0);

  const std::vector<Detection> twice{{{0, 0, 10, 10}, 1, 0.9}, {{0, 0, 10, 10}, 1, 0.8}};
  m = match(twice, truth);
  CHECK(m.tp() == 1);
  CHECK(m.fp() == 1);
  CHECK(m.pairs[0].prediction == 0);

  // Overlap 40 over union 100: IoU 0.4.
  const std::vector<Detection> shifted{{{0, 0, 10, 7}, 1, 0.9}};
  const std::vector<Annotation> wide{gt("i", {0, 3, 10, 13}, 1)};
  m = match(shifted, wide);
  CHECK(m.tp() == 0);
  CHECK(m.fp() == 1);
  CHECK(m.fn() == 1);

  const std::vector<Detection> other_class{{{0, 0, 10, 10}, 2, 0.9}};
  CHECK(match(other_class, truth).tp() == 0);
}

TEST_CASE("higher confidence claims first and takes the best IoU") {
  const std::vector<Annotation> truth{gt("i", {0, 0, 10, 10}, 0), gt("i", {2, 0, 12, 10}, 0)};
  const std::vector<Detection> preds{{{1, 0, 11, 10}, 0, 0.5}, {{2, 0, 12, 10}, 0, 0.9}};
  const auto m = match(preds, truth);
  REQUIRE(m.tp() == 2);
  CHECK(m.pairs[0].prediction == 1);
  CHECK(m.pairs[0].ground_truth == 1);
  CHECK(m.pairs[1].ground_truth == 0);
}

TEST_CASE("precision recall f1") {
  auto s = precision_recall_f1(1, 2, 1);
  CHECK(s.precision == doctest::Approx(1.0 / 3));
  CHECK(*s.recall == doctest::Approx(0.5));
  CHECK(*s.f1 == doctest::Approx(0.4));

  s = precision_recall_f1(5, 0, 0);
  CHECK(s.precision == 1.0);
  CHECK(*s.recall == 1.0);
  CHECK(*s.f1 == 1.0);

  s = precision_recall_f1(0, 0, 3);
  CHECK(s.precision == 0.0);
  CHECK(*s.recall == 0.0);
  CHECK(*s.f1 == 0.0);

  s = precision_recall_f1(0, 2, 0);
  CHECK(s.precision == 0.0);
  CHECK_FALSE(s.recall.has_value());
  CHECK_FALSE(s.f1.has_value());

  CHECK(f1_score(0.9408, 0.8590) == doctest::Approx(0.8981).epsilon(5e-4));
  CHECK(f1_score(0, 0) == 0.0);
}

TEST_CASE("relative change") {
  CHECK(*delta_percent(0.7627, 0.9408) == doctest::Approx(18.93).epsilon(1e-3));
  CHECK(*delta_percent(0.9234, 0.8590) == doctest::Approx(-7.50).epsilon(1e-3));
  CHECK(*delta_percent(0.5, 0.5) == 0.0);
  CHECK_FALSE(delta_percent(0.5, 0.0).has_value());
  CHECK_FALSE(delta_percent(std::nullopt, 0.3).has_value());
}

TEST_CASE("duplicate false positive lowers precision only") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 500; ++k) {
    std::vector<Annotation> truth;
    std::vector<Detection> preds;
    for (int i = 0; i < 6; ++i) {
      const double x = i * 30.0;
      truth.push_back(gt("i", {x, 0, x + 20, 20}, 0));
      if (std::bernoulli_distribution(0.7)(rng)) {
        const double d = std::uniform_real_distribution<double>(-6, 6)(rng);
        preds.push_back({{x + d, d, x + 20 + d, 20 + d}, 0,
                         std::uniform_real_distribution<double>(0.1, 0.9)(rng)});
      }
    }
    const auto base = precision_recall_f1(match(preds, truth));
    auto extra = preds;
    extra.push_back({{500, 500, 520, 520}, 0, 0.95});
    const auto more = precision_recall_f1(match(extra, truth));
    if (base.precision > 0.0) {
      CHECK(more.precision < base.precision);
    } else {
      CHECK(more.precision == 0.0);
    }
    CHECK(*more.recall == *base.recall);
    const auto m = match(preds, truth);
    CHECK(m.tp() <= std::min(preds.size(), truth.size()));
    CHECK(m.tp() + m.fp() == preds.size());
    CHECK(m.tp() + m.fn() == truth.size());
  }
}

TEST_CASE("average precision examples") {
  const std::vector<Annotation> truth{gt("i", {0, 0, 10, 10}, 7), gt("i", {20, 0, 30, 10}, 7)};
  DetectionsByImage preds;
  preds["i"] = {{{0, 0, 10, 10}, 7, 0.9}, {{50, 50, 60, 60}, 7, 0.8}, {{20, 0, 30, 10}, 7, 0.7}};
  const double ap = average_precision(preds, truth, {}, 7);
  CHECK(ap == doctest::Approx((51.0 + 50.0 * 2.0 / 3.0) / 101.0));
  CHECK(ap == doctest::Approx(0.83498).epsilon(1e-4));

  OracleImage img{preds["i"], {truth[0].box, truth[1].box}};
  CHECK(ap == doctest::Approx(threshold_sweep_ap({img}, 0.5)).epsilon(1e-12));

  DetectionsByImage perfect;
  perfect["i"] = {{{0, 0, 10, 10}, 7, 0.2}, {{20, 0, 30, 10}, 7, 0.6}};
  CHECK(average_precision(perfect, truth, {}, 7) == 1.0);
  CHECK(average_precision({}, truth, {}, 7) == 0.0);
  try {
    average_precision(perfect, truth, {}, 8);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::class_absent);
  }
}

TEST_CASE("average precision agrees with the threshold sweep oracle") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 500; ++k) {
    std::vector<Annotation> truth;
    DetectionsByImage preds;
    std::vector<OracleImage> oracle;
    std::set<double> used_conf;
    const int images = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int im = 0; im < images; ++im) {
      const std::string id = "img" + std::to_string(im);
      OracleImage o;
      const int n_gt = std::uniform_int_distribution<int>(im == 0 ? 1 : 0, 5)(rng);
      for (int g = 0; g < n_gt; ++g) {
        const double x = g * 40.0;
        truth.push_back(gt(id, {x, 0, x + 25, 25}, 3));
        o.truth.push_back({x, 0, x + 25, 25});
      }
      const int n_pred = std::uniform_int_distribution<int>(0, 8)(rng);
      for (int p = 0; p < n_pred; ++p) {
        const double x = std::uniform_int_distribution<int>(0, 5)(rng) * 40.0;
        const double d = std::uniform_real_distribution<double>(-8, 8)(rng);
        double c;
        do {
          c = std::uniform_real_distribution<double>(0, 1)(rng);
        } while (!used_conf.insert(c).second);
        const Detection det{{x + d, d, x + 25 + d, 25 + d}, 3, c};
        preds[id].push_back(det);
        o.preds.push_back(det);
      }
      oracle.push_back(o);
    }
    for (double tau : {0.5, 0.75}) {
      CAPTURE(k);
      CHECK(std::abs(average_precision(preds, truth, {tau}, 3) - threshold_sweep_ap(oracle, tau)) <
            1e-2);
    }
  }
}

TEST_CASE("threshold ranges and mAP") {
  const auto r = iou_threshold_range();
  REQUIRE(r.size() == 10);
  CHECK(r.front() == 0.5);
  CHECK(r.back() == doctest::Approx(0.95));
  CHECK(iou_threshold_range(0.5, 0.9).size() == 9);

  const std::vector<Annotation> truth{gt("i", {0, 0, 10, 10}, 1), gt("i", {20, 0, 30, 10}, 2)};
  DetectionsByImage preds;
  preds["i"] = {{{0, 0, 10, 10}, 1, 0.9}, {{20, 0, 30, 10}, 2, 0.9}};
  CHECK(mean_average_precision(preds, truth, r) == 1.0);
  preds["i"].pop_back();
  CHECK(mean_average_precision(preds, truth, r) == doctest::Approx(0.5));
  CHECK(mean_average_precision(preds, {}, r) == 0.0);
}

TEST_CASE("report rows, others and deltas") {
  const std::vector<Annotation> truth{gt("a", {0, 0, 10, 10}, 1), gt("a", {20, 0, 30, 10}, 1),
                                      gt("b", {0, 0, 10, 10}, 2)};
  DetectionsByImage before;
  before["a"] = {{{0, 0, 10, 10}, 1, 0.9}, {{1, 1, 9, 9}, 1, 0.8}, {{50, 50, 60, 60}, 9, 0.7}};
  before["b"] = {{{0, 0, 10, 10}, 2, 0.9}, {{60, 60, 70, 70}, 9, 0.6}};
  DetectionsByImage after = before;
  after["a"].erase(after["a"].begin() + 1);

  const auto same = build_report(before, before, truth);
  for (const auto& d : same.delta) {
    if (d.precision) CHECK(*d.precision == 0.0);
    if (d.recall) CHECK(*d.recall == 0.0);
  }

  const auto rep = build_report(before, after, truth, {}, {true, iou_threshold_range()});
  const auto& others = row(rep.after, "others");
  CHECK(others.n == 2);
  CHECK(others.scores.precision == 0.0);
  CHECK_FALSE(others.scores.recall.has_value());
  CHECK_FALSE(others.scores.f1.has_value());

  const auto& c1 = row(rep.after, "1");
  CHECK(c1.n == 1);
  CHECK(c1.tp == 1);
  CHECK(*c1.scores.recall == doctest::Approx(0.5));
  CHECK(row(rep.before, "1").scores.precision == doctest::Approx(0.5));

  const auto& all = row(rep.after, "ALL");
  CHECK(all.n == 4);
  CHECK(all.scores.precision == doctest::Approx(0.5));
  CHECK(*all.scores.recall == doctest::Approx(2.0 / 3.0));
  std::size_t n_sum = 0;
  for (const auto& r : rep.after.rows) {
    if (r.label != "ALL") n_sum += r.n;
    if (r.scores.f1 && r.scores.precision + *r.scores.recall > 0) {
      CHECK(*r.scores.f1 == doctest::Approx(f1_score(r.scores.precision, *r.scores.recall)));
    }
  }
  CHECK(n_sum == all.n);
  REQUIRE(rep.after.map.has_value());

  bool saw_all = false;
  for (const auto& d : rep.delta) {
    if (d.label == "ALL") {
      saw_all = true;
      CHECK(*d.precision == doctest::Approx((0.5 - 0.4) / 0.5 * 100.0));
      CHECK(*d.recall == doctest::Approx(0.0));
    }
    if (d.label == "others") {
      CHECK_FALSE(d.precision.has_value());
      CHECK_FALSE(d.recall.has_value());
      CHECK_FALSE(d.f1.has_value());
    }
  }
  CHECK(saw_all);

  const std::string text = render_report(rep);
  CHECK(text.find("others") != std::string::npos);
  CHECK(text.find("--") != std::string::npos);
}
