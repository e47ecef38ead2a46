#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "edlbev/metrics.hpp"

using namespace edlbev;
using namespace edlbev::metrics;

namespace {

std::vector<BinaryScoredSample> samples(std::vector<double> s, std::vector<int> l) {
  return make_samples(s, l);
}

// Pairwise oracle: P(score_pos > score_neg) + 0.5 P(tie).
double pairwise_auc(const std::vector<BinaryScoredSample>& s) {
  double num = 0;
  std::size_t pairs = 0;
  for (const auto& p : s)
    for (const auto& n : s)
      if (p.label && !n.label) {
        ++pairs;
        num += p.score > n.score ? 1.0 : p.score == n.score ? 0.5 : 0.0;
      }
  return num / double(pairs);
}

// Brute-force AP: mean over positives of precision at the positive's rank,
// with every member of a tie group assigned the group's end rank.
double brute_ap(const std::vector<BinaryScoredSample>& s) {
  double total = 0;
  std::size_t npos = 0;
  for (const auto& a : s) {
    if (!a.label) continue;
    ++npos;
    std::size_t at_or_above = 0, pos_at_or_above = 0;
    for (const auto& b : s)
      if (b.score >= a.score) {
        ++at_or_above;
        pos_at_or_above += b.label;
      }
    total += double(pos_at_or_above) / double(at_or_above);
  }
  return total / double(npos);
}

double trapezoid(const CurveReport& r) {
  double a = 0;
  for (std::size_t i = 1; i < r.points.size(); ++i)
    a += (r.points[i].first - r.points[i - 1].first) * 0.5 * (r.points[i].second + r.points[i - 1].second);
  return a;
}

BevBox box(double cx, double cy, double w, double h, int cls = 0, std::optional<double> score = std::nullopt) {
  BevBox b{cx, cy, w, h, cls, score, Provenance::Predicted};
  return b;
}

} // namespace

TEST(RocAuc, Examples) {
  EXPECT_DOUBLE_EQ(roc_auc(samples({0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0})).auc, 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(samples({0.9, 0.8, 0.7, 0.1}, {1, 0, 1, 0})).auc, 0.75);
  EXPECT_DOUBLE_EQ(roc_auc(samples({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0})).auc, 0.5);
}

TEST(RocAuc, DegenerateLabelsRejected) {
  EXPECT_THROW(roc_auc(samples({0.1, 0.2}, {1, 1})), DataError);
  EXPECT_THROW(roc_auc(samples({0.1, 0.2}, {0, 0})), DataError);
  EXPECT_THROW(roc_auc(samples({0.1, NAN}, {0, 1})), NumericError);
}

TEST(RocAuc, MatchesPairwiseOracleWithTies) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> score(0, 9), label(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BinaryScoredSample> s(40);
    for (auto& x : s) x = {double(score(rng)), label(rng) == 1};
    s[0].label = true;
    s[1].label = false;
    const auto r = roc_auc(s);
    EXPECT_NEAR(r.auc, pairwise_auc(s), 1e-12);
    EXPECT_NEAR(trapezoid(r), r.auc, 1e-12);
    for (std::size_t i = 1; i < r.points.size(); ++i) EXPECT_LE(r.points[i - 1].first, r.points[i].first);
    EXPECT_DOUBLE_EQ(r.points.back().first, 1.0);
    EXPECT_DOUBLE_EQ(r.points.back().second, 1.0);
  }
}

TEST(RocAuc, MonotoneTransformAndLabelFlip) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::vector<BinaryScoredSample> s(200), t(200), f(200);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = {n01(rng), i % 3 == 0};
    t[i] = {std::exp(3.0 * s[i].score) + 7.0, s[i].label};
    f[i] = {s[i].score, !s[i].label};
  }
  EXPECT_NEAR(roc_auc(s).auc, roc_auc(t).auc, 1e-15);
  EXPECT_NEAR(roc_auc(s).auc + roc_auc(f).auc, 1.0, 1e-12);
}

TEST(PrAuc, Examples) {
  EXPECT_DOUBLE_EQ(pr_auc(samples({0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0})).auc, 1.0);
  EXPECT_DOUBLE_EQ(pr_auc(samples({0.9, 0.1}, {0, 1})).auc, 0.5);
  EXPECT_THROW(pr_auc(samples({0.9, 0.1}, {0, 0})), DataError);
}

TEST(PrAuc, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> score(0, 6), label(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BinaryScoredSample> s(30);
    for (auto& x : s) x = {double(score(rng)), label(rng) == 0};
    s[0].label = true;
    EXPECT_NEAR(pr_auc(s).auc, brute_ap(s), 1e-12);
  }
}

TEST(PrAuc, RandomScoresGivePrevalence) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  double mean = 0;
  const int reps = 40;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<BinaryScoredSample> s(1000);
    for (auto& x : s) x = {u(rng), u(rng) < 0.3};
    const double ap = pr_auc(s).auc;
    EXPECT_NEAR(ap, 0.3, 0.05);
    mean += ap / reps;
  }
  EXPECT_NEAR(mean, 0.3, 0.02);
}

TEST(Metrics, PerfectRankingGivesOneForBoth) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  std::vector<BinaryScoredSample> s(100);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = {u(rng), false};
  for (auto& x : s) x.label = x.score > 0.6;
  EXPECT_DOUBLE_EQ(roc_auc(s).auc, 1.0);
  EXPECT_DOUBLE_EQ(pr_auc(s).auc, 1.0);
  // One swapped pair breaks both.
  auto lo = std::min_element(s.begin(), s.end(), [](auto& a, auto& b) { return a.score < b.score; });
  lo->label = true;
  EXPECT_LT(roc_auc(s).auc, 1.0);
  EXPECT_LT(pr_auc(s).auc, 1.0);
}

TEST(PrecisionRecall, Conventions) {
  const auto a = precision_recall(3, 4, 6);
  EXPECT_DOUBLE_EQ(a.precision, 0.75);
  EXPECT_DOUBLE_EQ(a.recall, 0.5);
  EXPECT_DOUBLE_EQ(a.f1, 0.6);
  const auto none = precision_recall(0, 5, 0);
  EXPECT_DOUBLE_EQ(none.precision, 0.0);
  EXPECT_DOUBLE_EQ(none.recall, 1.0);
  EXPECT_DOUBLE_EQ(none.f1, 0.0);
  EXPECT_DOUBLE_EQ(precision_recall(0, 0, 0).f1, 0.0);
}

TEST(Iou, Examples) {
  const auto a = BevBox::from_corners(0, 0, 2, 2);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, BevBox::from_corners(5, 5, 6, 6)), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, BevBox::from_corners(1, 0, 3, 2)), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou(a, BevBox::from_corners(2, 0, 4, 2)), 0.0); // touching edge
}

TEST(Iou, SymmetricAndTranslationInvariant) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(-5, 5), size(0.5, 4);
  for (int i = 0; i < 200; ++i) {
    const auto a = box(pos(rng), pos(rng), size(rng), size(rng));
    const auto b = box(pos(rng), pos(rng), size(rng), size(rng));
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    auto a2 = a, b2 = b;
    a2.cx += 3.0; b2.cx += 3.0; a2.cy -= 2.0; b2.cy -= 2.0;
    EXPECT_NEAR(iou(a2, b2), v, 1e-12);
  }
}

TEST(Map, PerfectAndEmpty) {
  std::vector<std::vector<BevBox>> gt{{box(3, 4, 2, 2, 0), box(10, 10, 3, 3, 1)}, {box(5, 5, 2, 2, 2)}};
  auto pred = gt;
  for (auto& s : pred)
    for (auto& b : s) b.score = 1.0;
  EXPECT_DOUBLE_EQ(map_center_distance(pred, gt).map, 1.0);
  std::vector<std::vector<BevBox>> none(2);
  EXPECT_DOUBLE_EQ(map_center_distance(none, gt).map, 0.0);
  EXPECT_THROW(map_center_distance(pred, gt, {}), ConfigError);
}

TEST(Map, HandComputedAp) {
  // One class, two GT; ranked predictions: hit, miss, hit -> AP = (1/1 + 2/3) / 2.
  std::vector<std::vector<BevBox>> gt{{box(0, 0, 1, 1), box(10, 0, 1, 1)}};
  std::vector<std::vector<BevBox>> pred{{box(0.2, 0, 1, 1, 0, 0.9), box(5, 5, 1, 1, 0, 0.8), box(10, 0.3, 1, 1, 0, 0.7)}};
  EXPECT_NEAR(class_ap(pred, gt, 0, 0.5), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  // A duplicate on an already-matched GT is a false positive.
  pred[0].push_back(box(0.1, 0, 1, 1, 0, 0.95));
  EXPECT_NEAR(class_ap(pred, gt, 0, 0.5), (1.0 + 2.0 / 4.0) / 2.0, 1e-15);
}

TEST(Map, MonotoneInThreshold) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0, 20), jitter(-2, 2), u;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<BevBox>> gt(4), pred(4);
    for (std::size_t s = 0; s < gt.size(); ++s) {
      for (int i = 0; i < 5; ++i) gt[s].push_back(box(pos(rng), pos(rng), 2, 2, i % 2));
      for (const auto& g : gt[s])
        if (u(rng) < 0.8) pred[s].push_back(box(g.cx + jitter(rng), g.cy + jitter(rng), 2, 2, g.class_id, u(rng)));
      for (int i = 0; i < 3; ++i) pred[s].push_back(box(pos(rng), pos(rng), 2, 2, i % 2, u(rng)));
    }
    double prev = -1.0;
    for (double t : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) {
      const double m = map_center_distance(pred, gt, {t}).map;
      EXPECT_GE(m, prev - 1e-15);
      prev = m;
    }
  }
}

TEST(Serialization, CurveCsvAndJson) {
  const auto r = roc_auc(samples({0.9, 0.8, 0.7, 0.1}, {1, 0, 1, 0}));
  std::ostringstream os;
  write_curve_csv(os, r, "fpr", "tpr");
  EXPECT_EQ(os.str().substr(0, 8), "fpr,tpr\n");
  const auto j = to_json(precision_recall(1, 2, 2));
  EXPECT_DOUBLE_EQ(j.at("f1").get<double>(), 0.5);
}
