#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "edlbev/tasks.hpp"

using namespace edlbev;
using namespace edlbev::tasks;

namespace {

const std::vector<std::array<double, 2>> kSizes{{3.0, 3.0}, {2.0, 2.0}, {4.0, 2.0}};

BevBox gt_box(double cx, double cy, double w, double h, int cls) {
  return BevBox{cx, cy, w, h, cls, std::nullopt, Provenance::GroundTruth};
}

Tensor3 random_map(Shape3 s, std::uint64_t seed, double lo = 0.0, double hi = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor3 t(s);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

} // namespace

TEST(SceneUncertainty, Examples) {
  EXPECT_DOUBLE_EQ(scene_uncertainty(Tensor3({3, 4, 4}, 0.17)), 0.17);
  Tensor3 half({2, 2, 2}, 0.1);
  for (std::size_t i = 0; i < 4; ++i) half[i] = 0.3;
  EXPECT_NEAR(scene_uncertainty(half), 0.2, 1e-15);
}

TEST(SceneUncertainty, PermutationInvariantAndBounded) {
  auto u = random_map({3, 8, 8}, 1);
  const double s = scene_uncertainty(u);
  auto v = u.vector();
  std::mt19937_64 rng(2);
  std::shuffle(v.begin(), v.end(), rng);
  EXPECT_NEAR(scene_uncertainty(Tensor3(u.shape(), v)), s, 1e-15);
  EXPECT_GE(s, *std::min_element(v.begin(), v.end()));
  EXPECT_LE(s, *std::max_element(v.begin(), v.end()));
}

TEST(DecodeBoxes, Examples) {
  Tensor3 p({3, 10, 10}, 0.01);
  EXPECT_TRUE(decode_boxes(p, 0.05, kSizes).empty());

  p(1, 4, 6) = 0.9;
  auto boxes = decode_boxes(p, 0.05, kSizes);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].cx, 6.0);
  EXPECT_EQ(boxes[0].cy, 4.0);
  EXPECT_EQ(boxes[0].class_id, 1);
  EXPECT_EQ(boxes[0].w, 2.0);
  EXPECT_EQ(*boxes[0].score, 0.9);
  EXPECT_EQ(boxes[0].provenance, Provenance::Predicted);

  p(1, 4, 9) = 0.8;
  EXPECT_EQ(decode_boxes(p, 0.05, kSizes).size(), 2u);
}

TEST(DecodeBoxes, TiesGoToSmallerIndex) {
  Tensor3 p({1, 6, 6}, 0.0);
  p(0, 2, 2) = 0.7;
  p(0, 2, 3) = 0.7;
  p(0, 3, 2) = 0.7;
  const auto boxes = decode_boxes(p, 0.1, {{1.0, 1.0}});
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].cy, 2.0);
  EXPECT_EQ(boxes[0].cx, 2.0);
}

TEST(DecodeBoxes, InvalidThresholdRejected) {
  Tensor3 p({3, 4, 4}, 0.0);
  EXPECT_THROW(decode_boxes(p, 0.0, kSizes), ConfigError);
  EXPECT_THROW(decode_boxes(p, 1.0, kSizes), ConfigError);
}

TEST(BoxUncertainty, Examples) {
  EXPECT_DOUBLE_EQ(box_uncertainty(Tensor3({3, 8, 8}, 0.21), gt_box(3, 3, 3, 2, 0)), 0.21);
  Tensor3 u({3, 8, 8}, 0.45);
  u(0, 4, 4) = 0.4;
  u(1, 4, 4) = 0.1;
  u(2, 4, 4) = 0.3;
  EXPECT_DOUBLE_EQ(box_uncertainty(u, gt_box(4, 4, 1, 1, 0)), 0.1);
}

TEST(BoxUncertainty, EnlargingIntoHigherValuesNeverDecreases) {
  Tensor3 u({2, 9, 9}, 0.0);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t r = 0; r < 9; ++r)
      for (std::size_t k = 0; k < 9; ++k) {
        const double ring = std::max(std::abs(double(r) - 4.0), std::abs(double(k) - 4.0));
        u(c, r, k) = 0.05 + 0.1 * ring + 0.01 * double(c);
      }
  double prev = 0.0;
  for (double w : {1.0, 3.0, 5.0, 7.0}) {
    const double v = box_uncertainty(u, gt_box(4, 4, w, w, 0));
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(BoxUncertainty, BoundedByFootprintValues) {
  const auto u = random_map({3, 10, 10}, 3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(1, 8), size(0.5, 4);
  for (int i = 0; i < 100; ++i) {
    const auto b = gt_box(pos(rng), pos(rng), size(rng), size(rng), 0);
    const auto f = footprint(b, 10, 10);
    if (f.cells() == 0) {
      EXPECT_THROW(box_uncertainty(u, b), DataError);
      continue;
    }
    double lo = 1, hi = 0;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t r = f.r0; r < f.r1; ++r)
        for (std::size_t k = f.k0; k < f.k1; ++k) {
          lo = std::min(lo, u(c, r, k));
          hi = std::max(hi, u(c, r, k));
        }
    const double v = box_uncertainty(u, b);
    EXPECT_GE(v, lo);
    EXPECT_LE(v, hi);
  }
}

TEST(BoxUncertainty, DegenerateBoxRejected) {
  EXPECT_THROW(box_uncertainty(Tensor3({1, 5, 5}, 0.1), gt_box(2.5, 2.5, 0.5, 0.5, 0)), DataError);
}

TEST(LabelBoxErrors, Examples) {
  const auto g = BevBox::from_corners(0, 0, 2, 2, 0);
  auto same = g;
  same.provenance = Provenance::Predicted;
  auto r = label_box_errors({same}, {g}, 0.3);
  EXPECT_DOUBLE_EQ(r[0].best_iou, 1.0);
  EXPECT_FALSE(r[0].erroneous);

  r = label_box_errors({BevBox::from_corners(5, 5, 6, 6, 0)}, {g}, 0.3);
  EXPECT_DOUBLE_EQ(r[0].best_iou, 0.0);
  EXPECT_TRUE(r[0].erroneous);

  r = label_box_errors({BevBox::from_corners(1, 0, 3, 2, 0)}, {g}, 0.3);
  EXPECT_DOUBLE_EQ(r[0].best_iou, 1.0 / 3.0);
  EXPECT_FALSE(r[0].erroneous);

  // Other-class overlap does not count.
  r = label_box_errors({BevBox::from_corners(0, 0, 2, 2, 1)}, {g}, 0.3);
  EXPECT_TRUE(r[0].erroneous);
}

TEST(MissedGroundTruth, NeedsSameClassOverlap) {
  const std::vector<BevBox> gt{gt_box(3, 3, 2, 2, 0), gt_box(10, 10, 2, 2, 1)};
  const std::vector<BevBox> pred{gt_box(3.5, 3, 2, 2, 0), gt_box(10, 10, 2, 2, 0)};
  const auto missed = missed_ground_truth(pred, gt);
  ASSERT_EQ(missed.size(), 1u);
  EXPECT_EQ(missed[0].class_id, 1);
}

TEST(MissCandidates, Examples) {
  EXPECT_TRUE(miss_candidates(Tensor3({3, 4, 4}, 0.5), 0.05).empty());
  EXPECT_EQ(miss_candidates(Tensor3({3, 4, 4}, 0.01), 0.05).size(), 48u);
  auto p = random_map({3, 6, 6}, 5, 0.0, 0.1);
  for (const auto& c : miss_candidates(p)) EXPECT_LT(p(std::size_t(c.class_id), c.row, c.col), 0.05);
  const auto mask = gate_mask(p);
  double n = 0;
  for (double v : mask.values()) n += v;
  EXPECT_EQ(std::size_t(n), miss_candidates(p).size());
}

TEST(MissHead, ZeroWeightsGiveOneHalf) {
  auto m = net::init_head({8 + 6, 6}, net::HeadKind::Evidential, 1);
  m.layers[0].weight.setZero();
  const auto e = random_map({8, 5, 5}, 6);
  const auto p = random_map({3, 5, 5}, 7);
  const auto u = random_map({3, 5, 5}, 8);
  const auto p_miss = miss_head_forward(m, e, p, u);
  for (double v : p_miss.values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(MissHead, InputOrderIsFeaturesThenProbabilityThenUncertainty) {
  const auto e = random_map({4, 3, 3}, 9);
  const auto p = random_map({2, 3, 3}, 10);
  const auto u = random_map({2, 3, 3}, 11);
  const auto x = miss_head_inputs(e, p, u);
  ASSERT_EQ(x.channels(), 8u);
  EXPECT_EQ(x(0, 1, 2), e(0, 1, 2));
  EXPECT_EQ(x(3, 2, 2), e(3, 2, 2));
  EXPECT_EQ(x(4, 1, 1), p(0, 1, 1));
  EXPECT_EQ(x(5, 0, 1), p(1, 0, 1));
  EXPECT_EQ(x(6, 2, 0), u(0, 2, 0));
  EXPECT_EQ(x(7, 1, 2), u(1, 1, 2));

  const auto m = net::init_head({8, 6, 4}, net::HeadKind::Evidential, 12);
  const auto a = miss_head_forward(m, e, p, u);
  EXPECT_EQ(a, miss_head_forward(m, e, p, u));
  EXPECT_NE(a, miss_head_forward(m, e, u, p));
  EXPECT_THROW(miss_head_forward(m, random_map({5, 3, 3}, 13), p, u), ShapeError);
}

TEST(SelectMissed, ExactHitAndConventions) {
  std::vector<MissCandidate> c;
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t k = 0; k < 6; ++k) c.push_back({r, k, 0, 0.01 * double(r * 6 + k), std::nullopt});
  c.push_back({1, 1, 0, 0.99, std::nullopt});
  const auto s = select_missed(c, 15, {gt_box(1, 1, 2, 2, 0)}, 2.0);
  EXPECT_EQ(s.selected, 15u);
  EXPECT_EQ(s.matches, 1u);
  EXPECT_DOUBLE_EQ(s.pr.precision, 1.0 / 15.0);
  EXPECT_DOUBLE_EQ(s.pr.recall, 1.0);
  EXPECT_TRUE(*s.picks.front().matched);

  const auto none = select_missed(c, 15, {}, 2.0);
  EXPECT_DOUBLE_EQ(none.pr.precision, 0.0);
  EXPECT_DOUBLE_EQ(none.pr.recall, 1.0);
  EXPECT_DOUBLE_EQ(none.pr.f1, 0.0);

  EXPECT_THROW(select_missed(c, 0, {}, 2.0), ConfigError);
  EXPECT_THROW(select_missed(c, 3, {}, 0.0), ConfigError);
}

TEST(SelectMissed, TiesAndMatchingProperties) {
  std::vector<MissCandidate> c{{3, 3, 1, 0.5, {}}, {3, 3, 0, 0.5, {}}, {2, 9, 0, 0.5, {}}, {0, 0, 0, 0.1, {}}};
  const auto s = select_missed(c, 3, {gt_box(3, 3, 1, 1, 0)}, 1.0);
  ASSERT_EQ(s.picks.size(), 3u);
  EXPECT_EQ(s.picks[0].row, 2u); // (2,9) < (3,3)
  EXPECT_EQ(s.picks[1].class_id, 0);
  EXPECT_EQ(s.matches, 1u); // one GT matches at most one candidate

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<MissCandidate> cand;
    for (std::size_t i = 0; i < 40; ++i) cand.push_back({i % 8, i / 8, 0, u(rng), {}});
    std::vector<BevBox> gt;
    for (int g = 0; g < 3; ++g) gt.push_back(gt_box(8 * u(rng), 5 * u(rng), 1, 1, 0));
    const auto r = select_missed(cand, 7, gt, 2.0);
    EXPECT_LE(r.matches, std::min<std::size_t>(7, gt.size()));
    EXPECT_NEAR(r.pr.precision * 7.0, double(r.matches), 1e-12);
  }
}

TEST(SelectMissed, PoolSumsCounts) {
  MissSelection a, b;
  a.selected = 15;
  a.matches = 2;
  a.missed = 4;
  b.selected = 15;
  b.matches = 0;
  b.missed = 0;
  const auto t = pool({a, b});
  EXPECT_DOUBLE_EQ(t.pr.precision, 2.0 / 30.0);
  EXPECT_DOUBLE_EQ(t.pr.recall, 0.5);
}
