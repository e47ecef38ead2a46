#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "edlbev/evidential.hpp"
#include "edlbev/oracle.hpp"

using namespace edlbev;

namespace {

EvidenceGrid single(double a, double b) { return EvidenceGrid(Tensor3({1, 1, 1}, a), Tensor3({1, 1, 1}, b)); }

TargetGrid single_target(double y, double y_soft) { return TargetGrid(Tensor3({1, 1, 1}, y), Tensor3({1, 1, 1}, y_soft)); }

struct RandomCase {
  EvidenceGrid grid;
  TargetGrid target;
};

RandomCase random_case(std::mt19937_64& rng, Shape3 shape, double lo = 1.0, double hi = 20.0) {
  std::uniform_real_distribution<double> ev(lo, hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tensor3 a(shape), b(shape), y(shape), ys(shape);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = ev(rng);
    b[i] = ev(rng);
    y[i] = unit(rng) < 0.2 ? 1.0 : 0.0;
    ys[i] = y[i] == 1.0 ? 1.0 : 0.95 * unit(rng);
  }
  return {EvidenceGrid(std::move(a), std::move(b)), TargetGrid(std::move(y), std::move(ys))};
}

} // namespace

TEST(EvidenceFromLogits, ZeroLogits) {
  const Tensor3 zero({2, 3, 3}, 0.0);
  const auto g = evidence_from_logits(zero, zero);
  for (double v : g.alpha.values()) EXPECT_NEAR(v, 1.0 + std::log(2.0), 1e-15);
  for (double v : g.beta.values()) EXPECT_NEAR(v, 1.0 + std::log(2.0), 1e-15);
}

TEST(EvidenceFromLogits, Asymptotes) {
  Tensor3 ea({1, 1, 2}, 0.0), eb({1, 1, 2}, 0.0);
  ea[0] = 100.0;
  ea[1] = -100.0;
  const auto g = evidence_from_logits(ea, eb);
  EXPECT_NEAR(g.alpha[0], 101.0, 1e-12);
  EXPECT_GE(g.alpha[1], 1.0);
  EXPECT_NEAR(g.alpha[1], 1.0, 1e-40);
}

TEST(EvidenceFromLogits, ShapeMismatch) {
  EXPECT_THROW(evidence_from_logits(Tensor3({1, 2, 2}), Tensor3({1, 2, 3})), ShapeError);
}

TEST(Predict, ProbabilityAndUncertainty) {
  EXPECT_DOUBLE_EQ(predict_prob(single(1, 1))[0], 0.5);
  EXPECT_DOUBLE_EQ(predict_prob(single(9, 1))[0], 0.9);
  EXPECT_DOUBLE_EQ(predict_prob(single(1, 9))[0], 0.1);
  EXPECT_DOUBLE_EQ(predict_uncertainty(single(1, 1))[0], 0.5);
  EXPECT_DOUBLE_EQ(predict_uncertainty(single(9, 1))[0], 0.1);
  EXPECT_DOUBLE_EQ(predict_uncertainty(single(50, 50))[0], 0.01);
}

TEST(Predict, UncertaintyStrictlyDecreasingInEvidence) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ev(1.0, 50.0), step(1e-3, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double a = ev(rng), b = ev(rng), d = step(rng);
    const double u = predict_uncertainty(single(a, b))[0];
    EXPECT_LT(predict_uncertainty(single(a + d, b))[0], u);
    EXPECT_LT(predict_uncertainty(single(a, b + d))[0], u);
  }
}

TEST(Predict, DerivedMapsStayInRange) {
  std::mt19937_64 rng(8);
  const auto c = random_case(rng, {3, 6, 6}, 1.0 + 1e-9, 200.0);
  const Tensor3 prob = predict_prob(c.grid);
  const Tensor3 unc = predict_uncertainty(c.grid);
  for (double p : prob.values()) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  for (double u : unc.values()) {
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 0.5);
  }
}

TEST(MultilabelLoss, ClosedFormExamples) {
  EXPECT_NEAR(edl_multilabel_loss(single(1, 1), single_target(1, 1)), 1.0, 1e-12);
  EXPECT_NEAR(edl_multilabel_loss(single(3, 2), single_target(1, 1)), 7.0 / 12.0, 1e-12);
}

TEST(MultilabelLoss, MatchesQuadratureOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ev(0.5, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double a = ev(rng), b = ev(rng);
    for (double y : {0.0, 1.0}) {
      const double closed = edl_multilabel_loss(single(a, b), single_target(y, y));
      EXPECT_NEAR(closed, oracle::bayes_risk(a, b, y), 1e-6) << "a=" << a << " b=" << b << " y=" << y;
    }
  }
}

TEST(DetectionLoss, ReducesToMultilabelWithZeroExponents) {
  std::mt19937_64 rng(99);
  const LossConfig cfg{0.0, 0.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    const auto c = random_case(rng, {3, 5, 7}, 0.5, 30.0);
    const double ml = edl_multilabel_loss(c.grid, c.target);
    EXPECT_NEAR(edl_detection_loss(c.grid, c.target, cfg), ml, 1e-12 * std::abs(ml));
  }
}

TEST(DetectionLoss, FocalExample) {
  const LossConfig cfg{2.0, 4.0, 0.0};
  EXPECT_NEAR(edl_detection_loss(single(1, 1), single_target(1, 1), cfg), 0.25, 1e-12);
}

TEST(DetectionLoss, NegativeAtAnotherCenterVanishes) {
  const LossConfig cfg{2.0, 4.0, 0.0};
  EXPECT_EQ(edl_detection_loss(single(4, 2), single_target(0, 1), cfg), 0.0);
}

TEST(DetectionLoss, Nonnegative) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    const auto c = random_case(rng, {2, 4, 4}, 0.5, 40.0);
    EXPECT_GE(edl_detection_loss(c.grid, c.target, LossConfig{}), 0.0);
    EXPECT_GE(edl_multilabel_loss(c.grid, c.target), 0.0);
  }
}

TEST(AdjustedEvidence, Substitution) {
  auto pos = adjusted_evidence(single(3, 2), single_target(1, 1));
  EXPECT_EQ(pos.alpha[0], 1.0);
  EXPECT_EQ(pos.beta[0], 2.0);
  auto neg = adjusted_evidence(single(3, 2), single_target(0, 0.3));
  EXPECT_EQ(neg.alpha[0], 3.0);
  EXPECT_EQ(neg.beta[0], 1.0);
  for (double y : {0.0, 1.0}) {
    auto fixed = adjusted_evidence(single(1, 1), single_target(y, y));
    EXPECT_EQ(fixed.alpha[0], 1.0);
    EXPECT_EQ(fixed.beta[0], 1.0);
  }
}

TEST(KlRegularizer, ClosedFormExamples) {
  EXPECT_EQ(kl_regularizer(single(1, 1)), 0.0);
  EXPECT_NEAR(kl_regularizer(single(2, 1)), std::log(2.0) - 0.5, 1e-12);
}

TEST(KlRegularizer, MatchesQuadratureOracle) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ev(1.0, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double a = ev(rng), b = ev(rng);
    const double closed = kl_regularizer(single(a, b));
    EXPECT_GE(closed, 0.0);
    EXPECT_NEAR(closed, oracle::kl_uniform(a, b), 1e-6) << "a=" << a << " b=" << b;
  }
}

TEST(KlRegularizer, PenalizesFalsePositiveEvidence) {
  // y = 0: adjusted beta is 1, so growing alpha is pure misleading evidence.
  const auto t = single_target(0, 0.2);
  double prev = kl_regularizer(adjusted_evidence(single(1.0, 7.0), t));
  for (double a = 1.25; a < 30.0; a += 0.25) {
    const double v = kl_regularizer(adjusted_evidence(single(a, 7.0), t));
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(CombinedLoss, ZeroLambdaIsDetectionLoss) {
  std::mt19937_64 rng(6);
  const auto c = random_case(rng, {3, 4, 4});
  const LossConfig cfg{2.0, 4.0, 0.0};
  EXPECT_EQ(combined_loss(c.grid, c.target, cfg), edl_detection_loss(c.grid, c.target, cfg));
}

TEST(CombinedLoss, PaperLambdaWithTrivialAdjustedEvidence) {
  // alpha = beta = 1 gives adjusted evidence (1, 1) everywhere, so the KL term is zero.
  std::mt19937_64 rng(6);
  auto c = random_case(rng, {3, 4, 4});
  const EvidenceGrid ones(Tensor3(c.grid.shape(), 1.0), Tensor3(c.grid.shape(), 1.0));
  const LossConfig cfg{2.0, 4.0, 1e-4};
  EXPECT_EQ(combined_loss(ones, c.target, cfg), edl_detection_loss(ones, c.target, cfg));
}

TEST(CombinedLoss, Additivity) {
  std::mt19937_64 rng(12);
  const LossConfig cfg{2.0, 4.0, 1e-2};
  for (int i = 0; i < 10; ++i) {
    const auto c = random_case(rng, {3, 6, 6});
    const double parts =
        edl_detection_loss(c.grid, c.target, cfg) + cfg.lambda * kl_regularizer(adjusted_evidence(c.grid, c.target));
    EXPECT_NEAR(combined_loss(c.grid, c.target, cfg), parts, 1e-12 * parts);
  }
}

TEST(CombinedLossGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  const double h = 1e-5;
  int checked = 0;
  for (double gamma : {0.0, 1.0, 2.0}) {
    for (double eta : {0.0, 2.0, 4.0}) {
      for (double lambda : {0.0, 1e-4, 1e-2}) {
        const LossConfig cfg{gamma, eta, lambda};
        const auto c = random_case(rng, {2, 3, 3});
        const auto grad = combined_loss_grad(c.grid, c.target, cfg);
        for (std::size_t i = 0; i < c.grid.alpha.size(); ++i) {
          const double a = c.grid.alpha[i], b = c.grid.beta[i], y = c.target.y[i], ys = c.target.y_soft[i];
          const double fda = (term::combined(a + h, b, y, ys, cfg) - term::combined(a - h, b, y, ys, cfg)) / (2 * h);
          const double fdb = (term::combined(a, b + h, y, ys, cfg) - term::combined(a, b - h, y, ys, cfg)) / (2 * h);
          EXPECT_LT(std::abs(grad.d_alpha[i] - fda) / std::max({std::abs(fda), std::abs(grad.d_alpha[i]), 1e-8}),
                    1e-4);
          EXPECT_LT(std::abs(grad.d_beta[i] - fdb) / std::max({std::abs(fdb), std::abs(grad.d_beta[i]), 1e-8}),
                    1e-4);
          ++checked;
        }
      }
    }
  }
  EXPECT_EQ(checked, 27 * 18);
}

TEST(CombinedLossGrad, PureBayesRiskPositiveCell) {
  const LossConfig cfg{0.0, 0.0, 0.0};
  const double a = 3.5, b = 2.25;
  const auto g = combined_loss_grad(single(a, b), single_target(1, 1), cfg);
  EXPECT_NEAR(g.d_alpha[0], specfun::trigamma(a + b) - specfun::trigamma(a), 1e-14);
  EXPECT_NEAR(g.d_beta[0], specfun::trigamma(a + b), 1e-14);
}

TEST(CombinedLossGrad, VanishesForConfidentPositive) {
  const LossConfig cfg{2.0, 4.0, 0.0};
  double prev = 1e300;
  for (double a : {10.0, 100.0, 1000.0, 10000.0}) {
    const auto g = combined_loss_grad(single(a, 2.0), single_target(1, 1), cfg);
    const double mag = std::hypot(g.d_alpha[0], g.d_beta[0]);
    EXPECT_LT(mag, prev);
    prev = mag;
  }
  EXPECT_LT(prev, 1e-10);
}

TEST(GaussianFocal, GradientMatchesFiniteDifferences) {
  const LossConfig cfg{2.0, 4.0, 0.0};
  const double h = 1e-6;
  for (double z : {-6.0, -1.3, 0.0, 0.7, 4.2}) {
    for (auto [y, ys] : {std::pair{1.0, 1.0}, std::pair{0.0, 0.4}, std::pair{0.0, 0.0}}) {
      const double fd =
          (term::gaussian_focal(z + h, y, ys, cfg) - term::gaussian_focal(z - h, y, ys, cfg)) / (2 * h);
      EXPECT_NEAR(term::gaussian_focal_grad(z, y, ys, cfg), fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Entropy, Values) {
  EXPECT_NEAR(entropy_score(Tensor3({1, 1, 1}, 0.5))[0], std::log(2.0), 1e-15);
  EXPECT_LT(entropy_score(Tensor3({1, 1, 1}, 0.999))[0], 0.01);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(1e-6, 1.0 - 1e-6);
  for (int i = 0; i < 50; ++i) {
    const double p = unit(rng);
    EXPECT_NEAR(term::binary_entropy(p), term::binary_entropy(1.0 - p), 1e-12);
  }
}
