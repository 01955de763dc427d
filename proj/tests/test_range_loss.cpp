//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "molrange/error.hpp"
#include "molrange/models/range_gan.hpp"
#include "molrange/range_spec.hpp"
#include "support/gradcheck.hpp"

namespace molrange {
namespace {

long double sigmoid_ld(long double x) {
  return 1.0L / (1.0L + std::exp(-x));
}

// Per-sample loop in extended precision straight from the definition.
double brute_range_loss(const std::vector<double> &ys, const RangeSpec &s) {
  long double total = 0;
  int count = 0;
  for (double y: ys) {
    if ((y - s.y_lb) * (y - s.y_ub) < 0)
      continue;
    const long double p = sigmoid_ld(s.phi * (y - s.y_lb)) - sigmoid_ld(s.phi * (y - s.y_ub));
    total += -std::log(p);
    ++count;
  }
  return count == 0 ? 0.0 : static_cast<double>(total / count);
}

RangeSpec spec(double lb, double ub, double phi = 10.0) {
  RangeSpec s;
  s.y_lb = lb;
  s.y_ub = ub;
  s.phi = phi;
  return s;
}

TEST(Satisfaction, ClosedFormAtMidpoint) {
  // At the midpoint p = tanh(phi (ub - lb) / 4).
  EXPECT_NEAR(satisfaction_probability(0.75, spec(0.5, 1.0)), std::tanh(10 * 0.5 / 4), 1e-9);
  EXPECT_NEAR(satisfaction_probability(0.5, spec(0.0, 1.0)), std::tanh(10 * 1.0 / 4), 1e-9);
  EXPECT_NEAR(satisfaction_probability(0.75, spec(0.5, 1.0)), 0.8483, 5e-5);
  EXPECT_NEAR(satisfaction_probability(0.5, spec(0.0, 1.0)), 0.9866, 5e-5);
}

TEST(Satisfaction, PrintedFormIsNegativeEverywhere) {
  const RangeSpec s = spec(0.5, 1.0);
  for (double y = -2.0; y <= 3.0; y += 0.01) {
    const double printed = printed_satisfaction_probability(y, s);
    EXPECT_LT(printed, 0.0) << y;
    EXPECT_NEAR(printed, -satisfaction_probability(y, s), 1e-12) << y;
  }
}

TEST(Satisfaction, NllIsStableFarOutside) {
  const RangeSpec s = spec(0.5, 1.0);
  const double far = satisfaction_nll(-100.0, s);
  EXPECT_TRUE(std::isfinite(far));
  // Far below the range -log p ~ phi (lb - y) - log(1 - e^{-phi w}).
  EXPECT_NEAR(far, 10 * 100.5 - std::log1p(-std::exp(-5.0)), 1e-9);
  EXPECT_NEAR(satisfaction_nll(0.7, s), -std::log(satisfaction_probability(0.7, s)), 1e-12);
}

TEST(Satisfaction, NllGradientMatchesFiniteDifference) {
  const RangeSpec s = spec(0.5, 1.0);
  for (double y: { -1.0, 0.2, 0.5, 0.61, 0.75, 0.99, 1.0, 1.4, 3.0 }) {
    const double h = 1e-6;
    const double fd = (satisfaction_nll(y + h, s) - satisfaction_nll(y - h, s)) / (2 * h);
    EXPECT_NEAR(satisfaction_nll_grad(y, s), fd, 1e-6 * std::max(1.0, std::abs(fd))) << y;
  }
}

TEST(Compliance, BoundariesAreNonCompliant) {
  const RangeSpec s = spec(0.5, 1.0);
  EXPECT_TRUE(is_non_compliant(0.5, s));
  EXPECT_TRUE(is_non_compliant(1.0, s));
  EXPECT_FALSE(is_compliant(0.5, s));
  EXPECT_FALSE(is_compliant(1.0, s));
  EXPECT_TRUE(is_compliant(0.75, s));
  EXPECT_TRUE(is_non_compliant(0.2, s));
  EXPECT_TRUE(is_non_compliant(1.2, s));
}

TEST(RangeLoss, AllCompliantBatchIsExactlyZero) {
  const std::vector<double> ys { 0.51, 0.6, 0.75, 0.999 };
  EXPECT_EQ(range_loss(ys, spec(0.5, 1.0)), 0.0);
  const auto t = nn::Tensor<double>::from({ 4 }, ys, true);
  const auto l = models::range_loss(t, spec(0.5, 1.0));
  EXPECT_EQ(l.item(), 0.0);
}

TEST(RangeLoss, BoundarySampleContributes) {
  const RangeSpec s = spec(0.5, 1.0);
  const std::vector<double> ys { 0.75, 0.5 };
  EXPECT_NEAR(range_loss(ys, s), satisfaction_nll(0.5, s), 1e-15);
}

TEST(RangeLoss, MatchesPerSampleLoopOnRandomBatches) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> y(-1.0, 2.0);
  std::uniform_int_distribution<int> size(1, 64);
  for (int batch = 0; batch < 1000; ++batch) {
    const RangeSpec s = batch % 2 ? spec(0.5, 1.0) : spec(0.0, 1.0, 4.0);
    std::vector<double> ys(size(rng));
    for (double &v: ys)
      v = y(rng);
    if (batch % 5 == 0)
      ys[0] = s.y_lb;
    if (batch % 7 == 0)
      ys.back() = s.y_ub;
    const double expect = brute_range_loss(ys, s);
    ASSERT_NEAR(range_loss(ys, s), expect, 1e-12) << batch;
    const auto t = nn::Tensor<double>::from({ ys.size() }, ys);
    ASSERT_NEAR(models::range_loss(t, s).item(), expect, 1e-12) << batch;
  }
}

TEST(RangeLoss, StrictModeRejectsPrintedForm) {
  const RangeSpec s = spec(0.5, 1.0);
  const std::vector<double> ys { 0.2, 0.7 };
  try {
    range_loss(ys, s, true);
    FAIL() << "expected NegativeProbability";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNegativeProbability);
  }
  const std::vector<double> inside { 0.7 };
  EXPECT_EQ(range_loss(inside, s, true), 0.0);
}

TEST(RangeSpec, Validation) {
  EXPECT_THROW(spec(1.0, 0.5).validate(), Error);
  EXPECT_THROW(spec(0.0, 1.0, 0.0).validate(), Error);
  RangeSpec s;
  s.lambda1 = -1;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_NO_THROW(RangeSpec {}.validate());
}

TEST(RangeLoss, TensorGradientMatchesScalarGradient) {
  const RangeSpec s = spec(0.5, 1.0);
  const std::vector<double> ys { 0.1, 0.7, 1.3, 0.5, -0.4 };
  auto t = nn::Tensor<double>::from({ ys.size() }, ys, true);
  models::range_loss(t, s).backward();
  const double n = 4;  // non-compliant count
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double expect = is_non_compliant(ys[i], s) ? satisfaction_nll_grad(ys[i], s) / n : 0;
    EXPECT_NEAR(t.grad()[i], expect, 1e-12) << i;
  }
}

TEST(RangeLoss, TensorGradcheck) {
  const RangeSpec s = spec(0.5, 1.0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> y(-1.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> ys(8);
    for (double &v: ys)
      v = y(rng);
    const double err = testing::gradcheck(
        [&s](const std::vector<nn::Tensor<double>> &x) { return models::range_loss(x[0], s); },
        { nn::Tensor<double>::from({ 8 }, ys) });
    EXPECT_LT(err, 1e-4);
  }
}

TEST(RangeLoss, InteriorGradientOfPVanishesAtMidpoint) {
  const RangeSpec s = spec(0.0, 1.0);
  auto y = nn::Tensor<double>::from({}, { 0.5 }, true);
  const auto p = nn::sigmoid(nn::mul_scalar(nn::add_scalar(y, -s.y_lb), s.phi))
                 - nn::sigmoid(nn::mul_scalar(nn::add_scalar(y, -s.y_ub), s.phi));
  p.backward();
  EXPECT_LT(std::abs(y.grad()[0]), 1e-3);
  EXPECT_NEAR(p.item(), satisfaction_probability(0.5, s), 1e-15);
}

TEST(GeneratorObjective, LambdaZeroIsPlainWasserstein) {
  RangeSpec s = spec(0.5, 1.0);
  s.lambda1 = 0.0;
  const auto critic = nn::Tensor<double>::from({ 3 }, { 0.2, -0.4, 1.0 });
  const auto y = nn::Tensor<double>::from({ 3 }, { 0.1, 0.9, 2.0 });
  EXPECT_DOUBLE_EQ(models::generator_objective(critic, y, s).item(), -(0.2 - 0.4 + 1.0) / 3);
  s.lambda1 = 10.0;
  const double with_range = models::generator_objective(critic, y, s).item();
  EXPECT_NEAR(with_range, -(0.8 / 3) + 10 * brute_range_loss({ 0.1, 0.9, 2.0 }, s), 1e-12);
  EXPECT_DOUBLE_EQ(
      models::discriminator_objective(nn::Tensor<double>::from({ 2 }, { 1.0, 3.0 }), critic).item(),
      (0.8 / 3) - 2.0);
}

}  // namespace
}  // namespace molrange
