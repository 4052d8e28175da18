#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "astars/bench.hpp"
#include "astars/core.hpp"
#include "astars/learning.hpp"
#include "astars/stars.hpp"

using namespace astars;

namespace {

double sphere(const Point& x) { return x.squaredNorm(); }

}  // namespace

TEST(Oracle, SphereAtMinimizerIsZero) {
  NoisyOracle oracle(4, sphere, NoiseModel{});
  RngStream rng(1, 0);
  EXPECT_EQ(oracle.evaluate(Point::Zero(4), rng), 0.0);
  EXPECT_EQ(oracle.eval_count(), 1u);
}

TEST(Oracle, Example2AtAllOnes) {
  const auto pb = make_problem("ex2", {.sigma2 = 0.0});
  NoisyOracle oracle = pb.make_oracle();
  RngStream rng(1, 0);
  EXPECT_EQ(oracle.evaluate(Point::Ones(20), rng), 10.0);
}

TEST(Oracle, Example5AtAllOnes) {
  const auto pb = make_problem("ex5", {.sigma2 = 0.0});
  NoisyOracle oracle = pb.make_oracle();
  RngStream rng(1, 0);
  // sum of 2^{(-1)^(i-1) (i-1)} for i = 1..10
  double expected = 0.0;
  for (int i = 1; i <= 10; ++i) {
    expected += std::pow(2.0, (i % 2 == 1 ? 1 : -1) * (i - 1));
  }
  EXPECT_EQ(expected, 341.666015625);
  EXPECT_EQ(oracle.evaluate(Point::Ones(10), rng), expected);
}

TEST(Oracle, DimensionMismatchRejected) {
  NoisyOracle oracle(3, sphere, NoiseModel{});
  RngStream rng(1, 0);
  EXPECT_THROW(oracle.evaluate(Point::Zero(2), rng), std::invalid_argument);
}

TEST(Oracle, CountsEveryCallAndHidesTrueValueWhenAsked) {
  NoisyOracle hidden(2, sphere, NoiseModel{NoiseKind::Additive, 1.0}, false);
  RngStream rng(3, 0);
  for (int i = 0; i < 5; ++i) {
    hidden.evaluate(Point::Ones(2), rng);
  }
  EXPECT_EQ(hidden.eval_count(), 5u);
  EXPECT_FALSE(hidden.true_value(Point::Ones(2)).has_value());

  NoisyOracle open(2, sphere, NoiseModel{NoiseKind::Additive, 1.0});
  EXPECT_EQ(open.true_value(Point::Ones(2)), 2.0);
  EXPECT_EQ(open.eval_count(), 0u);
}

TEST(Oracle, AdditiveNoiseHasRequestedVariance) {
  const double sigma2 = 0.25;
  NoisyOracle oracle(1, [](const Point&) { return 3.0; }, NoiseModel{NoiseKind::Additive, sigma2});
  RngStream rng(11, 0);
  const int n = 100000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = oracle.evaluate(Point::Zero(1), rng) - 3.0;
    s += e;
    s2 += e * e;
  }
  EXPECT_NEAR(s / n, 0.0, 3.0 * std::sqrt(sigma2 / n));
  EXPECT_NEAR(s2 / n, sigma2, 3.0 * sigma2 * std::sqrt(2.0 / n));
}

TEST(Oracle, MultiplicativeNoiseStaysInsideSupport) {
  NoiseModel noise{NoiseKind::Multiplicative, 0.5};
  NoisyOracle oracle(1, [](const Point&) { return 2.0; }, noise);
  RngStream rng(5, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = oracle.evaluate(Point::Zero(1), rng);
    EXPECT_GT(v, 2.0 * (1.0 - noise.support_bound_a));
    EXPECT_LT(v, 2.0 * (1.0 + noise.support_bound_a));
  }
}

TEST(Rng, ZeroLengthRejected) {
  RngStream rng(1, 0);
  EXPECT_THROW(rng.standard_normal(0), std::invalid_argument);
}

TEST(Rng, MeanAndVarianceOfStandardNormal) {
  RngStream rng(2024, 7);
  const std::size_t n = 100000;
  const Vector z = rng.standard_normal(n);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / static_cast<double>(n - 1);
  EXPECT_LE(std::abs(mean), 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_LE(std::abs(var - 1.0), 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(Rng, SameSeedAndStreamGiveSameSequence) {
  RngStream a(99, 3);
  RngStream b(99, 3);
  EXPECT_EQ(a.standard_normal(1000), b.standard_normal(1000));
}

TEST(Rng, DifferentStreamsDiffer) {
  RngStream a(99, 3);
  RngStream b(99, 4);
  EXPECT_NE(a.standard_normal(10), b.standard_normal(10));
}

TEST(Rng, UnitVectorHasUnitNorm) {
  RngStream rng(1, 1);
  EXPECT_NEAR(rng.unit_vector(17).norm(), 1.0, 1e-14);
}

TEST(Ledger, OneRecordGivesLengthOne) {
  SampleLedger ledger;
  EXPECT_TRUE(ledger.record(Point::Zero(2), 1.0, SamplePhase::BurnIn));
  EXPECT_EQ(ledger.size(), 1u);
}

TEST(Ledger, NonFiniteValueRejectedAndCounted) {
  SampleLedger ledger;
  EXPECT_FALSE(ledger.record(Point::Zero(2), std::numeric_limits<double>::quiet_NaN(),
                             SamplePhase::BurnIn));
  EXPECT_FALSE(ledger.record(Point::Zero(2), std::numeric_limits<double>::infinity(),
                             SamplePhase::BurnIn));
  EXPECT_EQ(ledger.size(), 0u);
  EXPECT_EQ(ledger.rejected(), 2u);
}

TEST(Ledger, StarsStepAddsTwoEntries) {
  NoisyOracle oracle(3, sphere, NoiseModel{NoiseKind::Additive, 1e-4});
  RngStream rng(4, 0);
  SampleLedger ledger;
  StarsState s = init_state(oracle, Point::Ones(3), StepRule{1e-4, 2.0, 3}, rng, ledger);
  const std::size_t before = ledger.size();
  ASSERT_TRUE(stars_step(s, oracle, rng, ledger).has_value());
  EXPECT_EQ(ledger.size(), before + 2);
}

TEST(Ledger, EcNoiseRunTagsEightEntries) {
  NoisyOracle oracle(5, sphere, NoiseModel{NoiseKind::Additive, 1e-4});
  RngStream rng(4, 0);
  SampleLedger ledger;
  ecnoise(oracle, Point::Ones(5), rng.unit_vector(5), 0.01, 8, rng, ledger);
  EXPECT_EQ(ledger.size(), 8u);
  EXPECT_EQ(ledger.count(SamplePhase::EcNoise), 8u);
  const Matrix pts = ledger.points();
  EXPECT_EQ(pts.rows(), 8);
  EXPECT_EQ(pts.cols(), 5);
}
