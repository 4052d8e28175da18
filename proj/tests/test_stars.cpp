#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "astars/active_stars.hpp"
#include "astars/bench.hpp"
#include "astars/stars.hpp"

using namespace astars;

namespace {

// Literal mu values below are 30-digit evaluations of the same formulas.
// d = dim, reference formulas written out independently of the library
double mu_additive(double s2, double l1, double d) {
  return std::pow(8.0 * s2 * d / (l1 * l1 * std::pow(d + 6.0, 3)), 0.25);
}

double step_size(double l1, double d) { return 1.0 / (4.0 * l1 * (d + 4.0)); }

void expect_same_history(const TrialHistory& a, const TrialHistory& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.rows()[i].fevals, b.rows()[i].fevals);
    EXPECT_EQ(a.rows()[i].fhat, b.rows()[i].fhat);
    EXPECT_EQ(a.rows()[i].ftrue, b.rows()[i].ftrue);
  }
}

}  // namespace

TEST(Hyper, AdditiveExample) {
  const Hyperparameters h = compute_hyperparameters(1e-4, 2.0, 20, NoiseKind::Additive);
  EXPECT_NEAR(h.mu, 0.0218416270341052111, 1e-16);
  EXPECT_NEAR(h.mu, mu_additive(1e-4, 2.0, 20.0), 1e-15);
  EXPECT_DOUBLE_EQ(h.h, 1.0 / 192.0);
  EXPECT_EQ(h.dim_used, 20);
}

TEST(Hyper, MultiplicativeExample) {
  const Hyperparameters h = compute_hyperparameters(1e-4, 2.0, 20, NoiseKind::Multiplicative, 1.0);
  EXPECT_NEAR(h.mu, 0.0259722705710035631, 1e-16);
  EXPECT_DOUBLE_EQ(h.h, 1.0 / 192.0);
}

TEST(Hyper, HalvedLipschitzEstimateDoublesStep) {
  const Hyperparameters exact = compute_hyperparameters(1e-4, 2.0, 20, NoiseKind::Additive);
  const Hyperparameters est =
      compute_hyperparameters(1e-4, 1.0, 20, NoiseKind::Additive, std::nullopt,
                              Provenance::Estimated);
  EXPECT_DOUBLE_EQ(est.h, 1.0 / 96.0);
  EXPECT_DOUBLE_EQ(est.h, 2.0 * exact.h);
  EXPECT_EQ(est.provenance, Provenance::Estimated);
}

TEST(Hyper, InvalidInputsRejected) {
  EXPECT_THROW(compute_hyperparameters(0.0, 2.0, 20, NoiseKind::Additive), std::invalid_argument);
  EXPECT_THROW(compute_hyperparameters(1e-4, -1.0, 20, NoiseKind::Additive),
               std::invalid_argument);
  EXPECT_THROW(compute_hyperparameters(1e-4, 2.0, 0, NoiseKind::Additive), std::invalid_argument);
  EXPECT_THROW(compute_hyperparameters(1e-4, 2.0, 20, NoiseKind::Multiplicative),
               std::invalid_argument);
}

TEST(Step, HandEvaluatedStepAlongFirstAxis) {
  // L1 = 8 in P = 2 gives h = 1/192; this sigma^2 gives mu = 0.02
  const double l1 = 8.0;
  const double sigma2 = std::pow(0.02, 4) * l1 * l1 * std::pow(8.0, 3) / (8.0 * 2.0);
  NoisyOracle oracle(2, [](const Point& x) { return x[0] * x[0]; }, NoiseModel{});
  RngStream rng(1, 0);
  SampleLedger ledger;
  StarsState s = init_state(oracle, Point::Unit(2, 0), StepRule{sigma2, l1, 2}, rng, ledger);
  const auto rec = take_step(s, oracle, rng, ledger, Vector::Unit(2, 0), SamplePhase::BurnIn);
  ASSERT_TRUE(rec.has_value());
  EXPECT_NEAR(rec->mu, 0.02, 1e-15);
  EXPECT_DOUBLE_EQ(rec->h, 1.0 / 192.0);
  EXPECT_NEAR(rec->slope, 2.02, 1e-12);
  EXPECT_NEAR(s.current[0], 1.0 - 2.02 / 192.0, 1e-12);
  EXPECT_NEAR(s.current[0], 0.98948, 5e-6);
  EXPECT_EQ(s.current[1], 0.0);
  EXPECT_EQ(s.k, 1u);
  EXPECT_EQ(oracle.eval_count(), 3u);
  EXPECT_EQ(ledger.size(), 3u);
}

TEST(Step, DirectionOrthogonalToGradient) {
  NoisyOracle oracle(2, [](const Point& x) { return x.squaredNorm(); }, NoiseModel{});
  RngStream rng(1, 0);
  SampleLedger ledger;
  StarsState s = init_state(oracle, Point::Unit(2, 0), StepRule{1e-4, 2.0, 2}, rng, ledger);
  const auto rec = take_step(s, oracle, rng, ledger, Vector::Unit(2, 1), SamplePhase::BurnIn);
  ASSERT_TRUE(rec.has_value());
  // g = 1 + mu^2, slope = mu (curvature L1/2 = 1 along u)
  EXPECT_NEAR(rec->slope, rec->mu, 1e-12);
  EXPECT_NEAR(s.current[1], -rec->h * rec->mu, 1e-15);
  EXPECT_NEAR(s.f_current - 1.0, std::pow(rec->h * rec->mu, 2), 1e-15);
}

TEST(Step, EveryStepCostsTwoEvaluationsAndTwoSamples) {
  const auto pb = make_problem("ex4");
  NoisyOracle oracle = pb.make_oracle();
  RngStream rng(2, 0);
  SampleLedger ledger;
  StarsState s = init_state(oracle, Point::Ones(10), StepRule{1e-5, 2.0, 10}, rng, ledger);
  for (int k = 0; k < 20; ++k) {
    const std::size_t calls = oracle.eval_count();
    const std::size_t samples = ledger.size();
    ASSERT_TRUE(stars_step(s, oracle, rng, ledger).has_value());
    EXPECT_EQ(oracle.eval_count(), calls + 2);
    EXPECT_EQ(ledger.size(), samples + 2);
  }
}

TEST(Step, NonFiniteValueRaisesDivergence) {
  NoisyOracle oracle(
      1, [](const Point& x) { return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; },
      NoiseModel{});
  RngStream rng(3, 0);
  SampleLedger ledger;
  StarsState s = init_state(oracle, Point::Zero(1), StepRule{1e-4, 2.0, 1}, rng, ledger);
  const auto rec = take_step(s, oracle, rng, ledger, Vector::Constant(1, 100.0), SamplePhase::BurnIn);
  EXPECT_FALSE(rec.has_value());
  EXPECT_TRUE(s.diverged);
  EXPECT_EQ(ledger.rejected(), 1u);
  EXPECT_FALSE(take_step(s, oracle, rng, ledger, Vector::Ones(1), SamplePhase::BurnIn));
}

TEST(RunStars, StopsEarlyOnDivergenceKeepingHistory) {
  // constant slope drives the iterate off to -inf where the objective blows up
  NoisyOracle oracle(1, [](const Point& x) { return x[0] < -50.0 ? 1e300 : x[0]; }, NoiseModel{});
  RngStream rng(4, 0);
  SampleLedger ledger;
  const RunResult r = run_stars(oracle, Point::Zero(1), 100000, StepRule{1e-4, 1e-3, 1}, rng, ledger);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.steps, 100000u);
  EXPECT_EQ(r.history.size(), r.steps + 1);
}

TEST(RunStars, ZeroIterationsRejected) {
  NoisyOracle oracle(2, [](const Point& x) { return x.squaredNorm(); }, NoiseModel{});
  RngStream rng(1, 0);
  SampleLedger ledger;
  EXPECT_THROW(run_stars(oracle, Point::Ones(2), 0, StepRule{1e-4, 2.0, 2}, rng, ledger),
               std::invalid_argument);
  EXPECT_THROW(run_stars(oracle, Point::Ones(2), 10, StepRule{1e-4, 2.0, 1}, rng, ledger),
               std::invalid_argument);
}

TEST(RunStars, FixedSeedIsBitwiseReproducible) {
  const auto pb = make_problem("ex4");
  const StepRule rule{pb.noise.sigma2, pb.l1, 10};
  RunResult runs[2];
  for (auto& r : runs) {
    NoisyOracle oracle = pb.make_oracle();
    RngStream rng(42, 5);
    SampleLedger ledger;
    r = run_stars(oracle, pb.initial_iterate(rng), 300, rule, rng, ledger);
  }
  expect_same_history(runs[0].history, runs[1].history);
  EXPECT_EQ(runs[0].final_point, runs[1].final_point);
}

TEST(RunStars, SphereMedianDecreasesUnderExactHyperparameters) {
  const auto pb = make_problem("ex4");
  AlgorithmSpec spec;
  const TrialBatch b = run_trials(pb, spec, 100, 2000, 3401);
  ASSERT_EQ(b.summary.completed, 100u);
  const auto& rows = b.summary.rows;
  ASSERT_EQ(rows.size(), 2001u);
  // trailing averages over consecutive windows of 200 iterations
  std::vector<double> avgs;
  for (std::size_t start = 1; start + 200 <= rows.size(); start += 200) {
    double avg = 0.0;
    for (std::size_t i = start; i < start + 200; ++i) {
      avg += rows[i].median_f;
    }
    avgs.push_back(avg / 200.0);
  }
  // Strict decrease while above the noise floor. Once there, the expected
  // value is flat and window averages only carry Monte Carlo jitter.
  const double floor = avgs.back();
  std::size_t descent = 0;
  while (descent + 1 < avgs.size() && avgs[descent] > 2.0 * floor) {
    EXPECT_LT(avgs[descent + 1], avgs[descent]) << "window " << descent;
    ++descent;
  }
  EXPECT_GE(descent, 1u);
  const auto [lo, hi] = std::minmax_element(avgs.begin() + descent, avgs.end());
  EXPECT_LE(*hi, 1.25 * *lo) << "plateau is not stationary";
  EXPECT_LE(rows.back().median_f, 1e-2 * rows.front().median_f);
}

TEST(ActiveHyper, OneDimensionalExample) {
  const Hyperparameters h = active_hyperparameters(1e-4, 2.0, 1, NoiseKind::Additive);
  EXPECT_NEAR(h.mu, 0.0276333774323952758, 1e-16);
  EXPECT_NEAR(h.mu, mu_additive(1e-4, 2.0, 1.0), 1e-15);
  EXPECT_DOUBLE_EQ(h.h, 0.025);
}

TEST(ActiveHyper, Example2Constants) {
  const Hyperparameters h = active_hyperparameters(1e-3, 2.0, 10, NoiseKind::Additive);
  EXPECT_NEAR(h.mu, 0.0470075386635799196, 1e-16);
  EXPECT_DOUBLE_EQ(h.h, 1.0 / 112.0);
  EXPECT_DOUBLE_EQ(h.h, step_size(2.0, 10.0));
}

TEST(ActiveHyper, FullDimensionMatchesStars) {
  const Hyperparameters a = active_hyperparameters(1e-4, 2.0, 20, NoiseKind::Additive);
  const Hyperparameters s = compute_hyperparameters(1e-4, 2.0, 20, NoiseKind::Additive);
  EXPECT_EQ(a.mu, s.mu);
  EXPECT_EQ(a.h, s.h);
}

TEST(ActiveDirection, UnitBasisScalesCoefficient) {
  const ActiveSubspace as = ActiveSubspace::from_active_columns(Matrix(Matrix::Identity(2, 1)));
  const ActiveDirection u = direction_from_coeffs(as, Vector::Constant(1, 0.5));
  EXPECT_NEAR(u.full_vector[0], 0.5, 1e-15);
  EXPECT_NEAR(u.full_vector[1], 0.0, 1e-15);
  EXPECT_THROW(direction_from_coeffs(as, Vector::Ones(2)), std::invalid_argument);
}

TEST(ActiveDirection, FullBasisReturnsCoefficients) {
  const ActiveSubspace as = ActiveSubspace::from_active_columns(Matrix(Matrix::Identity(5, 5)));
  RngStream rng(6, 0);
  const Vector r = rng.standard_normal(5);
  EXPECT_LT((direction_from_coeffs(as, r).full_vector - r).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ActiveDirection, DrawsHaveIdentityCovarianceInActiveSpan) {
  RngStream rng(7, 0);
  const Matrix va = random_orthonormal(6, 2, rng);
  const ActiveSubspace as = ActiveSubspace::from_active_columns(va);
  const int n = 100000;
  Matrix cov = Matrix::Zero(6, 6);
  for (int i = 0; i < n; ++i) {
    const Vector u = draw_active_direction(as, rng).full_vector;
    cov += u * u.transpose();
  }
  cov /= n;
  const Matrix target = va * va.transpose();
  EXPECT_LT((cov - target).cwiseAbs().maxCoeff(), 5.0 * std::sqrt(2.0 / n));
}

TEST(RunAstars, InactiveComponentNeverMoves) {
  RngStream rng(8, 0);
  const Matrix va = random_orthonormal(8, 3, rng);
  const ActiveSubspace as = ActiveSubspace::from_active_columns(va);
  NoisyOracle oracle(8, [](const Point& x) { return x.squaredNorm(); },
                     NoiseModel{NoiseKind::Additive, 1e-4});
  SampleLedger ledger;
  const Point x0 = 3.0 * rng.standard_normal(8);
  const RunResult r = run_astars(oracle, x0, 200, as, StepRule{1e-4, 2.0, 3}, rng, ledger);
  ASSERT_FALSE(r.diverged);
  EXPECT_LT((as.project_inactive(r.final_point) - as.project_inactive(x0)).norm(), 1e-10);
  EXPECT_LT(as.project_active(r.final_point).norm(), as.project_active(x0).norm());
}

TEST(RunAstars, CoordinateBasisFreezesTrailingCoordinatesExactly) {
  const auto pb = make_problem("ex2");
  const ActiveSubspace as = *pb.exact_subspace();
  NoisyOracle oracle = pb.make_oracle();
  RngStream rng(9, 0);
  SampleLedger ledger;
  const Point x0 = pb.initial_iterate(rng);
  const RunResult r =
      run_astars(oracle, x0, 100, as, StepRule{pb.noise.sigma2, pb.l1, 10}, rng, ledger);
  EXPECT_EQ(r.final_point.tail(10), x0.tail(10));
}

TEST(RunAstars, RuleMustUseActiveDimension) {
  const auto pb = make_problem("ex2");
  NoisyOracle oracle = pb.make_oracle();
  RngStream rng(1, 0);
  SampleLedger ledger;
  EXPECT_THROW(run_astars(oracle, Point::Ones(20), 10, *pb.exact_subspace(),
                          StepRule{1e-3, 2.0, 20}, rng, ledger),
               std::invalid_argument);
}
