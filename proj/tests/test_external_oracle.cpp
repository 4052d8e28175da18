#include <gtest/gtest.h>

#include <cmath>

#include "astars/bench.hpp"
#include "astars/external_oracle.hpp"

using namespace astars;

namespace {

const char* kSphereScript =
    "awk '{ s = 0; for (i = 1; i <= NF; i++) s += $i * $i; printf \"%.17g\\n\", s }'";

}  // namespace

TEST(External, EchoZeroIsConstantZero) {
  NoisyOracle oracle = external_oracle("echo 0", 3);
  RngStream rng(1, 0);
  EXPECT_EQ(oracle.evaluate(Point::Ones(3), rng), 0.0);
  EXPECT_EQ(oracle.evaluate(Point::Constant(3, -7.5), rng), 0.0);
  EXPECT_EQ(oracle.eval_count(), 2u);
  EXPECT_FALSE(oracle.true_value(Point::Ones(3)).has_value());
}

TEST(External, SphereScriptMatchesBuiltInSphere) {
  const auto pb = make_problem("ex4", {.sigma2 = 0.0});
  const ExternalCommand cmd(kSphereScript);
  RngStream rng(2, 0);
  for (int i = 0; i < 10; ++i) {
    const Point x = pb.initial_iterate(rng);
    EXPECT_NEAR(cmd(x), pb.objective(x), 1e-9);
  }
}

TEST(External, NanOutputFlagsDivergence) {
  NoisyOracle oracle = external_oracle("echo nan", 2);
  RngStream rng(3, 0);
  EXPECT_TRUE(std::isnan(oracle.evaluate(Point::Zero(2), rng)));
  SampleLedger ledger;
  const RunResult r = run_stars(oracle, Point::Zero(2), 10, StepRule{1e-4, 2.0, 2}, rng, ledger);
  EXPECT_TRUE(r.diverged);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(ledger.rejected(), 1u);
}

TEST(External, UnparseableOrFailingCommandGivesNan) {
  RngStream rng(4, 0);
  for (const char* c : {"echo hello", "echo 1 2", "true", "echo 3; exit 1"}) {
    EXPECT_TRUE(std::isnan(ExternalCommand(c)(Point::Zero(1)))) << c;
  }
}

TEST(External, CommandSeesOneLineOfCoordinates) {
  const ExternalCommand cmd("awk '{ print NF + $2 }'");
  Point x(3);
  x << 0.25, 10.0, -1e-3;
  EXPECT_EQ(cmd(x), 13.0);
}

TEST(External, MissingCommandAbortsWithDiagnostic) {
  const ExternalCommand cmd("/nonexistent/objective-binary");
  try {
    cmd(Point::Zero(1));
    FAIL() << "expected a spawn error";
  } catch (const SpawnError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/objective-binary"), std::string::npos);
  }
  EXPECT_THROW(ExternalCommand(""), std::invalid_argument);
  EXPECT_THROW(external_oracle("echo 0", 0), std::invalid_argument);
}

TEST(External, HarnessRunsStarsOnScript) {
  const BenchmarkProblem pb = external_problem(kSphereScript, 3, 1e-6, 2.0);
  const TrialResult r = run_trial(pb, AlgorithmSpec{}, 30, 1, 0);
  ASSERT_FALSE(r.run.diverged);
  EXPECT_EQ(r.oracle_calls, 61u);
  EXPECT_LT(r.run.final_fhat, r.run.history.rows()[0].fhat);
  EXPECT_FALSE(r.run.history.back().ftrue.has_value());
}
