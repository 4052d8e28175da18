// Minimizes a noisy function of 12 variables that only depends on three of
// them, without telling the optimizer which three.
#include <iostream>

#include "astars/astars.hpp"

int main() {
  using namespace astars;
  const std::size_t p = 12;
  Objective f = [](const Point& x) {
    return x[0] * x[0] + 2.0 * x[3] * x[3] + (x[7] - 1.0) * (x[7] - 1.0);
  };
  NoisyOracle oracle(p, f, NoiseModel{NoiseKind::Additive, 1e-6});
  RngStream rng(7, 0);
  SampleLedger ledger;

  FaastarsConfig config;
  config.maxit = 600;
  config.surrogate = SurrogateKind::Quadratic;
  config.tau = 0.99;
  config.retrain_every = 100;

  const Point x0 = Point::Constant(static_cast<Eigen::Index>(p), 2.0);
  const FaastarsResult r = run_faastars(oracle, x0, config, rng, ledger);

  std::cout << "estimated noise variance " << r.report.sigma2_hat << ", L1 " << r.report.l1_hat
            << "\nlearned active dimension " << r.report.j_tilde << " after "
            << r.report.burnin_steps << " burn-in steps\n"
            << "f(x0) = " << f(x0) << ", f(final) = " << f(r.run.final_point) << " using "
            << oracle.eval_count() << " evaluations\n";
}
