#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "baselines.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace yyf;

namespace {

ObservationPath one_step(double delta, double dy) {
  ObservationPath p{TimeSchedule(delta, 1), 1, {0.0, dy}};
  return p;
}

}  // namespace

// Prior N(0, 1) with a frozen state; the update is checked against brute
// quadrature of prior(x) * exp(x dY - x^2 delta / 2).
TEST(Kalman, UpdateMatchesQuadrature) {
  const FilterModel m = oracle::scalar_linear(0.0, 1e-6, 1.0, 0.0, 1.0);
  const double delta = 0.1, dy = 0.1;
  const KalmanResult r = kalman_filter(m, one_step(delta, dy));
  double z = 0, s1 = 0, s2 = 0;
  for (int i = -200000; i <= 200000; ++i) {
    const double x = i * 1e-4;
    const double w = oracle::normal_pdf(x, 0, 1) * std::exp(x * dy - 0.5 * x * x * delta);
    z += w;
    s1 += w * x;
    s2 += w * x * x;
  }
  EXPECT_NEAR(r.means[1](0), s1 / z, 1e-9);
  EXPECT_NEAR(r.means[1](0), 0.1 / 1.1, 1e-9);
  EXPECT_NEAR(r.covariances[1](0, 0), s2 / z - (s1 / z) * (s1 / z), 1e-9);
}

// With H = 0 the filter is the prior: m_t = m0 e^{Ft}, P_t = P0 e^{2Ft} + G^2 (1 - e^{2Ft}) / (-2F).
TEST(Kalman, PredictionIsExact) {
  const FilterModel m = oracle::scalar_linear(-0.7, 1.3, 0.0, 1.5, 0.4);
  const auto p = simulate(m, TimeSchedule(2.0, 8), 1, 0);
  const KalmanResult r = kalman_filter(m, p.observation);
  for (std::size_t k = 0; k <= 8; ++k) {
    const double t = 0.25 * static_cast<double>(k), e = std::exp(-0.7 * t);
    EXPECT_NEAR(r.means[k](0), 1.5 * e, 1e-12);
    EXPECT_NEAR(r.covariances[k](0, 0), 0.4 * e * e + 1.69 * (1 - e * e) / 1.4, 1e-12);
  }
}

TEST(Kalman, RejectsNonlinearModel) {
  const auto p = simulate(builtin_model("benes"), TimeSchedule(1.0, 4), 1, 0);
  EXPECT_THROW(kalman_filter(builtin_model("benes"), p.observation), Error);
}

TEST(Kalman, GaussianReadout) {
  KalmanResult r{TimeSchedule(1.0, 1), {Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, -1.0)},
                 {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 0.25)}};
  const auto est = kalman_estimates(r, {"one", "x", "x^2", "r2"});
  EXPECT_EQ(est.estimate(0, 0), 1.0);
  EXPECT_EQ(est.estimate(1, 1), -1.0);
  EXPECT_DOUBLE_EQ(est.estimate(0, 2), 2.25);
  EXPECT_DOUBLE_EQ(est.estimate(1, 3), 1.25);
}

class EnsembleVsKalman : public ::testing::Test {
 protected:
  FilterModel model = builtin_model("linear1d");
  SimulatedPaths paths = simulate(model, TimeSchedule(1.0, 50), 4, 21);
  std::vector<TestFunction> phis = builtin_test_functions({"x"}, 1);
  BaselineEstimates kalman = kalman_estimates(kalman_filter(model, paths.observation), {"x"});

  void expect_agreement(const BaselineEstimates& e, double min_fraction) {
    int ok = 0;
    for (std::size_t k = 1; k <= 50; ++k) {
      EXPECT_GT(e.stderr_at(k, 0), 0.0);
      ok += std::abs(e.estimate(k, 0) - kalman.estimate(k, 0)) <= 3 * e.stderr_at(k, 0) + 2e-3;
    }
    EXPECT_GE(ok, static_cast<int>(min_fraction * 50));
  }
};

TEST_F(EnsembleVsKalman, BootstrapParticleFilter) {
  PfOptions o;
  o.substeps = 10;  // keeps the Euler bias of the particles below their noise
  const auto e = bootstrap_pf(model, paths.observation, phis, 20000, 3, o);
  expect_agreement(e, 0.9);
  EXPECT_FALSE(e.degenerate);
}

TEST_F(EnsembleVsKalman, KallianpurStriebelMonteCarlo) {
  const auto e = ks_monte_carlo(model, paths.observation, phis, 20000, 3);
  expect_agreement(e, 0.9);
}

TEST_F(EnsembleVsKalman, FineOracle) {
  const auto fine = simulate(model, TimeSchedule(1.0, 200), 1, 21);
  const FilterOutput out = fine_oracle(model, Grid(1, 6.0, 121), fine.observation, 50, phis);
  const auto ks = kalman_estimates(kalman_filter(model, fine.observation), {"x"});
  ASSERT_EQ(out.schedule.steps(), 50u);
  for (std::size_t k = 0; k <= 50; ++k) EXPECT_NEAR(out.estimate(k, 0), ks.estimate(4 * k, 0), 5e-3);
}

TEST(BootstrapPf, DeterministicForSeed) {
  const FilterModel m = builtin_model("cubic_sensor");
  const auto p = simulate(m, TimeSchedule(1.0, 20), 1, 0);
  const auto phis = builtin_test_functions({"x"}, 1);
  const auto a = bootstrap_pf(m, p.observation, phis, 2000, 5);
  const auto b = bootstrap_pf(m, p.observation, phis, 2000, 5);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.stderrs, b.stderrs);
}

TEST(BaselineCsv, Header) {
  const FilterModel m = builtin_model("linear1d");
  const auto p = simulate(m, TimeSchedule(1.0, 5), 1, 0);
  const auto e = kalman_estimates(kalman_filter(m, p.observation), {"x", "x^2"});
  std::stringstream ss;
  write_baseline_csv(ss, e, "c");
  std::string line;
  std::getline(ss, line);
  std::getline(ss, line);
  EXPECT_EQ(line, "t,x,x^2,x_stderr,x^2_stderr,ess");
}
