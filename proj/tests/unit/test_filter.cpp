#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "baselines.hpp"
#include "error.hpp"
#include "filter.hpp"
#include "support.hpp"

using namespace yyf;

TEST(Estimate, ConstantFunctionIsOne) {
  const Grid g(1, 6.0, 241);
  DensityField f = discretize_initial(builtin_model("cubic_sensor"), g);
  f.log_scale = 700.0;
  EXPECT_NEAR(estimate(f, builtin_test_function("one", 1)), 1.0, 1e-12);
}

TEST(Estimate, GaussianMoments) {
  const Grid g(1, 6.0, 241);
  const DensityField f = discretize_initial(oracle::scalar_linear(-1, 1, 1, 0.5, 0.5), g);
  EXPECT_NEAR(estimate(f, builtin_test_function("x", 1)), 0.5, 1e-9);
  EXPECT_NEAR(estimate(f, builtin_test_function("x^2", 1)), 0.75, 1e-8);
}

TEST(Filter, OutputShape) {
  const FilterModel m = builtin_model("linear1d");
  const TimeSchedule s(1.0, 20);
  const auto p = simulate(m, s, 1, 0);
  const auto phis = builtin_test_functions({"x", "x^2"}, 1);
  const FilterOutput out = run_filter(m, Grid(1, 6.0, 121), s, p.observation, phis);
  EXPECT_EQ(out.estimates.size(), 21u * 2);
  EXPECT_EQ(out.mass_log.size(), 21u);
  std::stringstream ss;
  write_filter_csv(ss, out, "yyfilter test");
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "# yyfilter test");
  std::getline(ss, line);
  EXPECT_EQ(line, "t,x,x^2,mass_log_scale,clamped_mass");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 21);
}

TEST(Filter, ScheduleMismatchIsRejected) {
  const FilterModel m = builtin_model("linear1d");
  const Grid g(1, 6.0, 121);
  const YauYauFilter filter(m, g, 0.01, 4);
  const auto p = simulate(m, TimeSchedule(1.0, 50), 1, 0);
  const auto phis = builtin_test_functions({"x"}, 1);
  EXPECT_THROW(filter.run(p.observation, phis), Error);
}

TEST(Filter, MatchesKalmanOnLinearModel) {
  const FilterModel m = builtin_model("linear1d");
  const TimeSchedule s(1.0, 200);
  const auto p = simulate(m, s, 1, 17);
  const auto phis = builtin_test_functions({"x"}, 1);
  const FilterOutput yy = run_filter(m, Grid(1, 6.0, 241), s, p.observation, phis);
  const auto kf = kalman_estimates(kalman_filter(m, p.observation), {"x"});
  double err = 0;
  for (std::size_t k = 0; k <= 200; ++k) err = std::max(err, std::abs(yy.estimate(k, 0) - kf.estimate(k, 0)));
  EXPECT_LT(err, 5e-3);
}

TEST(Filter, InitialScalingDoesNotChangeEstimates) {
  const FilterModel m = builtin_model("benes");
  const TimeSchedule s(0.5, 50);
  const auto p = simulate(m, s, 1, 2);
  const auto phis = builtin_test_functions({"x"}, 1);
  const Grid g(1, 6.0, 121);
  const auto a = run_filter(m, g, s, p.observation, phis);
  const auto b = run_filter(m.with_scaled_initial_density(1e-200), g, s, p.observation, phis);
  for (std::size_t k = 0; k <= 50; ++k) EXPECT_NEAR(a.estimate(k, 0), b.estimate(k, 0), 1e-12);
}

TEST(Filter, ObserverSeesEveryKnot) {
  const FilterModel m = builtin_model("linear1d");
  const TimeSchedule s(1.0, 10);
  const auto p = simulate(m, s, 1, 0);
  const YauYauFilter filter(m, Grid(1, 6.0, 61), s.delta(), 2);
  std::vector<std::size_t> seen;
  FilterOptions o;
  o.observer = [&](std::size_t k, const DensityField&, const DensityField&) { seen.push_back(k); };
  (void)filter.run(p.observation, {}, o);
  ASSERT_EQ(seen.size(), 10u);
  EXPECT_EQ(seen.front(), 1u);
  EXPECT_EQ(seen.back(), 10u);
}

TEST(Filter, TwoDimensionalLinearModel) {
  const FilterModel m = builtin_model("linearNd");
  const TimeSchedule s(0.5, 25);
  const auto p = simulate(m, s, 1, 8);
  const auto phis = builtin_test_functions({"x1", "x2"}, 2);
  const FilterOutput yy = run_filter(m, Grid(2, 5.0, 81), s, p.observation, phis);
  const auto kf = kalman_estimates(kalman_filter(m, p.observation), {"x1", "x2"});
  for (std::size_t k = 0; k <= 25; ++k)
    for (std::size_t f = 0; f < 2; ++f) EXPECT_NEAR(yy.estimate(k, f), kf.estimate(k, f), 0.02);
}
