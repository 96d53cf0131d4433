#include <gtest/gtest.h>

#include <cmath>

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "support.hpp"

using namespace yyf;

TEST(Registry, BuiltinsResolve) {
  for (const auto& name : builtin_model_names()) {
    const FilterModel m = builtin_model(name);
    EXPECT_EQ(m.name(), name);
    EXPECT_GE(m.dimension(), 1u);
  }
  EXPECT_EQ(builtin_model("linearNd").dimension(), 2u);
}

TEST(Registry, UnknownNameListsRegistry) {
  try {
    (void)builtin_model("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_name);
    EXPECT_NE(std::string(e.what()).find("cubic_sensor"), std::string::npos);
  }
}

TEST(TimeSchedule, RejectsZeroSteps) {
  try {
    TimeSchedule(1.0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("K must be"), std::string::npos);
  }
}

TEST(TimeSchedule, LastKnotIsExactlyTerminal) {
  const TimeSchedule s(1.0, 3);
  EXPECT_EQ(s.knot(3), 1.0);
  EXPECT_EQ(s.knot(0), 0.0);
  EXPECT_EQ(s.knots().size(), 4u);
}

TEST(TestFunctions, BuiltinLabels) {
  const double x[] = {2.0, -3.0};
  EXPECT_EQ(builtin_test_function("one", 2).evaluate(x), 1.0);
  EXPECT_EQ(builtin_test_function("x", 2).evaluate(x), 2.0);
  EXPECT_EQ(builtin_test_function("x2", 2).evaluate(x), -3.0);
  EXPECT_EQ(builtin_test_function("x2^2", 2).evaluate(x), 9.0);
  EXPECT_EQ(builtin_test_function("r2", 2).evaluate(x), 13.0);
  EXPECT_THROW(builtin_test_function("x3", 2), Error);
  EXPECT_THROW(builtin_test_function("sin", 1), Error);
}

TEST(LinearModel, DensityIsGaussian) {
  const FilterModel m = oracle::scalar_linear(-1.0, 1.0, 1.0, 0.5, 2.0);
  for (double x : {-2.0, 0.0, 0.5, 3.0}) {
    const double xs[] = {x};
    EXPECT_NEAR(m.initial_density(xs), oracle::normal_pdf(x, 0.5, 2.0), 1e-15);
  }
}

TEST(LinearModel, RejectsIndefiniteCovariance) {
  EXPECT_THROW(oracle::scalar_linear(-1.0, 1.0, 1.0, 0.0, -1.0), Error);
}

TEST(InitialSampling, MomentsMatchPrior) {
  const FilterModel m = oracle::scalar_linear(-1.0, 1.0, 1.0, 0.5, 2.0);
  const int n = 40000;
  double s1 = 0, s2 = 0;
  double x[1];
  for (int i = 0; i < n; ++i) {
    m.sample_initial(CounterRng(11, static_cast<std::uint64_t>(i), Stream::initial), x);
    s1 += x[0];
    s2 += x[0] * x[0];
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(var, 2.0, 5 * 2.0 * std::sqrt(2.0 / n));
}

TEST(InitialSampling, RejectionPathForNonlinearModels) {
  const FilterModel m = builtin_model("benes");
  const int n = 20000;
  double s2 = 0;
  double x[1];
  for (int i = 0; i < n; ++i) {
    m.sample_initial(CounterRng(5, static_cast<std::uint64_t>(i), Stream::initial), x);
    s2 += x[0] * x[0];
  }
  EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
}

TEST(Validation, BuiltinsSatisfyDeclaredAssumptions) {
  for (const auto& name : builtin_model_names()) {
    const FilterModel m = builtin_model(name);
    const auto report = validate_assumptions(m, 6.0, 500, 1);
    EXPECT_TRUE(report.passed()) << name;
    EXPECT_GE(report.checks.size(), 4u);
  }
}

TEST(Validation, DetectsUnderstatedLipschitzConstant) {
  FilterModel::Spec s = builtin_model("linear1d").spec();
  s.linear.reset();
  s.drift = [](std::span<const double> x, std::span<double> out) { out[0] = -3.0 * x[0]; };
  const auto report = validate_assumptions(FilterModel(s), 6.0, 500, 1);
  EXPECT_FALSE(report.passed());
  EXPECT_FALSE(report.checks.front().passed);
}

TEST(Validation, NonFiniteCoefficientIsNamed) {
  FilterModel::Spec s = builtin_model("linear1d").spec();
  s.linear.reset();
  s.observation = [](std::span<const double> x, std::span<double> out) { out[0] = std::log(x[0]); };
  try {
    (void)validate_assumptions(FilterModel(s), 6.0, 200, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::numerical);
  }
}

TEST(ScaledDensity, ScalesPointwise) {
  const FilterModel m = builtin_model("linear1d");
  const FilterModel m3 = m.with_scaled_initial_density(3.0);
  const double x[] = {0.7};
  EXPECT_NEAR(m3.initial_density(x), 3.0 * m.initial_density(x), 1e-15);
}
