#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "error.hpp"
#include "grid.hpp"
#include "support.hpp"

using namespace yyf;

TEST(Grid, AxisIsSymmetricWithExactEnds) {
  const Grid g(1, 6.0, 241);
  EXPECT_EQ(g.axis_coordinate(0), -6.0);
  EXPECT_EQ(g.axis_coordinate(120), 0.0);
  EXPECT_EQ(g.axis_coordinate(240), 6.0);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.05);
  EXPECT_TRUE(g.is_boundary(0));
  EXPECT_FALSE(g.is_boundary(1));
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(Grid(1, 6.0, 240), Error);
  EXPECT_THROW(Grid(1, 6.0, 3), Error);
  EXPECT_THROW(Grid(4, 6.0, 11), Error);
}

TEST(Grid, MultiIndexRoundTrip) {
  const Grid g(3, 2.0, 9);
  EXPECT_EQ(g.node_count(), 729u);
  double x[3];
  for (std::size_t n : {0ul, 100ul, 364ul, 728ul}) {
    const auto idx = g.multi_index(n);
    EXPECT_EQ(idx[0] * g.stride(0) + idx[1] * g.stride(1) + idx[2] * g.stride(2), n);
    g.coordinates(n, x);
    EXPECT_NEAR(g.norm(n), std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), 1e-15);
  }
}

TEST(Grid, TrapezoidIntegratesGaussian) {
  const Grid g(2, 6.0, 121);
  const auto w = g.quadrature_weights();
  double s = 0;
  double x[2];
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    g.coordinates(n, x);
    s += w[n] * oracle::normal_pdf(x[0], 0, 1) * oracle::normal_pdf(x[1], 0, 1);
  }
  // Mass outside the square is about 4e-9.
  EXPECT_NEAR(s, 1.0, 1e-8);
}

TEST(Mollifier, PlateauAndSupportAreExact) {
  const double R = 6.0;
  EXPECT_EQ(mollifier_value(0.0, R), 1.0);
  EXPECT_EQ(mollifier_value(R - 1.0 / R, R), 1.0);
  EXPECT_EQ(mollifier_value(R - 1.0 / R - 1e-9, R), 1.0);
  EXPECT_EQ(mollifier_value(R, R), 0.0);
  EXPECT_EQ(mollifier_value(R + 1.0, R), 0.0);
  double prev = 1.0;
  for (int i = 1; i < 100; ++i) {
    const double r = R - 1.0 / R + i * (1.0 / R) / 100;
    const double v = mollifier_value(r, R);
    EXPECT_LE(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
  EXPECT_THROW(mollifier_value(0.0, 1.0), Error);
}

TEST(Mollifier, SmoothAtBothJoins) {
  const double R = 3.0, a = R - 1.0 / R, h = 1e-3;
  // Cubic contact: halving the distance to a join divides the gap by 8.
  const double in0 = 1.0 - mollifier_value(a + h, R), in1 = 1.0 - mollifier_value(a + h / 2, R);
  const double out0 = mollifier_value(R - h, R), out1 = mollifier_value(R - h / 2, R);
  EXPECT_NEAR(in0 / in1, 8.0, 0.1);
  EXPECT_NEAR(out0 / out1, 8.0, 0.1);
}

TEST(Mollifier, ZeroOnBoundaryNodes) {
  const Grid g(2, 3.0, 31);
  const auto m = mollifier(g);
  for (std::size_t n = 0; n < g.node_count(); ++n)
    if (g.is_boundary(n)) EXPECT_EQ(m[n], 0.0);
}

TEST(Discretize, MassOfMollifiedPrior) {
  const Grid g(1, 6.0, 241);
  const DensityField f = discretize_initial(builtin_model("linear1d"), g);
  // Mass outside |x| < 6 - 1/6 is below 1e-7 for N(0, 1).
  EXPECT_NEAR(integrate(f).value(), 1.0, 1e-7);
  EXPECT_EQ(f.log_scale, 0.0);
}

TEST(Discretize, PriorOutsideDomainIsAnError) {
  const Grid g(1, 2.0, 41);
  try {
    (void)discretize_initial(oracle::scalar_linear(-1.0, 1.0, 1.0, 60.0, 0.01), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain);
    EXPECT_NE(std::string(e.what()).find("larger R"), std::string::npos);
  }
}

TEST(Integrate, LogScaleIsCarried) {
  const Grid g(1, 6.0, 241);
  DensityField f = discretize_initial(builtin_model("linear1d"), g);
  f.log_scale = -2000.0;
  const ScaledValue v = integrate(f);
  EXPECT_NEAR(v.log_value(), -2000.0, 1e-7);
  EXPECT_EQ(v.value(), 0.0);
}

TEST(FieldCsv, HeaderAndRows) {
  const Grid g(2, 2.0, 5);
  const DensityField f = discretize_initial(builtin_model("linearNd"), g);
  std::stringstream ss;
  write_field_csv(ss, f);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line.rfind("# log_scale=", 0), 0u);
  std::getline(ss, line);
  EXPECT_EQ(line, "x_1,x_2,value");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 25);
}
