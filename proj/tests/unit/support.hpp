#pragma once

#include <cmath>
#include <numbers>

#include <algorithm>
#include <vector>

#include "generator.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace yyf::oracle {

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// dX = F X dt + G dV, dY = H X dt + dW in one dimension.
inline FilterModel scalar_linear(double F, double G, double H, double m0, double P0) {
  LinearGaussian lin{Eigen::MatrixXd::Constant(1, 1, F), Eigen::MatrixXd::Constant(1, 1, G),
                     Eigen::MatrixXd::Constant(1, 1, H), Eigen::VectorXd::Constant(1, m0),
                     Eigen::MatrixXd::Constant(1, 1, P0)};
  return make_linear_model("scalar", lin);
}

/// Ornstein-Uhlenbeck state observed through a constant sensor h = c.
inline FilterModel constant_sensor(double c) {
  FilterModel base = builtin_model("linear1d");
  FilterModel::Spec s = base.spec();
  s.name = "constant_sensor";
  s.linear.reset();
  s.observation = [c](std::span<const double>, std::span<double> out) { out[0] = c; };
  return FilterModel(s);
}

// Max |A u - L u| over |x|_inf <= 2 for u = exp(-|x|^2 / 2), with L written
// out by hand for f = -x, a = G G^T constant and h = x.
inline double stencil_error(const FilterModel& model, const Eigen::Matrix2d& a, std::size_t M) {
  const std::size_t d = model.dimension();
  const Grid g(d, 4.0, M);
  const DiscreteGenerator gen = assemble_generator(model, g);
  Eigen::VectorXd u(static_cast<Eigen::Index>(g.node_count()));
  std::vector<double> x(d);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    g.coordinates(n, x);
    double r2 = 0;
    for (double v : x) r2 += v * v;
    u(static_cast<Eigen::Index>(n)) = std::exp(-0.5 * r2);
  }
  const Eigen::VectorXd Au = gen.matrix * u;
  double err = 0;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    g.coordinates(n, x);
    if (std::any_of(x.begin(), x.end(), [](double v) { return std::abs(v) > 2.0; })) continue;
    const double un = u(static_cast<Eigen::Index>(n));
    double r2 = 0, second = 0;
    for (std::size_t i = 0; i < d; ++i) {
      r2 += x[i] * x[i];
      for (std::size_t j = 0; j < d; ++j) second += a(i, j) * ((i == j ? x[i] * x[i] - 1.0 : x[i] * x[j]));
    }
    const double Lu = 0.5 * second * un + (static_cast<double>(d) - r2) * un - 0.5 * r2 * un;
    err = std::max(err, std::abs(Au(static_cast<Eigen::Index>(n)) - Lu));
  }
  return err;
}

}  // namespace yyf::oracle
