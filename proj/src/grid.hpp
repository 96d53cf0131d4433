#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "model.hpp"

namespace yyf {

/// Tensor grid of M^d nodes on the cube [-R, R]^d; axis 0 varies fastest.
class Grid {
 public:
  Grid(std::size_t dimension, double radius, std::size_t points_per_axis);

  std::size_t dimension() const { return dim_; }
  double radius() const { return radius_; }
  std::size_t points_per_axis() const { return points_; }
  double spacing() const { return spacing_; }
  std::size_t node_count() const { return count_; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  double axis_coordinate(std::size_t index) const;
  std::array<std::size_t, 3> multi_index(std::size_t node) const;
  void coordinates(std::size_t node, std::span<double> out) const;
  double norm(std::size_t node) const;
  bool is_boundary(std::size_t node) const;

  /// Tensor trapezoid weight: dx per axis, halved on axis end points.
  double quadrature_weight(std::size_t node) const;
  const std::vector<double>& quadrature_weights() const { return weights_; }

  /// Samples a scalar field at every node.
  std::vector<double> sample(const ScalarField& fn) const;

 private:
  std::size_t dim_;
  double radius_;
  std::size_t points_;
  double spacing_;
  std::size_t count_;
  std::array<std::size_t, 3> strides_{1, 1, 1};
  std::vector<double> weights_;
};

Grid build_grid(std::size_t dimension, double radius, std::size_t points_per_axis);

/// Smoothstep cutoff: 1 for |x| <= R - 1/R, 0 for |x| >= R, C^2 quintic between.
double mollifier_value(double norm, double radius);
std::vector<double> mollifier(const Grid& grid);

/// A value stored as mantissa * exp(log_scale).
struct ScaledValue {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const { return mantissa * std::exp(log_scale); }
  double log_value() const { return std::log(mantissa) + log_scale; }
};

/// Grid-sampled unnormalized density representing exp(log_scale) * values.
struct DensityField {
  Grid grid;
  std::vector<double> values;
  double log_scale = 0.0;

  double represented(std::size_t node) const { return values[node] * std::exp(log_scale); }
};

/// sigma_0 * S_R on the grid, boundary nodes exactly zero.
DensityField discretize_initial(const FilterModel& model, const Grid& grid);

/// Trapezoid integral of weight * field; result keeps the field's log_scale.
ScaledValue integrate(const DensityField& field);
ScaledValue integrate(const DensityField& field, std::span<const double> weight_at_nodes);
ScaledValue integrate(const DensityField& field, const TestFunction& weight);

/// Snapshot CSV: "# log_scale=<v>" line, header x_1..x_d,value, one row per node.
void write_field_csv(std::ostream& os, const DensityField& field);

}  // namespace yyf
