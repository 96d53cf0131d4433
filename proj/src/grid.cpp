#include "grid.hpp"

#include <algorithm>
#include <ostream>

#include "error.hpp"
#include "io.hpp"

namespace yyf {

Grid::Grid(std::size_t dimension, double radius, std::size_t points_per_axis)
    : dim_(dimension), radius_(radius), points_(points_per_axis) {
  require(dimension >= 1 && dimension <= 3, "grid dimension must be 1, 2 or 3");
  require(std::isfinite(radius) && radius > 0.0, "grid radius must be positive");
  require(points_per_axis % 2 == 1, "points per axis must be odd so the origin is a node");
  require(points_per_axis >= 5, "points per axis must be at least 5");
  spacing_ = 2.0 * radius / static_cast<double>(points_per_axis - 1);
  count_ = 1;
  for (std::size_t i = 0; i < dim_; ++i) {
    strides_[i] = count_;
    count_ *= points_;
  }
  weights_.resize(count_);
  for (std::size_t n = 0; n < count_; ++n) {
    const auto idx = multi_index(n);
    double w = 1.0;
    for (std::size_t i = 0; i < dim_; ++i)
      w *= (idx[i] == 0 || idx[i] == points_ - 1) ? 0.5 * spacing_ : spacing_;
    weights_[n] = w;
  }
}

Grid build_grid(std::size_t dimension, double radius, std::size_t points_per_axis) {
  return Grid(dimension, radius, points_per_axis);
}

double Grid::axis_coordinate(std::size_t index) const {
  if (index == 0) return -radius_;
  if (index == points_ - 1) return radius_;
  const auto center = static_cast<std::ptrdiff_t>((points_ - 1) / 2);
  return static_cast<double>(static_cast<std::ptrdiff_t>(index) - center) * spacing_;
}

std::array<std::size_t, 3> Grid::multi_index(std::size_t node) const {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (std::size_t i = 0; i < dim_; ++i) {
    idx[i] = node % points_;
    node /= points_;
  }
  return idx;
}

void Grid::coordinates(std::size_t node, std::span<double> out) const {
  for (std::size_t i = 0; i < dim_; ++i) {
    out[i] = axis_coordinate(node % points_);
    node /= points_;
  }
}

double Grid::norm(std::size_t node) const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double c = axis_coordinate(node % points_);
    s += c * c;
    node /= points_;
  }
  return std::sqrt(s);
}

bool Grid::is_boundary(std::size_t node) const {
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j = node % points_;
    if (j == 0 || j == points_ - 1) return true;
    node /= points_;
  }
  return false;
}

double Grid::quadrature_weight(std::size_t node) const { return weights_[node]; }

std::vector<double> Grid::sample(const ScalarField& fn) const {
  std::vector<double> out(count_);
  double x[3];
  for (std::size_t n = 0; n < count_; ++n) {
    coordinates(n, std::span<double>(x, dim_));
    out[n] = fn(std::span<const double>(x, dim_));
  }
  return out;
}

double mollifier_value(double norm, double radius) {
  require(radius > 1.0, "mollifier needs R > 1 so that R - 1/R > 0");
  const double band = 1.0 / radius;
  if (norm <= radius - band) return 1.0;
  if (norm >= radius) return 0.0;
  const double t = (radius - norm) / band;
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

std::vector<double> mollifier(const Grid& grid) {
  require(grid.radius() > 1.0, "mollifier needs R > 1 so that R - 1/R > 0");
  std::vector<double> out(grid.node_count());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = grid.is_boundary(n) ? 0.0 : mollifier_value(grid.norm(n), grid.radius());
  return out;
}

DensityField discretize_initial(const FilterModel& model, const Grid& grid) {
  require(model.dimension() == grid.dimension(), "model and grid dimensions differ");
  DensityField field{grid, mollifier(grid), 0.0};
  double x[3];
  bool any = false;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    if (field.values[n] == 0.0) continue;
    grid.coordinates(n, std::span<double>(x, grid.dimension()));
    const double p = model.initial_density(std::span<const double>(x, grid.dimension()));
    if (!std::isfinite(p) || p < 0.0)
      fail(ErrorCode::numerical, "initial density is negative or not finite on the grid");
    field.values[n] *= p;
    any = any || field.values[n] > 0.0;
  }
  if (!any)
    fail(ErrorCode::domain, "initial density of '" + model.name() + "' vanishes on the grid of radius " +
                                format_double(grid.radius()) + "; use a larger R");
  return field;
}

ScaledValue integrate(const DensityField& field) {
  const auto& w = field.grid.quadrature_weights();
  double s = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) s += w[n] * field.values[n];
  return {s, field.log_scale};
}

ScaledValue integrate(const DensityField& field, std::span<const double> weight_at_nodes) {
  const auto& w = field.grid.quadrature_weights();
  require(weight_at_nodes.size() == w.size(), "weight samples do not match the grid");
  double s = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) s += w[n] * weight_at_nodes[n] * field.values[n];
  return {s, field.log_scale};
}

ScaledValue integrate(const DensityField& field, const TestFunction& weight) {
  return integrate(field, field.grid.sample(weight.evaluate));
}

void write_field_csv(std::ostream& os, const DensityField& field) {
  const auto& grid = field.grid;
  os << "# log_scale=" << format_double(field.log_scale) << '\n';
  for (std::size_t i = 1; i <= grid.dimension(); ++i) os << "x_" << i << ',';
  os << "value\n";
  double x[3];
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    grid.coordinates(n, std::span<double>(x, grid.dimension()));
    for (std::size_t i = 0; i < grid.dimension(); ++i) os << format_double(x[i]) << ',';
    os << format_double(field.values[n]) << '\n';
  }
}

}  // namespace yyf
