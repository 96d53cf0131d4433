#include "generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "io.hpp"

namespace yyf {

namespace {

std::string describe_node(const Grid& grid, std::size_t node) {
  double x[3];
  grid.coordinates(node, std::span<double>(x, grid.dimension()));
  std::string s = "node " + std::to_string(node) + " at (";
  for (std::size_t i = 0; i < grid.dimension(); ++i) s += (i ? ", " : "") + format_double(x[i]);
  return s + ")";
}

}  // namespace

DiscreteGenerator assemble_generator(const FilterModel& model, const Grid& grid) {
  require(model.dimension() == grid.dimension(), "model and grid dimensions differ");
  const std::size_t d = grid.dimension();
  const std::size_t n_obs = model.observation_dimension();
  const std::size_t count = grid.node_count();
  const double dx = grid.spacing();
  const double lambda = model.assumptions().ellipticity;

  std::vector<double> a(count * d * d), f(count * d), potential(count);
  {
    double x[3];
    std::vector<double> hv(n_obs);
    for (std::size_t n = 0; n < count; ++n) {
      grid.coordinates(n, std::span<double>(x, d));
      std::span<const double> xs(x, d);
      std::span<double> an(a.data() + n * d * d, d * d);
      model.diffusion_square(xs, an);
      model.drift(xs, std::span<double>(f.data() + n * d, d));
      model.observation(xs, hv);
      double h2 = 0.0;
      for (double v : hv) h2 += v * v;
      potential[n] = -0.5 * h2;
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> am(
          an.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(am).eigenvalues()(0);
      if (!(min_eig >= 0.99 * lambda))
        fail(ErrorCode::domain, "assembly refused: diffusion is not elliptic (min eigenvalue " +
                                    format_double(min_eig) + " < " + format_double(lambda) + ") at " +
                                    describe_node(grid, n));
      for (std::size_t i = 0; i < d * d; ++i)
        if (!std::isfinite(an[i])) fail(ErrorCode::numerical, "diffusion is not finite at " + describe_node(grid, n));
      for (std::size_t i = 0; i < d; ++i)
        if (!std::isfinite(f[n * d + i])) fail(ErrorCode::numerical, "drift is not finite at " + describe_node(grid, n));
      if (!std::isfinite(potential[n])) fail(ErrorCode::numerical, "observation is not finite at " + describe_node(grid, n));
    }
  }

  const double inv_dx2 = 1.0 / (dx * dx);
  const double inv_2dx = 0.5 / dx;
  const double inv_4dx2 = 0.25 * inv_dx2;
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t per_row = 1 + 2 * d + 2 * d * (d - 1);
  triplets.reserve(count * per_row);
  auto aij = [&](std::size_t node, std::size_t i, std::size_t j) { return a[node * d * d + i * d + j]; };
  for (std::size_t n = 0; n < count; ++n) {
    if (grid.is_boundary(n)) continue;
    const auto row = static_cast<int>(n);
    double diag = potential[n];
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t up = n + grid.stride(i), dn = n - grid.stride(i);
      triplets.emplace_back(row, static_cast<int>(up), 0.5 * aij(up, i, i) * inv_dx2 - f[up * d + i] * inv_2dx);
      triplets.emplace_back(row, static_cast<int>(dn), 0.5 * aij(dn, i, i) * inv_dx2 + f[dn * d + i] * inv_2dx);
      diag -= aij(n, i, i) * inv_dx2;
      for (std::size_t j = i + 1; j < d; ++j) {
        // 1/2 (a^ij + a^ji) d_i d_j with the four-corner stencil.
        const std::size_t pp = n + grid.stride(i) + grid.stride(j);
        const std::size_t pm = n + grid.stride(i) - grid.stride(j);
        const std::size_t mp = n - grid.stride(i) + grid.stride(j);
        const std::size_t mm = n - grid.stride(i) - grid.stride(j);
        auto mixed = [&](std::size_t node) { return 0.5 * (aij(node, i, j) + aij(node, j, i)) * inv_4dx2; };
        triplets.emplace_back(row, static_cast<int>(pp), mixed(pp));
        triplets.emplace_back(row, static_cast<int>(pm), -mixed(pm));
        triplets.emplace_back(row, static_cast<int>(mp), -mixed(mp));
        triplets.emplace_back(row, static_cast<int>(mm), mixed(mm));
      }
    }
    triplets.emplace_back(row, row, diag);
  }
  SparseMatrix m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return DiscreteGenerator{grid, std::move(m)};
}

DiscreteGenerator make_generator(const Grid& grid, SparseMatrix matrix) {
  const auto count = static_cast<Eigen::Index>(grid.node_count());
  require(matrix.rows() == count && matrix.cols() == count, "generator matrix does not match the grid");
  for (Eigen::Index r = 0; r < count; ++r) {
    if (!grid.is_boundary(static_cast<std::size_t>(r))) continue;
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) it.valueRef() = 0.0;
  }
  matrix.prune(0.0);
  matrix.makeCompressed();
  return DiscreteGenerator{grid, std::move(matrix)};
}

CrankNicolson::CrankNicolson(const DiscreteGenerator& gen, double delta, std::size_t substeps)
    : gen_(&gen), delta_(delta), substeps_(substeps) {
  require(delta > 0.0 && std::isfinite(delta), "propagation step must be positive");
  require(substeps >= 1, "substeps must be >= 1");
  // I + dt/2 A stays nonnegative (and the scheme positivity preserving) only
  // while dt max|A_ii| <= 2; stiff potentials such as 1/2 x^6 need more substeps.
  double stiffness = 0.0;
  for (Eigen::Index r = 0; r < gen.matrix.rows(); ++r) stiffness = std::max(stiffness, std::abs(gen.matrix.coeff(r, r)));
  const double floor_substeps = std::ceil(0.5 * delta * stiffness * (1.0 + 1e-12));
  if (floor_substeps > static_cast<double>(substeps_)) {
    require(floor_substeps < 1e7, "Crank-Nicolson positivity floor needs too many substeps");
    substeps_ = static_cast<std::size_t>(floor_substeps);
  }
  const double half = 0.5 * delta / static_cast<double>(substeps_);
  const auto count = gen.matrix.rows();
  SparseMatrix identity(count, count);
  identity.setIdentity();
  explicit_part_ = identity + half * gen.matrix;
  implicit_part_ = identity - half * gen.matrix;
  explicit_part_.makeCompressed();
  implicit_part_.makeCompressed();

  if (gen.grid.dimension() == 1) {
    const auto n = static_cast<std::size_t>(count);
    std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0);
    for (Eigen::Index r = 0; r < count; ++r)
      for (SparseMatrix::InnerIterator it(implicit_part_, r); it; ++it) {
        const auto c = it.col();
        if (c == r) di[static_cast<std::size_t>(r)] = it.value();
        else if (c == r - 1) lo[static_cast<std::size_t>(r)] = it.value();
        else if (c == r + 1) up[static_cast<std::size_t>(r)] = it.value();
        else fail(ErrorCode::internal, "1D generator is not tridiagonal");
      }
    lower_ = lo;
    upper_prime_.assign(n, 0.0);
    inv_denominator_.assign(n, 0.0);
    double prev_up = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double denom = di[i] - (i > 0 ? lo[i] * prev_up : 0.0);
      if (!(std::abs(denom) > 1e-300) || !std::isfinite(denom))
        fail(ErrorCode::numerical, "Crank-Nicolson tridiagonal system is singular at row " + std::to_string(i));
      inv_denominator_[i] = 1.0 / denom;
      upper_prime_[i] = up[i] * inv_denominator_[i];
      prev_up = upper_prime_[i];
    }
  } else {
    solver_.setTolerance(1e-10);
    solver_.setMaxIterations(2000);
    solver_.compute(implicit_part_);
    if (solver_.info() != Eigen::Success)
      fail(ErrorCode::numerical, "Crank-Nicolson preconditioner setup failed");
  }
}

void CrankNicolson::solve_tridiagonal(std::vector<double>& rhs) const {
  const std::size_t n = rhs.size();
  rhs[0] *= inv_denominator_[0];
  for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) * inv_denominator_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_prime_[i] * rhs[i + 1];
}

StepReport CrankNicolson::advance(DensityField& field) const {
  require(field.values.size() == gen_->grid.node_count(), "field does not match the generator grid");
  StepReport report;
  Eigen::Map<Eigen::VectorXd> v(field.values.data(), static_cast<Eigen::Index>(field.values.size()));
  Eigen::VectorXd rhs;
  for (std::size_t s = 0; s < substeps_; ++s) {
    rhs = explicit_part_ * v;
    if (gen_->grid.dimension() == 1) {
      std::vector<double> work(rhs.data(), rhs.data() + rhs.size());
      solve_tridiagonal(work);
      v = Eigen::Map<Eigen::VectorXd>(work.data(), rhs.size());
    } else {
      Eigen::VectorXd guess = v;
      v = solver_.solveWithGuess(rhs, guess);
      report.iterations += static_cast<std::size_t>(solver_.iterations());
      if (solver_.info() != Eigen::Success)
        fail(ErrorCode::numerical, "Crank-Nicolson linear solve did not converge after " +
                                       std::to_string(solver_.iterations()) + " iterations");
    }
  }
  const auto& w = gen_->grid.quadrature_weights();
  double min_value = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < field.values.size(); ++n) {
    double& x = field.values[n];
    if (!std::isfinite(x)) fail(ErrorCode::numerical, "propagation produced a non-finite value");
    min_value = std::min(min_value, x);
    if (x < 0.0) {
      report.clamped_mass -= w[n] * x;
      x = 0.0;
    }
  }
  report.min_value = min_value;
  return report;
}

DensityField propagate(const DiscreteGenerator& gen, const DensityField& field, double delta,
                       std::size_t substeps, StepReport* report) {
  CrankNicolson stepper(gen, delta, substeps);
  DensityField out = field;
  const StepReport r = stepper.advance(out);
  if (report) *report = r;
  return out;
}

ObservationUpdate::ObservationUpdate(const FilterModel& model, const Grid& grid)
    : obs_dim_(model.observation_dimension()), h_(grid.node_count() * model.observation_dimension()) {
  require(model.dimension() == grid.dimension(), "model and grid dimensions differ");
  double x[3];
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    grid.coordinates(n, std::span<double>(x, grid.dimension()));
    model.observation(std::span<const double>(x, grid.dimension()),
                      std::span<double>(h_.data() + n * obs_dim_, obs_dim_));
  }
}

void ObservationUpdate::apply(DensityField& field, std::span<const double> increment) const {
  require(increment.size() == obs_dim_, "observation increment has the wrong dimension");
  for (double v : increment) require(std::isfinite(v), "observation increment is not finite");
  const std::size_t count = field.values.size();
  auto exponent = [&](std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < obs_dim_; ++j) s += h_[n * obs_dim_ + j] * increment[j];
    return s;
  };
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < count; ++n)
    if (field.values[n] > 0.0) shift = std::max(shift, exponent(n));
  if (!std::isfinite(shift)) return;  // empty support
  for (std::size_t n = 0; n < count; ++n)
    if (field.values[n] != 0.0) field.values[n] *= std::exp(exponent(n) - shift);
  field.log_scale += shift;
}

DensityField exp_update(const DensityField& field, const FilterModel& model,
                        std::span<const double> increment) {
  DensityField out = field;
  ObservationUpdate(model, field.grid).apply(out, increment);
  return out;
}

}  // namespace yyf
