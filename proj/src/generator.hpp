#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "grid.hpp"
#include "model.hpp"

namespace yyf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Finite-difference form of
///   A u = 1/2 sum_ij d_i d_j (a^ij u) - sum_i d_i (f_i u) - 1/2 |h|^2 u
/// on interior nodes; boundary rows are zero (homogeneous Dirichlet).
struct DiscreteGenerator {
  Grid grid;
  SparseMatrix matrix;
};

/// Conservative central differences; refuses assembly where a(x) is not
/// uniformly elliptic with the model's declared constant.
DiscreteGenerator assemble_generator(const FilterModel& model, const Grid& grid);

/// Generator from an explicit matrix (rows of boundary nodes are zeroed).
DiscreteGenerator make_generator(const Grid& grid, SparseMatrix matrix);

struct StepReport {
  double clamped_mass = 0.0;  // trapezoid mass of the negative part removed, in mantissa units
  double min_value = 0.0;     // smallest value before clamping
  std::size_t iterations = 0;
};

/// Crank-Nicolson over one observation interval, prepared once per (generator,
/// delta, substeps): (I - dt/2 A) v_{j+1} = (I + dt/2 A) v_j with dt = delta/substeps.
/// substeps is raised to ceil(delta max|A_ii| / 2) when smaller, which keeps
/// I + dt/2 A nonnegative.
/// 1D uses a tridiagonal direct solve; 2D/3D use BiCGSTAB with a Jacobi
/// preconditioner to relative residual 1e-10.
class CrankNicolson {
 public:
  CrankNicolson(const DiscreteGenerator& gen, double delta, std::size_t substeps);
  // The iterative solver keeps a reference to implicit_part_.
  CrankNicolson(const CrankNicolson&) = delete;
  CrankNicolson& operator=(const CrankNicolson&) = delete;

  /// Propagates in place, clamps negative undershoot after the last substep.
  StepReport advance(DensityField& field) const;

  double delta() const { return delta_; }
  std::size_t substeps() const { return substeps_; }

 private:
  void solve_tridiagonal(std::vector<double>& rhs) const;

  const DiscreteGenerator* gen_;
  double delta_;
  std::size_t substeps_;
  SparseMatrix explicit_part_;  // I + dt/2 A
  // Tridiagonal factorization (1D).
  std::vector<double> lower_, upper_prime_, inv_denominator_;
  // Iterative solver (2D/3D).
  SparseMatrix implicit_part_;  // I - dt/2 A
  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> solver_;
};

/// One-shot propagation by delta; see CrankNicolson.
DensityField propagate(const DiscreteGenerator& gen, const DensityField& field, double delta,
                       std::size_t substeps, StepReport* report = nullptr);

/// Multiplication by exp(h(x)^T dY) with h sampled once on the grid.
class ObservationUpdate {
 public:
  ObservationUpdate(const FilterModel& model, const Grid& grid);

  /// values *= exp(h^T dY - c), log_scale += c with c the support maximum of h^T dY.
  void apply(DensityField& field, std::span<const double> increment) const;

  std::span<const double> observation_at(std::size_t node) const {
    return {h_.data() + node * obs_dim_, obs_dim_};
  }
  std::size_t observation_dimension() const { return obs_dim_; }

 private:
  std::size_t obs_dim_;
  std::vector<double> h_;
};

DensityField exp_update(const DensityField& field, const FilterModel& model,
                        std::span<const double> increment);

}  // namespace yyf
