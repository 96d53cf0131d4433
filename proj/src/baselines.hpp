#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "filter.hpp"
#include "model.hpp"
#include "sde.hpp"

namespace yyf {

struct KalmanResult {
  TimeSchedule schedule{1.0, 1};
  std::vector<Eigen::VectorXd> means;        // per knot, knot 0 is the prior
  std::vector<Eigen::MatrixXd> covariances;
};

/// Continuous-discrete Kalman filter: exact moment propagation over delta
/// (Van Loan matrix exponential), then a measurement update treating dY_k as
/// H X delta plus N(0, delta I) noise.
KalmanResult kalman_filter(const FilterModel& model, const ObservationPath& obs);

/// Particles with log-weights (Z-tilde per particle).
struct WeightedEnsemble {
  std::size_t dimension = 1;
  std::vector<double> particles;  // count x dimension
  std::vector<double> log_weights;

  std::size_t count() const { return log_weights.size(); }
  std::vector<double> normalized_weights() const;
  double effective_sample_size() const;
};

/// Per-knot estimates with Monte-Carlo standard errors; shared by the
/// ensemble baselines and the Kalman readout.
struct BaselineEstimates {
  TimeSchedule schedule{1.0, 1};
  std::vector<std::string> labels;
  std::vector<double> estimates;  // (K+1) x labels
  std::vector<double> stderrs;    // (K+1) x labels
  std::vector<double> ess;        // per knot (NaN when not applicable)
  bool degenerate = false;        // ESS fell below 10 at some knot

  double estimate(std::size_t knot, std::size_t fn) const { return estimates[knot * labels.size() + fn]; }
  double stderr_at(std::size_t knot, std::size_t fn) const { return stderrs[knot * labels.size() + fn]; }
};

/// Gaussian expectations of builtin test-function labels under the Kalman posterior.
BaselineEstimates kalman_estimates(const KalmanResult& result, const std::vector<std::string>& labels);

struct KsOptions {
  std::size_t substeps = 4;
  std::size_t bootstrap_replicates = 64;
};

/// Kallianpur-Striebel estimator: N state paths under the reference measure,
/// log Z = sum h^T dY - 1/2 |h|^2 dt at substep resolution (Y linearly
/// interpolated between knots), self-normalized, bootstrap standard errors.
BaselineEstimates ks_monte_carlo(const FilterModel& model, const ObservationPath& obs,
                                 std::span<const TestFunction> test_functions, std::size_t particles,
                                 std::uint64_t seed, const KsOptions& options = {});

struct PfOptions {
  std::size_t substeps = 1;
  std::size_t islands = 0;  // 0: 10 islands when particles >= 100, else 1
};

/// Bootstrap particle filter with systematic resampling when ESS < N/2.
/// Particles are split into independent islands; the standard error is the
/// spread of island estimates (or sqrt(var/ESS) for a single island).
BaselineEstimates bootstrap_pf(const FilterModel& model, const ObservationPath& obs,
                               std::span<const TestFunction> test_functions, std::size_t particles,
                               std::uint64_t seed, const PfOptions& options = {});

/// Yau-Yau run on a refined schedule and grid, restricted to the coarse knots.
FilterOutput fine_oracle(const FilterModel& model, const Grid& grid, const ObservationPath& fine_obs,
                         std::size_t coarse_steps, std::span<const TestFunction> test_functions,
                         std::size_t space_refine = 2, std::size_t substeps = 4);

/// CSV: comment line, header t,<labels>,<label>_stderr...,ess.
void write_baseline_csv(std::ostream& os, const BaselineEstimates& est, const std::string& comment = {});

}  // namespace yyf
