#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "filter.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace yyf {

/// Fraction of the field's mass at |x| >= r. Nodes straddling the sphere
/// contribute the share of their cell beyond r.
double tail_mass(const DensityField& field, double r);

/// Normalized moment of |x|^order (order even, >= 2).
double moment(const DensityField& field, int order);

/// Mean error per axis value over replicate seeds, with a log-log slope fit.
struct SweepResult {
  std::string axis;  // "delta" or "R"
  std::vector<double> values;
  std::vector<double> mean_err;
  std::vector<double> stderrs;
  std::vector<std::size_t> counts;
  std::vector<std::vector<double>> cell_errors;  // [axis value][seed]
  std::vector<std::uint64_t> seeds;
  bool slope_defined = false;
  double slope = 0.0;
  double slope_ci = 0.0;  // 95% half-width
  std::map<std::string, std::vector<double>> series;  // extra per-axis curves
  std::map<std::string, bool> flags;

  bool passed() const;
};

enum class Oracle { kalman, fine_oracle, bootstrap_pf };
Oracle parse_oracle(const std::string& name);
std::string to_string(Oracle oracle);

struct SweepOptions {
  std::size_t substeps = 4;        // Crank-Nicolson substeps per delta
  std::size_t sim_substeps = 1;    // Euler-Maruyama substeps per finest step
  std::size_t oracle_refine = 8;   // finest step = min delta / oracle_refine
  std::size_t particles = 10000;   // bootstrap_pf oracle size
  double slope_low = 0.35;
  double slope_high = 0.65;
  int tail_order = 2;              // n in C / (1 + R^{2n})
  double tail_bound_factor = 1.5;
  int workers = 1;
};

/// Expected error of the normalized estimate against an oracle as delta shrinks.
/// Paths are simulated once per seed at the finest step and subsampled.
SweepResult convergence_sweep(const FilterModel& model, const Grid& grid, double terminal,
                              const std::vector<double>& deltas, const std::vector<std::uint64_t>& seeds,
                              Oracle oracle, const TestFunction& phi, const SweepOptions& options = {});

/// Estimates across domain radii at fixed spacing, against the largest radius.
/// Series "tail_mass": sup over knots of the seed-mean mass of the reference
/// field beyond each radius.
SweepResult radius_sweep(const FilterModel& model, const TimeSchedule& schedule,
                         const std::vector<double>& radii, double spacing,
                         const std::vector<std::uint64_t>& seeds, const TestFunction& phi,
                         const SweepOptions& options = {});

struct MomentGrowthReport {
  int order = 2;
  double initial = 0.0;            // integral of (1+|x|^order) sigma_0 S_R
  std::vector<double> ratio;       // per schedule (delta, delta/2): max over knots of mean / initial
  std::vector<double> exponent;    // log(ratio) / T
  double exponent_stderr = 0.0;    // seed noise of exponent[0] - exponent[1]
  std::vector<std::vector<double>> mean_curve;  // per schedule, per knot
  bool passed = false;
};

MomentGrowthReport moment_growth_check(const FilterModel& model, const Grid& grid,
                                       const TimeSchedule& schedule,
                                       const std::vector<std::uint64_t>& seeds, int order,
                                       const SweepOptions& options = {});

struct L4Report {
  std::vector<std::size_t> steps;  // K per schedule
  std::vector<double> sup_l2;      // sup over knots of E ||u_k||_2^2
  std::vector<double> sup_l4;      // sup over knots of E ||u_k||_4^4
  double variation = 0.0;          // max/min - 1 of sup_l4 across schedules
  bool passed = false;
};

/// u_k(tau_k) = exp(-h^T Y_{tau_{k-1}}) S_delta u~_k, averaged over seeds.
L4Report l4_stability_check(const FilterModel& model, const Grid& grid, double terminal,
                            const std::vector<std::size_t>& steps, const std::vector<std::uint64_t>& seeds,
                            const SweepOptions& options = {});

struct LemmaReport {
  std::vector<double> deltas;
  std::vector<double> amplification;  // mean of int (e^{h dY} v)^4 / int v^4
  std::vector<double> stderrs;
  std::vector<double> expected;       // int v^4 e^{8|h|^2 delta} / int v^4
  double intercept = 0.0;
  double intercept_se = 0.0;
  double slope = 0.0;
  bool passed = false;
};

/// One-step quartic-mass amplification under dY ~ N(0, delta I), for the
/// field `field` (sigma_0 S_R when omitted).
LemmaReport exp_moment_lemma_check(const FilterModel& model, const Grid& grid,
                                   const std::vector<double>& deltas, std::size_t increments,
                                   std::uint64_t seed, const DensityField* field = nullptr);

/// CSV header "axis,value,mean_err,stderr,n".
void write_sweep_csv(std::ostream& os, const SweepResult& r, const std::string& comment = {});
/// Long format: series,axis,value,seed,metric.
void write_sweep_long_csv(std::ostream& os, const SweepResult& r, const std::string& comment = {});
/// One-line JSON: slope, slope_ci, pass flags, extra series.
std::string sweep_summary_json(const SweepResult& r);

}  // namespace yyf
