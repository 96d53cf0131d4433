#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "generator.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "sde.hpp"

namespace yyf {

/// Per-knot normalized estimates of E[phi(X_t) | Y_t] and field diagnostics.
/// Knot 0 holds the estimates of the mollified prior.
struct FilterOutput {
  TimeSchedule schedule{1.0, 1};
  std::vector<std::string> labels;
  std::vector<double> estimates;        // (K+1) x labels.size(), row-major
  std::vector<double> mass_log;         // log of the represented mass at each knot
  std::vector<double> clamped_mass;     // clamped negative mass relative to field mass
  std::vector<double> min_value;        // smallest propagated value before clamping

  double estimate(std::size_t knot, std::size_t fn) const { return estimates[knot * labels.size() + fn]; }
};

/// Called after each knot: the propagated field S_delta u (before the
/// observation update) and the updated field after exp_update.
using KnotObserver =
    std::function<void(std::size_t knot, const DensityField& propagated, const DensityField& updated)>;

struct FilterOptions {
  bool renormalize = true;
  double clamp_tolerance = 1e-8;  // max clamped mass per step relative to field mass
  KnotObserver observer;
};

/// Offline stage: generator, Crank-Nicolson stepper and observation samples
/// for one (model, grid, delta) triple. Immutable once built.
class YauYauFilter {
 public:
  YauYauFilter(const FilterModel& model, const Grid& grid, double delta, std::size_t substeps);
  YauYauFilter(const YauYauFilter&) = delete;
  YauYauFilter& operator=(const YauYauFilter&) = delete;

  const DiscreteGenerator& generator() const { return generator_; }
  const Grid& grid() const { return generator_.grid; }

  /// Online stage over an observation path on a schedule with this filter's delta.
  FilterOutput run(const ObservationPath& obs, std::span<const TestFunction> test_functions,
                   const FilterOptions& options = {}) const;

  /// Online stage from an explicit initial field.
  FilterOutput run(DensityField initial, const ObservationPath& obs,
                   std::span<const TestFunction> test_functions, const FilterOptions& options = {}) const;

 private:
  const FilterModel* model_;
  DiscreteGenerator generator_;
  CrankNicolson stepper_;
  ObservationUpdate update_;
  double delta_;
};

FilterOutput run_filter(const FilterModel& model, const Grid& grid, const TimeSchedule& schedule,
                        const ObservationPath& obs, std::span<const TestFunction> test_functions,
                        std::size_t substeps = 4, const FilterOptions& options = {});

/// integrate(field, phi) / integrate(field, 1) with the shared log_scale cancelled.
double estimate(const DensityField& field, const TestFunction& phi);
double estimate(const DensityField& field, std::span<const double> phi_at_nodes);

/// CSV: comment line, header t,<labels>,mass_log_scale,clamped_mass.
void write_filter_csv(std::ostream& os, const FilterOutput& out, const std::string& comment = {});

}  // namespace yyf
