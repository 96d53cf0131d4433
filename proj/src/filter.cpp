#include "filter.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "error.hpp"
#include "io.hpp"

namespace yyf {

YauYauFilter::YauYauFilter(const FilterModel& model, const Grid& grid, double delta, std::size_t substeps)
    : model_(&model),
      generator_(assemble_generator(model, grid)),
      stepper_(generator_, delta, substeps),
      update_(model, grid),
      delta_(delta) {}

FilterOutput YauYauFilter::run(const ObservationPath& obs, std::span<const TestFunction> test_functions,
                               const FilterOptions& options) const {
  return run(discretize_initial(*model_, grid()), obs, test_functions, options);
}

FilterOutput YauYauFilter::run(DensityField field, const ObservationPath& obs,
                               std::span<const TestFunction> test_functions,
                               const FilterOptions& options) const {
  const auto& schedule = obs.schedule;
  require(std::abs(schedule.delta() - delta_) <= 1e-12 * delta_,
          "observation schedule step differs from the filter's delta");
  require(obs.dimension == update_.observation_dimension(), "observation dimension does not match the model");
  require(field.values.size() == grid().node_count(), "initial field does not match the grid");

  const std::size_t K = schedule.steps();
  const std::size_t nf = test_functions.size();
  std::vector<std::vector<double>> phi(nf);
  for (std::size_t i = 0; i < nf; ++i) phi[i] = grid().sample(test_functions[i].evaluate);

  FilterOutput out;
  out.schedule = schedule;
  for (const auto& tf : test_functions) out.labels.push_back(tf.label);
  out.estimates.assign((K + 1) * nf, 0.0);
  out.mass_log.assign(K + 1, 0.0);
  out.clamped_mass.assign(K + 1, 0.0);
  out.min_value.assign(K + 1, 0.0);

  auto record = [&](std::size_t k) {
    const ScaledValue mass = integrate(field);
    if (!(mass.mantissa >= 1e-300))
      fail(ErrorCode::numerical, "filter mass collapsed at knot " + std::to_string(k));
    for (std::size_t i = 0; i < nf; ++i)
      out.estimates[k * nf + i] = integrate(field, phi[i]).mantissa / mass.mantissa;
    out.mass_log[k] = mass.log_value();
    if (options.renormalize) {
      const double inv = 1.0 / mass.mantissa;
      for (double& v : field.values) v *= inv;
      field.log_scale += std::log(mass.mantissa);
    }
  };

  record(0);
  out.min_value[0] = *std::min_element(field.values.begin(), field.values.end());
  const std::vector<double> increments = observation_increments(obs);
  const std::size_t n = obs.dimension;
  std::optional<DensityField> propagated;
  for (std::size_t k = 1; k <= K; ++k) {
    const StepReport step = stepper_.advance(field);
    const double kept = integrate(field).mantissa;
    const double relative = step.clamped_mass > 0.0 ? step.clamped_mass / (kept + step.clamped_mass) : 0.0;
    if (relative > options.clamp_tolerance)
      fail(ErrorCode::numerical, "clamped negative mass " + format_double(relative) +
                                     " of the field exceeds tolerance at knot " + std::to_string(k));
    out.clamped_mass[k] = relative;
    out.min_value[k] = step.min_value;
    if (options.observer) propagated = field;
    update_.apply(field, std::span<const double>(increments.data() + (k - 1) * n, n));
    record(k);
    if (options.observer) options.observer(k, *propagated, field);
  }
  return out;
}

FilterOutput run_filter(const FilterModel& model, const Grid& grid, const TimeSchedule& schedule,
                        const ObservationPath& obs, std::span<const TestFunction> test_functions,
                        std::size_t substeps, const FilterOptions& options) {
  require(obs.schedule.steps() == schedule.steps() &&
              std::abs(obs.schedule.terminal() - schedule.terminal()) <= 1e-12 * schedule.terminal(),
          "observation path is not on the filter schedule");
  const YauYauFilter filter(model, grid, schedule.delta(), substeps);
  return filter.run(obs, test_functions, options);
}

double estimate(const DensityField& field, std::span<const double> phi_at_nodes) {
  const double mass = integrate(field).mantissa;
  if (!(mass > 0.0)) fail(ErrorCode::numerical, "cannot normalize a field with zero mass");
  return integrate(field, phi_at_nodes).mantissa / mass;
}

double estimate(const DensityField& field, const TestFunction& phi) {
  return estimate(field, field.grid.sample(phi.evaluate));
}

void write_filter_csv(std::ostream& os, const FilterOutput& out, const std::string& comment) {
  write_comment(os, comment);
  os << 't';
  for (const auto& l : out.labels) os << ',' << l;
  os << ",mass_log_scale,clamped_mass\n";
  const std::size_t nf = out.labels.size();
  for (std::size_t k = 0; k <= out.schedule.steps(); ++k) {
    os << format_double(out.schedule.knot(k));
    for (std::size_t i = 0; i < nf; ++i) os << ',' << format_double(out.estimates[k * nf + i]);
    os << ',' << format_double(out.mass_log[k]) << ',' << format_double(out.clamped_mass[k]) << '\n';
  }
}

}  // namespace yyf
