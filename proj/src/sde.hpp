#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "model.hpp"

namespace yyf {

/// Samples of a vector process at the knots of a schedule, row-major (K+1) x width.
struct StatePath {
  TimeSchedule schedule{1.0, 1};
  std::size_t dimension = 0;
  std::vector<double> values;

  std::span<const double> at(std::size_t k) const { return {values.data() + k * dimension, dimension}; }
};

struct ObservationPath {
  TimeSchedule schedule{1.0, 1};
  std::size_t dimension = 0;
  std::vector<double> values;  // Y at each knot; Y at tau_0 is exactly zero

  std::span<const double> at(std::size_t k) const { return {values.data() + k * dimension, dimension}; }
};

struct SimulatedPaths {
  StatePath state;
  ObservationPath observation;
};

/// Euler-Maruyama on delta/substeps, recorded at knots. Draws are keyed by
/// (seed, path_index, step) so replicas are reproducible in any order.
SimulatedPaths simulate(const FilterModel& model, const TimeSchedule& schedule, std::size_t substeps,
                        std::uint64_t seed, std::uint64_t path_index = 0);

/// Y_{tau_k} - Y_{tau_{k-1}} for k = 1..K, row-major K x dimension.
std::vector<double> observation_increments(const ObservationPath& path);

/// Keeps every `stride`-th knot of a path (stride must divide K).
ObservationPath subsample(const ObservationPath& path, std::size_t stride);
StatePath subsample(const StatePath& path, std::size_t stride);

/// CSV: optional leading comment, header "t,X_1..X_d,Y_1..Y_n", one row per knot.
void write_paths_csv(std::ostream& os, const SimulatedPaths& paths, const std::string& comment = {});
void write_paths_csv(const std::string& file, const SimulatedPaths& paths, const std::string& comment = {});
SimulatedPaths read_paths_csv(std::istream& is);

/// Little-endian binary cache with magic "YYPATH1".
void write_paths_binary(const std::string& file, const SimulatedPaths& paths);
SimulatedPaths read_paths_binary(const std::string& file);

}  // namespace yyf
