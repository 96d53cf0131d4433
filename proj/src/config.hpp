#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace yyf {

/// Everything one CLI invocation needs. Parsed from an INI document with
/// sections [model] [grid] [schedule] [filter] [baselines] [sweep] [seeds]
/// [output] [validate]; a flat document of root keys is also accepted.
struct ExperimentConfig {
  std::string source;  // file name, for messages
  std::string hash;    // 16 hex digits of the document bytes

  std::string model = "linear1d";
  std::optional<LinearGaussian> custom;  // [model] type = linear

  std::size_t dimension = 1;
  double radius = 6.0;
  std::size_t points = 241;

  double terminal = 1.0;
  std::size_t steps = 100;
  std::size_t substeps = 4;
  std::size_t sim_substeps = 1;

  std::vector<std::string> test_functions{"x"};

  std::vector<std::string> baselines;
  std::size_t particles = 10000;
  std::size_t ks_paths = 10000;

  std::string sweep_kind = "delta";  // delta | radius | moment | l4 | lemma
  std::vector<double> deltas;
  std::vector<double> radii;
  double spacing = 0.05;
  std::string oracle = "kalman";
  std::size_t oracle_refine = 8;
  int moment_order = 2;
  std::size_t increments = 10000;

  std::uint64_t seed_base = 0;
  std::vector<std::uint64_t> seed_list;  // explicit list wins over base + count
  std::size_t seed_count = 50;

  std::string output_dir = "out";
  std::string output_format = "csv";  // csv | binary (paths only)

  std::size_t validate_samples = 2000;

  std::vector<std::string> defaults_applied;  // "key = value" lines

  FilterModel build_model() const;
  Grid build_grid() const;
  TimeSchedule schedule() const;
  std::vector<std::uint64_t> seeds() const;
};

/// Parses and validates; each applied default is written to `log` as
/// "default <key> = <value>".
ExperimentConfig parse_config(const std::string& text, const std::string& source, std::ostream* log = nullptr);
ExperimentConfig load_config(const std::string& path, std::ostream* log = nullptr);

/// FNV-1a 64 of the bytes, as 16 lowercase hex digits.
std::string content_hash(const std::string& bytes);

}  // namespace yyf
