#include "yyfilter/yyfilter.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "baselines.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "error.hpp"
#include "filter.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "model.hpp"
#include "sde.hpp"

struct yyf_model {
  yyf::FilterModel model;
};

struct yyf_grid {
  yyf::Grid grid;
};

struct yyf_paths {
  yyf::SimulatedPaths paths;
};

struct yyf_output {
  std::size_t knots;
  std::size_t functions;
  std::vector<double> estimates;
  double max_clamped;
  std::optional<yyf::FilterOutput> filter;
  std::optional<yyf::BaselineEstimates> baseline;
};

struct yyf_config {
  yyf::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

yyf_status status_of(yyf::ErrorCode code) {
  switch (code) {
    case yyf::ErrorCode::invalid_argument: return YYF_ERR_INVALID_ARGUMENT;
    case yyf::ErrorCode::unknown_name: return YYF_ERR_UNKNOWN_NAME;
    case yyf::ErrorCode::domain: return YYF_ERR_DOMAIN;
    case yyf::ErrorCode::numerical: return YYF_ERR_NUMERICAL;
    case yyf::ErrorCode::io: return YYF_ERR_IO;
    case yyf::ErrorCode::parse: return YYF_ERR_PARSE;
    case yyf::ErrorCode::check_failed: return YYF_ERR_CHECK_FAILED;
    case yyf::ErrorCode::internal: return YYF_ERR_INTERNAL;
  }
  return YYF_ERR_INTERNAL;
}

template <typename F>
yyf_status guard(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const yyf::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return YYF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return YYF_ERR_INTERNAL;
  }
}

yyf_status null_arg(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return YYF_ERR_INVALID_ARGUMENT;
}

std::vector<std::string> label_list(const char* const* labels, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!labels[i]) yyf::fail(yyf::ErrorCode::invalid_argument, "label " + std::to_string(i) + " is NULL");
    out.emplace_back(labels[i]);
  }
  if (out.empty()) out.emplace_back("x");
  return out;
}

yyf_status copy_row(const std::vector<double>& values, std::size_t width, std::size_t knot, std::size_t knots,
                    double* out, std::size_t capacity) {
  if (knot >= knots) yyf::fail(yyf::ErrorCode::invalid_argument, "knot " + std::to_string(knot) + " out of range");
  if (capacity < width) yyf::fail(yyf::ErrorCode::invalid_argument, "buffer holds fewer than " + std::to_string(width) + " values");
  std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(knot * width), width, out);
  return YYF_OK;
}

std::unique_ptr<std::ostream> open_log(const char* log_file, std::ostream*& log) {
  log = nullptr;
  if (!log_file) return nullptr;
  if (std::string(log_file) == "-") {
    log = &std::cerr;
    return nullptr;
  }
  auto f = std::make_unique<std::ofstream>(log_file, std::ios::app);
  if (!*f) yyf::fail(yyf::ErrorCode::io, std::string("cannot open log '") + log_file + "'");
  log = f.get();
  return f;
}

}  // namespace

extern "C" {

const char* yyf_version(void) { return yyf::version_string(); }

const char* yyf_last_error(void) { return last_error.c_str(); }

const char* yyf_status_name(yyf_status status) {
  switch (status) {
    case YYF_OK: return "ok";
    case YYF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case YYF_ERR_UNKNOWN_NAME: return "unknown name";
    case YYF_ERR_DOMAIN: return "domain error";
    case YYF_ERR_NUMERICAL: return "numerical error";
    case YYF_ERR_IO: return "i/o error";
    case YYF_ERR_PARSE: return "parse error";
    case YYF_ERR_CHECK_FAILED: return "check failed";
    case YYF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

yyf_status yyf_model_builtin(const char* name, yyf_model** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new yyf_model{yyf::builtin_model(name)};
    return YYF_OK;
  });
}

size_t yyf_model_dimension(const yyf_model* model) { return model ? model->model.dimension() : 0; }

void yyf_model_free(yyf_model* model) { delete model; }

yyf_status yyf_grid_create(size_t dimension, double radius, size_t points_per_axis, yyf_grid** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new yyf_grid{yyf::Grid(dimension, radius, points_per_axis)};
    return YYF_OK;
  });
}

size_t yyf_grid_node_count(const yyf_grid* grid) { return grid ? grid->grid.node_count() : 0; }

void yyf_grid_free(yyf_grid* grid) { delete grid; }

yyf_status yyf_simulate(const yyf_model* model, double terminal, size_t steps, size_t substeps, uint64_t seed,
                        yyf_paths** out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new yyf_paths{yyf::simulate(model->model, yyf::TimeSchedule(terminal, steps), substeps, seed)};
    return YYF_OK;
  });
}

size_t yyf_paths_steps(const yyf_paths* paths) { return paths ? paths->paths.observation.schedule.steps() : 0; }

yyf_status yyf_paths_observation(const yyf_paths* paths, size_t knot, double* out, size_t capacity) {
  if (!paths) return null_arg("paths");
  if (!out) return null_arg("out");
  return guard([&] {
    const auto& p = paths->paths.observation;
    return copy_row(p.values, p.dimension, knot, p.schedule.steps() + 1, out, capacity);
  });
}

yyf_status yyf_paths_state(const yyf_paths* paths, size_t knot, double* out, size_t capacity) {
  if (!paths) return null_arg("paths");
  if (!out) return null_arg("out");
  return guard([&] {
    const auto& p = paths->paths.state;
    return copy_row(p.values, p.dimension, knot, p.schedule.steps() + 1, out, capacity);
  });
}

yyf_status yyf_paths_write_csv(const yyf_paths* paths, const char* file) {
  if (!paths) return null_arg("paths");
  if (!file) return null_arg("file");
  return guard([&] {
    yyf::write_paths_csv(std::string(file), paths->paths, std::string("yyfilter ") + yyf::version_string());
    return YYF_OK;
  });
}

void yyf_paths_free(yyf_paths* paths) { delete paths; }

yyf_status yyf_run_filter(const yyf_model* model, const yyf_grid* grid, const yyf_paths* paths,
                          const char* const* labels, size_t label_count, size_t substeps, yyf_output** out) {
  if (!model) return null_arg("model");
  if (!grid) return null_arg("grid");
  if (!paths) return null_arg("paths");
  if (!out) return null_arg("out");
  if (label_count && !labels) return null_arg("labels");
  return guard([&] {
    const auto phis = yyf::builtin_test_functions(label_list(labels, label_count), model->model.dimension());
    const auto& obs = paths->paths.observation;
    auto res = yyf::run_filter(model->model, grid->grid, obs.schedule, obs, phis, substeps);
    const double clamped = res.clamped_mass.empty() ? 0.0 : *std::max_element(res.clamped_mass.begin(), res.clamped_mass.end());
    auto* o = new yyf_output{obs.schedule.steps() + 1, phis.size(), res.estimates, clamped, std::move(res), std::nullopt};
    *out = o;
    return YYF_OK;
  });
}

yyf_status yyf_run_kalman(const yyf_model* model, const yyf_paths* paths, const char* const* labels,
                          size_t label_count, yyf_output** out) {
  if (!model) return null_arg("model");
  if (!paths) return null_arg("paths");
  if (!out) return null_arg("out");
  if (label_count && !labels) return null_arg("labels");
  return guard([&] {
    const auto names = label_list(labels, label_count);
    auto est = yyf::kalman_estimates(yyf::kalman_filter(model->model, paths->paths.observation), names);
    const auto knots = est.schedule.steps() + 1;
    *out = new yyf_output{knots, names.size(), est.estimates, 0.0, std::nullopt, std::move(est)};
    return YYF_OK;
  });
}

size_t yyf_output_knots(const yyf_output* output) { return output ? output->knots : 0; }

size_t yyf_output_functions(const yyf_output* output) { return output ? output->functions : 0; }

yyf_status yyf_output_estimate(const yyf_output* output, size_t knot, size_t fn, double* value) {
  if (!output) return null_arg("output");
  if (!value) return null_arg("value");
  return guard([&] {
    if (knot >= output->knots || fn >= output->functions)
      yyf::fail(yyf::ErrorCode::invalid_argument, "estimate index out of range");
    *value = output->estimates[knot * output->functions + fn];
    return YYF_OK;
  });
}

double yyf_output_max_clamped_mass(const yyf_output* output) { return output ? output->max_clamped : 0.0; }

yyf_status yyf_output_write_csv(const yyf_output* output, const char* file) {
  if (!output) return null_arg("output");
  if (!file) return null_arg("file");
  return guard([&] {
    auto os = yyf::open_output(file);
    const std::string comment = std::string("yyfilter ") + yyf::version_string();
    if (output->filter) yyf::write_filter_csv(os, *output->filter, comment);
    else yyf::write_baseline_csv(os, *output->baseline, comment);
    if (!os) yyf::fail(yyf::ErrorCode::io, std::string("failed writing '") + file + "'");
    return YYF_OK;
  });
}

void yyf_output_free(yyf_output* output) { delete output; }

yyf_status yyf_config_load(const char* path, const char* log_file, yyf_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guard([&] {
    std::ostream* log = nullptr;
    auto holder = open_log(log_file, log);
    *out = new yyf_config{yyf::load_config(path, log)};
    return YYF_OK;
  });
}

yyf_status yyf_config_parse(const char* text, const char* log_file, yyf_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guard([&] {
    std::ostream* log = nullptr;
    auto holder = open_log(log_file, log);
    *out = new yyf_config{yyf::parse_config(text, "<string>", log)};
    return YYF_OK;
  });
}

yyf_status yyf_config_set_seed_base(yyf_config* config, uint64_t seed_base) {
  if (!config) return null_arg("config");
  auto& c = config->config;
  if (!c.seed_list.empty()) {
    c.seed_count = c.seed_list.size();
    c.seed_list.clear();
  }
  c.seed_base = seed_base;
  last_error.clear();
  return YYF_OK;
}

const char* yyf_config_hash(const yyf_config* config) { return config ? config->config.hash.c_str() : ""; }

void yyf_config_free(yyf_config* config) { delete config; }

yyf_status yyf_command_run(const yyf_config* config, const char* command, const char* out_dir, int workers) {
  if (!config) return null_arg("config");
  if (!command) return null_arg("command");
  return guard([&] {
    yyf::CommandOptions opts;
    opts.out_dir = out_dir ? out_dir : "";
    opts.workers = workers;
    opts.log = &std::cerr;
    const int rc = yyf::run_command(config->config, command, opts);
    if (rc != 0) {
      last_error = "one or more checks failed";
      return YYF_ERR_CHECK_FAILED;
    }
    return YYF_OK;
  });
}

}  // extern "C"
