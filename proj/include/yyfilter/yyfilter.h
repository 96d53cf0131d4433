#ifndef YYFILTER_H
#define YYFILTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define YYF_API __declspec(dllexport)
#elif defined(__GNUC__)
#define YYF_API __attribute__((visibility("default")))
#else
#define YYF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum yyf_status {
  YYF_OK = 0,
  YYF_ERR_INVALID_ARGUMENT = 1,
  YYF_ERR_UNKNOWN_NAME = 2,
  YYF_ERR_DOMAIN = 3,
  YYF_ERR_NUMERICAL = 4,
  YYF_ERR_IO = 5,
  YYF_ERR_PARSE = 6,
  YYF_ERR_CHECK_FAILED = 7,
  YYF_ERR_INTERNAL = 8
} yyf_status;

typedef struct yyf_model yyf_model;
typedef struct yyf_grid yyf_grid;
typedef struct yyf_paths yyf_paths;
typedef struct yyf_output yyf_output;
typedef struct yyf_config yyf_config;

YYF_API const char* yyf_version(void);

/* Message of the last failed call on this thread; "" after a success. */
YYF_API const char* yyf_last_error(void);
YYF_API const char* yyf_status_name(yyf_status status);

YYF_API yyf_status yyf_model_builtin(const char* name, yyf_model** out);
YYF_API size_t yyf_model_dimension(const yyf_model* model);
YYF_API void yyf_model_free(yyf_model* model);

YYF_API yyf_status yyf_grid_create(size_t dimension, double radius, size_t points_per_axis, yyf_grid** out);
YYF_API size_t yyf_grid_node_count(const yyf_grid* grid);
YYF_API void yyf_grid_free(yyf_grid* grid);

/* Euler-Maruyama path with `substeps` steps per knot; knots k = 0..steps. */
YYF_API yyf_status yyf_simulate(const yyf_model* model, double terminal, size_t steps, size_t substeps,
                                uint64_t seed, yyf_paths** out);
YYF_API size_t yyf_paths_steps(const yyf_paths* paths);
/* Copies Y at knot k into out[0..observation dimension). */
YYF_API yyf_status yyf_paths_observation(const yyf_paths* paths, size_t knot, double* out, size_t capacity);
YYF_API yyf_status yyf_paths_state(const yyf_paths* paths, size_t knot, double* out, size_t capacity);
YYF_API yyf_status yyf_paths_write_csv(const yyf_paths* paths, const char* file);
YYF_API void yyf_paths_free(yyf_paths* paths);

YYF_API yyf_status yyf_run_filter(const yyf_model* model, const yyf_grid* grid, const yyf_paths* paths,
                                  const char* const* labels, size_t label_count, size_t substeps,
                                  yyf_output** out);
/* Kalman posterior expectations of the same labels (linear models only). */
YYF_API yyf_status yyf_run_kalman(const yyf_model* model, const yyf_paths* paths, const char* const* labels,
                                  size_t label_count, yyf_output** out);
YYF_API size_t yyf_output_knots(const yyf_output* output);
YYF_API size_t yyf_output_functions(const yyf_output* output);
YYF_API yyf_status yyf_output_estimate(const yyf_output* output, size_t knot, size_t fn, double* value);
YYF_API double yyf_output_max_clamped_mass(const yyf_output* output);
YYF_API yyf_status yyf_output_write_csv(const yyf_output* output, const char* file);
YYF_API void yyf_output_free(yyf_output* output);

/* Applied defaults are echoed to `log_file` when not NULL ("-" is stderr). */
YYF_API yyf_status yyf_config_load(const char* path, const char* log_file, yyf_config** out);
YYF_API yyf_status yyf_config_parse(const char* text, const char* log_file, yyf_config** out);
YYF_API yyf_status yyf_config_set_seed_base(yyf_config* config, uint64_t seed_base);
YYF_API const char* yyf_config_hash(const yyf_config* config);
YYF_API void yyf_config_free(yyf_config* config);

/* Runs simulate | filter | baseline | sweep | validate. out_dir NULL or ""
 * uses the config's output.dir. Returns YYF_ERR_CHECK_FAILED when the
 * command ran but a requested check did not pass. Progress goes to stderr. */
YYF_API yyf_status yyf_command_run(const yyf_config* config, const char* command, const char* out_dir,
                                   int workers);

#ifdef __cplusplus
}
#endif

#endif
