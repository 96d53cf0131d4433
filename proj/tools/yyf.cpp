#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "yyfilter/yyfilter.h"

namespace {

int workers_from_env() {
  const char* env = std::getenv("YYF_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) {
    std::fprintf(stderr, "warning: ignoring YYF_WORKERS='%s' (expected a positive integer)\n", env);
    return 1;
  }
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Yau-Yau nonlinear filtering toolkit"};
  app.set_version_flag("--version", std::string(yyf_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed_base = 0;

  const char* commands[][2] = {
      {"simulate", "Simulate state/observation paths"},
      {"filter", "Run the Yau-Yau filter on simulated observations"},
      {"baseline", "Run the baseline filters (Kalman, KS Monte-Carlo, particle filter, fine oracle)"},
      {"sweep", "Run a convergence, radius, moment, L4 or lemma sweep"},
      {"validate", "Check the model assumptions on the truncation domain"},
  };
  CLI::Option* seed_opt = nullptr;
  for (auto& c : commands) {
    auto* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (default: output.dir of the config)");
    sub->add_option("--workers", workers, "Worker threads (default: $YYF_WORKERS or 1)")->check(CLI::PositiveNumber);
    auto* s = sub->add_option("--seed-base", seed_base, "Override the first seed");
    if (!seed_opt) seed_opt = s;
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  const bool seed_given = app.get_subcommands().front()->get_option("--seed-base")->count() > 0;
  if (workers == 0) workers = workers_from_env();

  yyf_config* config = nullptr;
  yyf_status st = yyf_config_load(config_path.c_str(), "-", &config);
  if (st != YYF_OK) {
    std::fprintf(stderr, "error: %s\n", yyf_last_error());
    return 2;
  }
  if (seed_given) yyf_config_set_seed_base(config, seed_base);
  st = yyf_command_run(config, command.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), workers);
  yyf_config_free(config);
  if (st == YYF_OK) return 0;
  if (st == YYF_ERR_CHECK_FAILED) {
    std::fprintf(stderr, "%s: %s\n", command.c_str(), yyf_last_error());
    return 1;
  }
  std::fprintf(stderr, "error (%s): %s\n", yyf_status_name(st), yyf_last_error());
  return 2;
}
