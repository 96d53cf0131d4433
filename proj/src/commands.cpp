#include "commands.hpp"

#include <filesystem>
#include <ostream>

#include <json.hpp>

#include "baselines.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "filter.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "sde.hpp"

#ifndef YYF_VERSION_STRING
#define YYF_VERSION_STRING "0.0.0"
#endif

namespace yyf {

const char* version_string() { return YYF_VERSION_STRING; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "filter", "baseline", "sweep", "validate"};
  return names;
}

namespace {

using json = nlohmann::ordered_json;

struct Context {
  const ExperimentConfig& config;
  std::filesystem::path out;
  int workers;
  std::ostream* log;

  std::string header(const std::string& extra = {}) const {
    std::string s = std::string("yyfilter ") + version_string() + " config=" + config.hash + " model=" + config.model;
    return extra.empty() ? s : s + " " + extra;
  }
  std::string file(const std::string& name) const { return (out / name).string(); }
  void note(const std::string& msg) const {
    if (log) *log << msg << '\n';
  }
  json provenance() const {
    json j;
    j["version"] = version_string();
    j["config_hash"] = config.hash;
    j["model"] = config.model;
    return j;
  }
};

/// The knot path and, at sim_substeps times finer resolution, the same
/// realisation for the fine oracle.
struct SeedPaths {
  SimulatedPaths fine;
  SimulatedPaths coarse;
};

SeedPaths simulate_seed(const ExperimentConfig& c, const FilterModel& model, std::uint64_t seed) {
  SimulatedPaths fine = simulate(model, TimeSchedule(c.terminal, c.steps * c.sim_substeps), 1, seed);
  SimulatedPaths coarse{subsample(fine.state, c.sim_substeps), subsample(fine.observation, c.sim_substeps)};
  return {std::move(fine), std::move(coarse)};
}

void write_text(const std::string& file, const std::string& text) {
  auto os = open_output(file);
  os << text << '\n';
  if (!os) fail(ErrorCode::io, "failed writing '" + file + "'");
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

int cmd_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  const FilterModel model = c.build_model();
  const auto seeds = c.seeds();
  std::vector<SimulatedPaths> paths(seeds.size());
  parallel_for(seeds.size(), ctx.workers, [&](std::size_t s) { paths[s] = simulate_seed(c, model, seeds[s]).coarse; });
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (c.output_format == "binary") {
      write_paths_binary(ctx.file("paths_" + seed_tag(seeds[s]) + ".bin"), paths[s]);
    } else {
      write_paths_csv(ctx.file("paths_" + seed_tag(seeds[s]) + ".csv"), paths[s],
                      ctx.header("seed=" + std::to_string(seeds[s])));
    }
  }
  ctx.note("simulate: wrote " + std::to_string(seeds.size()) + " path files to " + ctx.out.string());
  return 0;
}

int cmd_filter(const Context& ctx) {
  const auto& c = ctx.config;
  const FilterModel model = c.build_model();
  const Grid grid = c.build_grid();
  const auto phis = builtin_test_functions(c.test_functions, c.dimension);
  const YauYauFilter filter(model, grid, c.schedule().delta(), c.substeps);
  const auto seeds = c.seeds();
  std::vector<FilterOutput> outs(seeds.size());
  parallel_for(seeds.size(), ctx.workers, [&](std::size_t s) {
    outs[s] = filter.run(simulate_seed(c, model, seeds[s]).coarse.observation, phis);
  });
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    auto os = open_output(ctx.file("filter_" + seed_tag(seeds[s]) + ".csv"));
    write_filter_csv(os, outs[s], ctx.header("seed=" + std::to_string(seeds[s])));
  }
  ctx.note("filter: wrote " + std::to_string(seeds.size()) + " estimate files to " + ctx.out.string());
  return 0;
}

BaselineEstimates from_filter_output(const FilterOutput& out) {
  BaselineEstimates b;
  b.schedule = out.schedule;
  b.labels = out.labels;
  b.estimates = out.estimates;
  b.stderrs.assign(out.estimates.size(), 0.0);
  b.ess.assign(out.schedule.steps() + 1, std::numeric_limits<double>::quiet_NaN());
  return b;
}

int cmd_baseline(const Context& ctx) {
  const auto& c = ctx.config;
  const FilterModel model = c.build_model();
  const auto phis = builtin_test_functions(c.test_functions, c.dimension);
  const auto seeds = c.seeds();
  for (const auto& m : c.baselines)
    if (m == "fine_oracle" && c.sim_substeps < 2)
      fail(ErrorCode::invalid_argument, "fine_oracle needs filter.sim_substeps >= 2 for its time refinement");
  std::optional<Grid> grid;
  if (std::find(c.baselines.begin(), c.baselines.end(), "fine_oracle") != c.baselines.end()) grid.emplace(c.build_grid());

  const std::size_t nm = c.baselines.size();
  std::vector<BaselineEstimates> results(seeds.size() * nm);
  parallel_for(seeds.size(), ctx.workers, [&](std::size_t s) {
    const SeedPaths p = simulate_seed(c, model, seeds[s]);
    const auto& obs = p.coarse.observation;
    const std::uint64_t mc_seed = mix64(seeds[s] ^ 0xba5e11e5ULL);
    for (std::size_t m = 0; m < nm; ++m) {
      const auto& name = c.baselines[m];
      auto& slot = results[s * nm + m];
      if (name == "kalman") {
        slot = kalman_estimates(kalman_filter(model, obs), c.test_functions);
      } else if (name == "ks_monte_carlo") {
        KsOptions o;
        o.substeps = c.substeps;
        slot = ks_monte_carlo(model, obs, phis, c.ks_paths, mc_seed, o);
      } else if (name == "bootstrap_pf") {
        slot = bootstrap_pf(model, obs, phis, c.particles, mc_seed);
      } else {
        slot = from_filter_output(fine_oracle(model, *grid, p.fine.observation, c.steps, phis, 2, c.substeps));
      }
    }
  });
  for (std::size_t s = 0; s < seeds.size(); ++s)
    for (std::size_t m = 0; m < nm; ++m) {
      const auto& r = results[s * nm + m];
      if (r.degenerate)
        ctx.note("warning: " + c.baselines[m] + " seed " + std::to_string(seeds[s]) + " fell below ESS 10");
      auto os = open_output(ctx.file("baseline_" + c.baselines[m] + "_" + seed_tag(seeds[s]) + ".csv"));
      write_baseline_csv(os, r, ctx.header("seed=" + std::to_string(seeds[s]) + " method=" + c.baselines[m]));
    }
  ctx.note("baseline: wrote " + std::to_string(results.size()) + " files to " + ctx.out.string());
  return 0;
}

SweepOptions sweep_options(const ExperimentConfig& c, int workers) {
  SweepOptions o;
  o.substeps = c.substeps;
  o.sim_substeps = c.sim_substeps;
  o.oracle_refine = c.oracle_refine;
  o.particles = c.particles;
  o.workers = workers;
  return o;
}

int write_sweep(const Context& ctx, const SweepResult& r) {
  {
    auto os = open_output(ctx.file("sweep.csv"));
    write_sweep_csv(os, r, ctx.header("sweep=" + ctx.config.sweep_kind));
  }
  {
    auto os = open_output(ctx.file("sweep_long.csv"));
    write_sweep_long_csv(os, r, ctx.header("sweep=" + ctx.config.sweep_kind));
  }
  json j = ctx.provenance();
  j["kind"] = ctx.config.sweep_kind;
  j.update(json::parse(sweep_summary_json(r)));
  write_text(ctx.file("sweep_summary.json"), j.dump());
  for (const auto& [flag, ok] : r.flags) ctx.note(std::string(ok ? "PASS " : "FAIL ") + flag);
  if (r.slope_defined) ctx.note("slope " + format_double(r.slope) + " +- " + format_double(r.slope_ci));
  return r.passed() ? 0 : 1;
}

int cmd_sweep(const Context& ctx) {
  const auto& c = ctx.config;
  const FilterModel model = c.build_model();
  const auto seeds = c.seeds();
  const SweepOptions opts = sweep_options(c, ctx.workers);
  const TestFunction phi = builtin_test_function(c.test_functions.front(), c.dimension);
  const std::string head = ctx.header("sweep=" + c.sweep_kind);

  if (c.sweep_kind == "delta")
    return write_sweep(ctx, convergence_sweep(model, c.build_grid(), c.terminal, c.deltas, seeds,
                                              parse_oracle(c.oracle), phi, opts));
  if (c.sweep_kind == "radius")
    return write_sweep(ctx, radius_sweep(model, c.schedule(), c.radii, c.spacing, seeds, phi, opts));

  json j = ctx.provenance();
  j["kind"] = c.sweep_kind;
  bool passed = false;
  auto os = open_output(ctx.file("sweep.csv"));
  write_comment(os, head);
  if (c.sweep_kind == "moment") {
    const auto rep = moment_growth_check(model, c.build_grid(), c.schedule(), seeds, c.moment_order, opts);
    os << "delta,ratio,exponent\n";
    const double d[] = {c.schedule().delta(), c.schedule().delta() / 2};
    for (std::size_t i = 0; i < rep.ratio.size(); ++i)
      os << format_double(d[i]) << ',' << format_double(rep.ratio[i]) << ',' << format_double(rep.exponent[i]) << '\n';
    auto lf = open_output(ctx.file("sweep_long.csv"));
    write_comment(lf, head);
    lf << "series,axis,value,knot,metric\n";
    for (std::size_t i = 0; i < rep.mean_curve.size(); ++i)
      for (std::size_t k = 0; k < rep.mean_curve[i].size(); ++k)
        lf << "weighted_moment,delta," << format_double(d[i]) << ',' << k << ',' << format_double(rep.mean_curve[i][k]) << '\n';
    j["order"] = rep.order;
    j["initial"] = rep.initial;
    j["ratio"] = rep.ratio;
    j["exponent"] = rep.exponent;
    passed = rep.passed;
  } else if (c.sweep_kind == "l4") {
    std::vector<std::size_t> steps;
    for (double d : c.deltas) steps.push_back(static_cast<std::size_t>(std::llround(c.terminal / d)));
    const auto rep = l4_stability_check(model, c.build_grid(), c.terminal, steps, seeds, opts);
    os << "delta,sup_l2,sup_l4\n";
    for (std::size_t i = 0; i < steps.size(); ++i)
      os << format_double(c.deltas[i]) << ',' << format_double(rep.sup_l2[i]) << ',' << format_double(rep.sup_l4[i]) << '\n';
    j["deltas"] = c.deltas;
    j["sup_l4"] = rep.sup_l4;
    j["variation"] = rep.variation;
    passed = rep.passed;
  } else {
    const auto rep = exp_moment_lemma_check(model, c.build_grid(), c.deltas, c.increments, c.seeds().front());
    os << "delta,amplification,stderr,expected\n";
    for (std::size_t i = 0; i < rep.deltas.size(); ++i)
      os << format_double(rep.deltas[i]) << ',' << format_double(rep.amplification[i]) << ','
         << format_double(rep.stderrs[i]) << ',' << format_double(rep.expected[i]) << '\n';
    j["deltas"] = rep.deltas;
    j["amplification"] = rep.amplification;
    j["expected"] = rep.expected;
    j["slope"] = rep.slope;
    passed = rep.passed;
  }
  j["pass"] = passed;
  write_text(ctx.file("sweep_summary.json"), j.dump());
  ctx.note(std::string(passed ? "PASS " : "FAIL ") + c.sweep_kind);
  return passed ? 0 : 1;
}

int cmd_validate(const Context& ctx) {
  const auto& c = ctx.config;
  const FilterModel model = c.build_model();
  const auto phis = builtin_test_functions(c.test_functions, c.dimension);
  const auto rep = validate_assumptions(model, c.radius, c.validate_samples, c.seeds().front(), phis);
  json j = ctx.provenance();
  j["domain_radius"] = rep.domain_radius;
  for (const auto& chk : rep.checks) {
    j["checks"].push_back({{"name", chk.name},
                           {"passed", chk.passed},
                           {"measured", chk.measured},
                           {"threshold", chk.threshold},
                           {"detail", chk.detail}});
    ctx.note(std::string(chk.passed ? "PASS " : "FAIL ") + chk.name + " measured=" + format_double(chk.measured) +
             " threshold=" + format_double(chk.threshold) + (chk.detail.empty() ? "" : " " + chk.detail));
  }
  j["moments"] = rep.moments;
  j["pass"] = rep.passed();
  write_text(ctx.file("validation.json"), j.dump());
  return rep.passed() ? 0 : 1;
}

}  // namespace

int run_command(const ExperimentConfig& config, const std::string& command, const CommandOptions& options) {
  const std::filesystem::path out = options.out_dir.empty() ? config.output_dir : options.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory '" + out.string() + "': " + ec.message());
  const Context ctx{config, out, std::max(1, options.workers), options.log};
  if (command == "simulate") return cmd_simulate(ctx);
  if (command == "filter") return cmd_filter(ctx);
  if (command == "baseline") return cmd_baseline(ctx);
  if (command == "sweep") return cmd_sweep(ctx);
  if (command == "validate") return cmd_validate(ctx);
  std::string valid;
  for (const auto& n : command_names()) valid += (valid.empty() ? "" : ", ") + n;
  fail(ErrorCode::unknown_name, "unknown command '" + command + "' (valid: " + valid + ")");
}

}  // namespace yyf
