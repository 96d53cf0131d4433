#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "baselines.hpp"
#include "error.hpp"
#include "io.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sde.hpp"

namespace yyf {

double tail_mass(const DensityField& field, double r) {
  require(r > 0.0, "tail radius must be positive");
  const auto& grid = field.grid;
  const auto& w = grid.quadrature_weights();
  const double dx = grid.spacing();
  double total = 0.0, tail = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    const double m = w[n] * field.values[n];
    total += m;
    const double share = std::clamp((grid.norm(n) - r) / dx + 0.5, 0.0, 1.0);
    tail += share * m;
  }
  if (!(total > 0.0)) fail(ErrorCode::numerical, "tail mass of a field with zero mass");
  return tail / total;
}

double moment(const DensityField& field, int order) {
  require(order >= 2 && order % 2 == 0, "moment order must be even and >= 2");
  const auto& grid = field.grid;
  const auto& w = grid.quadrature_weights();
  double total = 0.0, acc = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    const double m = w[n] * field.values[n];
    total += m;
    acc += std::pow(grid.norm(n), order) * m;
  }
  if (!(total > 0.0)) fail(ErrorCode::numerical, "moment of a field with zero mass");
  return acc / total;
}

bool SweepResult::passed() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& kv) { return kv.second; });
}

Oracle parse_oracle(const std::string& name) {
  if (name == "kalman") return Oracle::kalman;
  if (name == "fine_oracle" || name == "fine") return Oracle::fine_oracle;
  if (name == "bootstrap_pf" || name == "pf") return Oracle::bootstrap_pf;
  fail(ErrorCode::unknown_name, "unknown oracle '" + name + "' (valid: kalman, fine_oracle, bootstrap_pf)");
}

std::string to_string(Oracle oracle) {
  switch (oracle) {
    case Oracle::kalman: return "kalman";
    case Oracle::fine_oracle: return "fine_oracle";
    case Oracle::bootstrap_pf: return "bootstrap_pf";
  }
  return "?";
}

namespace {

std::size_t steps_for(double terminal, double delta) {
  const double k = terminal / delta;
  const auto K = static_cast<std::size_t>(std::llround(k));
  require(K >= 1 && std::abs(static_cast<double>(K) - k) <= 1e-9 * k,
          "delta " + format_double(delta) + " does not divide T = " + format_double(terminal));
  return K;
}

std::uint64_t oracle_seed(std::uint64_t seed) { return mix64(seed ^ 0x0a11ce5eedULL); }

void fit_slope(SweepResult& r) {
  if (r.values.size() < 3) {
    r.slope_defined = false;
    r.flags["slope_defined"] = false;
    return;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (!(r.mean_err[i] > 0.0)) {
      r.slope_defined = false;
      r.flags["slope_defined"] = false;
      return;
    }
    lx.push_back(std::log(r.values[i]));
    ly.push_back(std::log(r.mean_err[i]));
  }
  const LineFit f = fit_line(lx, ly);
  const boost::math::students_t dist(static_cast<double>(lx.size() - 2));
  r.slope_defined = true;
  r.slope = f.slope;
  r.slope_ci = boost::math::quantile(boost::math::complement(dist, 0.025)) * f.slope_se;
}

void aggregate(SweepResult& r, const std::vector<std::vector<double>>& knot_sums,
               const std::vector<std::size_t>& knots_per_value) {
  const std::size_t S = r.seeds.size();
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const MeanStderr ms = mean_stderr(r.cell_errors[i]);
    r.mean_err.push_back(ms.mean);
    r.stderrs.push_back(ms.stderr_);
    r.counts.push_back(S);
    // Mean over knots then seeds must equal the pooled mean over (knot, seed).
    double pooled = 0.0;
    for (double s : knot_sums[i]) pooled += s;
    pooled /= static_cast<double>(S * knots_per_value[i]);
    if (std::abs(pooled - ms.mean) > 1e-12 * std::max(1.0, std::abs(pooled)))
      fail(ErrorCode::internal, "error aggregation orders disagree");
  }
}

}  // namespace

SweepResult convergence_sweep(const FilterModel& model, const Grid& grid, double terminal,
                              const std::vector<double>& deltas, const std::vector<std::uint64_t>& seeds,
                              Oracle oracle, const TestFunction& phi, const SweepOptions& options) {
  require(!deltas.empty(), "convergence sweep needs at least one delta");
  require(!seeds.empty(), "convergence sweep needs at least one seed");
  require(options.oracle_refine >= 1, "oracle refinement must be >= 1");
  if (oracle == Oracle::kalman && !model.linear())
    fail(ErrorCode::invalid_argument, "Kalman oracle requires a linear model; '" + model.name() + "' is not");
  if (deltas.size() >= 2) {
    const double ratio = deltas[1] / deltas[0];
    for (std::size_t i = 2; i < deltas.size(); ++i)
      require(std::abs(deltas[i] / deltas[i - 1] - ratio) <= 1e-9 * ratio, "delta list must be a geometric progression");
  }
  const double finest = *std::min_element(deltas.begin(), deltas.end()) / static_cast<double>(options.oracle_refine);
  const std::size_t K_fine = steps_for(terminal, finest);
  const TimeSchedule fine_schedule(terminal, K_fine);
  std::vector<std::size_t> K(deltas.size()), stride(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    K[i] = steps_for(terminal, deltas[i]);
    require(K_fine % K[i] == 0, "every delta must be a multiple of the finest step");
    stride[i] = K_fine / K[i];
  }

  // Offline stage once per delta; the filters are shared read-only by all seeds.
  std::vector<std::unique_ptr<YauYauFilter>> filters;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    filters.push_back(std::make_unique<YauYauFilter>(model, grid, terminal / static_cast<double>(K[i]), options.substeps));

  const std::size_t S = seeds.size();
  std::vector<std::vector<double>> cell(deltas.size(), std::vector<double>(S)),
      sums(deltas.size(), std::vector<double>(S));
  const TestFunction phis[] = {phi};

  parallel_for(S, options.workers, [&](std::size_t s) {
    const SimulatedPaths paths = simulate(model, fine_schedule, options.sim_substeps, seeds[s]);
    std::vector<double> reference(K_fine + 1);
    switch (oracle) {
      case Oracle::kalman: {
        const auto est = kalman_estimates(kalman_filter(model, paths.observation), {phi.label});
        for (std::size_t k = 0; k <= K_fine; ++k) reference[k] = est.estimate(k, 0);
        break;
      }
      case Oracle::fine_oracle: {
        const auto out = fine_oracle(model, grid, paths.observation, K_fine, phis, 2, options.substeps);
        for (std::size_t k = 0; k <= K_fine; ++k) reference[k] = out.estimate(k, 0);
        break;
      }
      case Oracle::bootstrap_pf: {
        const auto est = bootstrap_pf(model, paths.observation, phis, options.particles, oracle_seed(seeds[s]));
        for (std::size_t k = 0; k <= K_fine; ++k) reference[k] = est.estimate(k, 0);
        break;
      }
    }
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const ObservationPath obs = subsample(paths.observation, stride[i]);
      const FilterOutput out = filters[i]->run(obs, phis);
      double sum = 0.0;
      for (std::size_t k = 1; k <= K[i]; ++k) sum += std::abs(out.estimate(k, 0) - reference[k * stride[i]]);
      sums[i][s] = sum;
      cell[i][s] = sum / static_cast<double>(K[i]);
    }
  });

  SweepResult r;
  r.axis = "delta";
  r.values = deltas;
  r.seeds = seeds;
  r.cell_errors = cell;
  aggregate(r, sums, K);
  fit_slope(r);
  if (r.slope_defined) r.flags["slope_in_band"] = r.slope >= options.slope_low && r.slope <= options.slope_high;

  // Order axis values from coarse to fine for the monotonicity checks.
  std::vector<std::size_t> order(deltas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return deltas[a] > deltas[b]; });
  bool monotone = true;
  for (std::size_t j = 1; j < order.size(); ++j) {
    const auto a = order[j - 1], b = order[j];
    const double tol = std::hypot(r.stderrs[a], r.stderrs[b]);
    monotone = monotone && r.mean_err[b] <= r.mean_err[a] + tol;
  }
  r.flags["monotone_within_stderr"] = monotone;
  if (order.size() >= 2)
    r.flags["finest_at_most_half_coarsest"] = r.mean_err[order.back()] <= 0.5 * r.mean_err[order.front()];
  return r;
}

SweepResult radius_sweep(const FilterModel& model, const TimeSchedule& schedule,
                         const std::vector<double>& radii, double spacing,
                         const std::vector<std::uint64_t>& seeds, const TestFunction& phi,
                         const SweepOptions& options) {
  require(radii.size() >= 3, "radius sweep needs at least three radii");
  require(std::is_sorted(radii.begin(), radii.end()) &&
              std::adjacent_find(radii.begin(), radii.end()) == radii.end(),
          "radii must be strictly increasing");
  require(!seeds.empty(), "radius sweep needs at least one seed");
  require(spacing > 0.0, "spacing must be positive");
  std::vector<Grid> grids;
  for (double R : radii) {
    const double cells = 2.0 * R / spacing;
    const auto c = static_cast<std::size_t>(std::llround(cells));
    require(std::abs(static_cast<double>(c) - cells) <= 1e-9 * cells && c % 2 == 0,
            "radius " + format_double(R) + " is not an even multiple of the spacing");
    grids.emplace_back(model.dimension(), R, c + 1);
  }
  std::vector<std::unique_ptr<YauYauFilter>> filters;
  for (const auto& g : grids)
    filters.push_back(std::make_unique<YauYauFilter>(model, g, schedule.delta(), options.substeps));

  const std::size_t S = seeds.size(), nR = radii.size(), K = schedule.steps();
  const std::size_t ref = nR - 1;
  std::vector<std::vector<double>> cell(nR, std::vector<double>(S)), sums(nR, std::vector<double>(S));
  std::vector<std::vector<double>> tails(S, std::vector<double>(nR * (K + 1), 0.0));
  const TestFunction phis[] = {phi};

  parallel_for(S, options.workers, [&](std::size_t s) {
    const SimulatedPaths paths = simulate(model, schedule, options.sim_substeps, seeds[s]);
    FilterOptions ref_options;
    ref_options.observer = [&](std::size_t k, const DensityField&, const DensityField& updated) {
      for (std::size_t i = 0; i < nR; ++i) tails[s][i * (K + 1) + k] = tail_mass(updated, radii[i]);
    };
    const FilterOutput reference = filters[ref]->run(paths.observation, phis, ref_options);
    for (std::size_t i = 0; i < nR; ++i) {
      const FilterOutput out = i == ref ? reference : filters[i]->run(paths.observation, phis);
      double sum = 0.0;
      for (std::size_t k = 1; k <= K; ++k) sum += std::abs(out.estimate(k, 0) - reference.estimate(k, 0));
      sums[i][s] = sum;
      cell[i][s] = sum / static_cast<double>(K);
    }
  });

  SweepResult r;
  r.axis = "R";
  r.values = radii;
  r.seeds = seeds;
  r.cell_errors = cell;
  aggregate(r, sums, std::vector<std::size_t>(nR, K));

  std::vector<double> tail(nR, 0.0);
  for (std::size_t i = 0; i < nR; ++i)
    for (std::size_t k = 1; k <= K; ++k) {
      double m = 0.0;
      for (std::size_t s = 0; s < S; ++s) m += tails[s][i * (K + 1) + k];
      tail[i] = std::max(tail[i], m / static_cast<double>(S));
    }
  r.series["tail_mass"] = tail;

  const double n2 = 2.0 * options.tail_order;
  const double C = tail[0] * (1.0 + std::pow(radii[0], n2));
  std::vector<double> bound(nR);
  bool within = true, tail_monotone = true, err_monotone = true;
  for (std::size_t i = 0; i < nR; ++i) {
    bound[i] = C / (1.0 + std::pow(radii[i], n2));
    if (i > 0) {
      within = within && tail[i] <= options.tail_bound_factor * bound[i];
      tail_monotone = tail_monotone && tail[i] <= tail[i - 1];
      err_monotone = err_monotone && r.mean_err[i] <= r.mean_err[i - 1] + std::hypot(r.stderrs[i], r.stderrs[i - 1]);
    }
  }
  r.series["tail_bound"] = bound;
  r.flags["tail_monotone"] = tail_monotone;
  r.flags["tail_within_fitted_bound"] = within;
  r.flags["error_monotone_within_stderr"] = err_monotone;
  fit_slope(r);
  r.flags.erase("slope_defined");
  return r;
}

namespace {

/// Simulates once per seed at the finest schedule and runs the filter on each
/// subsampled schedule, calling visit(schedule index, seed index, knot, propagated, updated, obs).
template <typename Visit>
void run_schedules(const FilterModel& model, const Grid& grid, double terminal,
                   const std::vector<std::size_t>& steps, const std::vector<std::uint64_t>& seeds,
                   const SweepOptions& options, Visit&& visit) {
  const std::size_t K_fine = *std::max_element(steps.begin(), steps.end());
  for (std::size_t K : steps) require(K >= 1 && K_fine % K == 0, "schedules must refine each other by integer factors");
  std::vector<std::unique_ptr<YauYauFilter>> filters;
  for (std::size_t K : steps)
    filters.push_back(std::make_unique<YauYauFilter>(model, grid, terminal / static_cast<double>(K), options.substeps));
  parallel_for(seeds.size(), options.workers, [&](std::size_t s) {
    const SimulatedPaths paths = simulate(model, TimeSchedule(terminal, K_fine), options.sim_substeps, seeds[s]);
    for (std::size_t j = 0; j < steps.size(); ++j) {
      const ObservationPath obs = subsample(paths.observation, K_fine / steps[j]);
      FilterOptions fo;
      fo.observer = [&](std::size_t k, const DensityField& propagated, const DensityField& updated) {
        visit(j, s, k, propagated, updated, obs);
      };
      (void)filters[j]->run(obs, {}, fo);
    }
  });
}

double log_mean(std::span<const double> logs) {
  return log_sum_exp(logs) - std::log(static_cast<double>(logs.size()));
}

}  // namespace

MomentGrowthReport moment_growth_check(const FilterModel& model, const Grid& grid,
                                       const TimeSchedule& schedule,
                                       const std::vector<std::uint64_t>& seeds, int order,
                                       const SweepOptions& options) {
  require(order >= 2 && order % 2 == 0, "moment order must be even and >= 2");
  require(seeds.size() >= 10, "moment growth check needs at least 10 seeds");
  const std::vector<std::size_t> steps = {schedule.steps(), 2 * schedule.steps()};
  std::vector<double> weight(grid.node_count());
  for (std::size_t n = 0; n < weight.size(); ++n) weight[n] = 1.0 + std::pow(grid.norm(n), order);

  MomentGrowthReport rep;
  rep.order = order;
  rep.initial = integrate(discretize_initial(model, grid), weight).value();
  // logs[j][k][s]
  std::vector<std::vector<std::vector<double>>> logs(2);
  for (std::size_t j = 0; j < 2; ++j)
    logs[j].assign(steps[j] + 1, std::vector<double>(seeds.size(), 0.0));
  run_schedules(model, grid, schedule.terminal(), steps, seeds, options,
                [&](std::size_t j, std::size_t s, std::size_t k, const DensityField&, const DensityField& updated,
                    const ObservationPath&) { logs[j][k][s] = integrate(updated, weight).log_value(); });

  bool ok = true;
  std::size_t argmax = 1;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> curve(steps[j] + 1);
    curve[0] = rep.initial;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= steps[j]; ++k) {
      const double lm = log_mean(logs[j][k]);
      curve[k] = std::exp(lm);
      if (lm > best && j == 0) argmax = k;
      best = std::max(best, lm);
    }
    const double log_ratio = best - std::log(rep.initial);
    rep.ratio.push_back(std::exp(log_ratio));
    rep.exponent.push_back(log_ratio / schedule.terminal());
    rep.mean_curve.push_back(std::move(curve));
    ok = ok && std::isfinite(log_ratio);
  }
  // Seed noise of the exponent difference, paired at the coarse argmax time
  // (delta method on the log of the two seed means).
  const std::size_t S = seeds.size();
  const double lm0 = log_mean(logs[0][argmax]), lm1 = log_mean(logs[1][2 * argmax]);
  std::vector<double> diff(S);
  for (std::size_t s = 0; s < S; ++s)
    diff[s] = std::exp(logs[0][argmax][s] - lm0) - std::exp(logs[1][2 * argmax][s] - lm1);
  rep.exponent_stderr = mean_stderr(diff).stderr_ / schedule.terminal();
  const double e0 = rep.exponent[0], e1 = rep.exponent[1];
  rep.passed = ok && std::abs(e0 - e1) <= 0.2 * std::max(std::abs(e0), std::abs(e1)) + 3.0 * rep.exponent_stderr;
  return rep;
}

L4Report l4_stability_check(const FilterModel& model, const Grid& grid, double terminal,
                            const std::vector<std::size_t>& steps, const std::vector<std::uint64_t>& seeds,
                            const SweepOptions& options) {
  require(steps.size() >= 2, "L4 check needs at least two schedules");
  require(seeds.size() >= 10, "L4 check needs at least 10 seeds");
  const ObservationUpdate h(model, grid);
  const std::size_t nobs = h.observation_dimension();
  const auto& w = grid.quadrature_weights();
  // logs[j][k][s] for p = 2 and p = 4
  std::vector<std::vector<std::vector<double>>> l2(steps.size()), l4(steps.size());
  for (std::size_t j = 0; j < steps.size(); ++j) {
    l2[j].assign(steps[j] + 1, std::vector<double>(seeds.size(), 0.0));
    l4[j].assign(steps[j] + 1, std::vector<double>(seeds.size(), 0.0));
  }
  run_schedules(model, grid, terminal, steps, seeds, options,
                [&](std::size_t j, std::size_t s, std::size_t k, const DensityField& propagated,
                    const DensityField&, const ObservationPath& obs) {
                  const auto y = obs.at(k - 1);
                  std::vector<double> lv;
                  lv.reserve(w.size());
                  for (std::size_t n = 0; n < w.size(); ++n) {
                    if (!(propagated.values[n] > 0.0)) continue;
                    double hy = 0.0;
                    const auto hn = h.observation_at(n);
                    for (std::size_t c = 0; c < nobs; ++c) hy += hn[c] * y[c];
                    lv.push_back(std::log(propagated.values[n]) - hy);
                  }
                  const double top = lv.empty() ? 0.0 : *std::max_element(lv.begin(), lv.end());
                  double s2 = 0.0, s4 = 0.0;
                  std::size_t idx = 0;
                  for (std::size_t n = 0; n < w.size(); ++n) {
                    if (!(propagated.values[n] > 0.0)) continue;
                    const double e = std::exp(lv[idx++] - top);
                    s2 += w[n] * e * e;
                    s4 += w[n] * e * e * e * e;
                  }
                  const double base = top + propagated.log_scale;
                  l2[j][k][s] = std::log(s2) + 2.0 * base;
                  l4[j][k][s] = std::log(s4) + 4.0 * base;
                });
  L4Report rep;
  rep.steps = steps;
  for (std::size_t j = 0; j < steps.size(); ++j) {
    double b2 = -std::numeric_limits<double>::infinity(), b4 = b2;
    for (std::size_t k = 1; k <= steps[j]; ++k) {
      b2 = std::max(b2, log_mean(l2[j][k]));
      b4 = std::max(b4, log_mean(l4[j][k]));
    }
    rep.sup_l2.push_back(std::exp(b2));
    rep.sup_l4.push_back(std::exp(b4));
  }
  const auto [lo, hi] = std::minmax_element(rep.sup_l4.begin(), rep.sup_l4.end());
  rep.variation = *hi / *lo - 1.0;
  rep.passed = std::isfinite(rep.variation) && rep.variation < 0.2;
  return rep;
}

LemmaReport exp_moment_lemma_check(const FilterModel& model, const Grid& grid,
                                   const std::vector<double>& deltas, std::size_t increments,
                                   std::uint64_t seed, const DensityField* field) {
  require(!deltas.empty(), "lemma check needs at least one delta");
  require(increments >= 100, "lemma check needs at least 100 increments per delta");
  std::optional<DensityField> own;
  if (!field) {
    own = discretize_initial(model, grid);
    field = &*own;
  }
  const ObservationUpdate h(model, grid);
  const std::size_t nobs = h.observation_dimension();
  const auto& w = grid.quadrature_weights();
  const auto& v = field->values;
  double base = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) base += w[n] * std::pow(v[n], 4);
  require(base > 0.0, "lemma check needs a field with positive quartic mass");

  LemmaReport rep;
  rep.deltas = deltas;
  std::vector<double> h2(w.size(), 0.0);
  for (std::size_t n = 0; n < w.size(); ++n) {
    const auto hn = h.observation_at(n);
    for (std::size_t c = 0; c < nobs; ++c) h2[n] += hn[c] * hn[c];
  }
  std::vector<double> dy(nobs), amp(increments);
  bool ok = true;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] > 0.0, "deltas must be positive");
    const CounterRng rng(seed, i, Stream::increments);
    const double sd = std::sqrt(deltas[i]);
    for (std::size_t t = 0; t < increments; ++t) {
      for (std::size_t c = 0; c < nobs; ++c) dy[c] = sd * rng.normal(t * nobs + c);
      double s = 0.0;
      for (std::size_t n = 0; n < w.size(); ++n) {
        if (v[n] == 0.0) continue;
        double e = 0.0;
        const auto hn = h.observation_at(n);
        for (std::size_t c = 0; c < nobs; ++c) e += hn[c] * dy[c];
        s += w[n] * std::pow(v[n], 4) * std::exp(4.0 * e);
      }
      amp[t] = s / base;
    }
    double expect = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) expect += w[n] * std::pow(v[n], 4) * std::exp(8.0 * h2[n] * deltas[i]);
    expect /= base;
    const MeanStderr ms = mean_stderr(amp);
    rep.amplification.push_back(ms.mean);
    rep.stderrs.push_back(ms.stderr_);
    rep.expected.push_back(expect);
    const double tol = ms.stderr_ > 0.0 ? 3.0 * ms.stderr_ : 1e-12 * expect;
    ok = ok && std::abs(ms.mean - expect) <= tol;
  }
  rep.passed = ok;
  // log amplification ~ intercept + slope * delta; slope estimates 8|h|^2 for constant h.
  if (deltas.size() >= 2) {
    std::vector<double> y(deltas.size()), sd(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      y[i] = std::log(rep.amplification[i]);
      sd[i] = std::max(rep.stderrs[i] / rep.amplification[i], 1e-15);
    }
    const LineFit f = fit_line_weighted(deltas, y, sd);
    rep.intercept = f.intercept;
    rep.intercept_se = f.intercept_se;
    rep.slope = f.slope;
  }
  return rep;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r, const std::string& comment) {
  write_comment(os, comment);
  os << "axis,value,mean_err,stderr,n\n";
  for (std::size_t i = 0; i < r.values.size(); ++i)
    os << r.axis << ',' << format_double(r.values[i]) << ',' << format_double(r.mean_err[i]) << ','
       << format_double(r.stderrs[i]) << ',' << r.counts[i] << '\n';
}

void write_sweep_long_csv(std::ostream& os, const SweepResult& r, const std::string& comment) {
  write_comment(os, comment);
  os << "series,axis,value,seed,metric\n";
  for (std::size_t i = 0; i < r.values.size(); ++i)
    for (std::size_t s = 0; s < r.seeds.size(); ++s)
      os << "abs_error," << r.axis << ',' << format_double(r.values[i]) << ',' << r.seeds[s] << ','
         << format_double(r.cell_errors[i][s]) << '\n';
  for (const auto& [name, curve] : r.series)
    for (std::size_t i = 0; i < curve.size(); ++i)
      os << name << ',' << r.axis << ',' << format_double(r.values[i]) << ",," << format_double(curve[i]) << '\n';
}

std::string sweep_summary_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["axis"] = r.axis;
  j["values"] = r.values;
  j["mean_err"] = r.mean_err;
  if (r.slope_defined) {
    j["slope"] = r.slope;
    j["slope_ci"] = r.slope_ci;
  } else {
    j["slope"] = nullptr;
    j["slope_ci"] = nullptr;
  }
  for (const auto& [name, curve] : r.series) j["series"][name] = curve;
  for (const auto& [name, ok] : r.flags) j["pass_flags"][name] = ok;
  j["pass"] = r.passed();
  return j.dump();
}

}  // namespace yyf
