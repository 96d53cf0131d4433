#include "baselines.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <unsupported/Eigen/MatrixFunctions>

#include "error.hpp"
#include "io.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace yyf {

KalmanResult kalman_filter(const FilterModel& model, const ObservationPath& obs) {
  const LinearGaussian* lin = model.linear();
  if (!lin) fail(ErrorCode::invalid_argument, "Kalman filter needs a linear model; '" + model.name() + "' is not flagged linear");
  const auto d = lin->drift.rows();
  const auto n = lin->observation.rows();
  require(obs.dimension == static_cast<std::size_t>(n), "observation dimension does not match the model");
  const double delta = obs.schedule.delta();
  const std::size_t K = obs.schedule.steps();

  // Van Loan: exp([[-F, G G^T], [0, F^T]] delta) = [[., Phi^{-1} Q], [0, Phi^T]].
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  block.topLeftCorner(d, d) = -lin->drift;
  block.topRightCorner(d, d) = lin->diffusion * lin->diffusion.transpose();
  block.bottomRightCorner(d, d) = lin->drift.transpose();
  const Eigen::MatrixXd e = (block * delta).exp();
  const Eigen::MatrixXd phi = e.bottomRightCorner(d, d).transpose();
  Eigen::MatrixXd q = phi * e.topRightCorner(d, d);
  q = 0.5 * (q + q.transpose());

  const Eigen::MatrixXd& H = lin->observation;
  const Eigen::MatrixXd I_d = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd I_n = Eigen::MatrixXd::Identity(n, n);

  KalmanResult r;
  r.schedule = obs.schedule;
  r.means.reserve(K + 1);
  r.covariances.reserve(K + 1);
  Eigen::VectorXd m = lin->initial_mean;
  Eigen::MatrixXd P = lin->initial_cov;
  r.means.push_back(m);
  r.covariances.push_back(P);
  for (std::size_t k = 1; k <= K; ++k) {
    m = phi * m;
    P = phi * P * phi.transpose() + q;
    Eigen::VectorXd dy(n);
    for (Eigen::Index j = 0; j < n; ++j)
      dy[j] = obs.values[k * n + static_cast<std::size_t>(j)] - obs.values[(k - 1) * n + static_cast<std::size_t>(j)];
    const Eigen::MatrixXd S = delta * delta * H * P * H.transpose() + delta * I_n;
    const Eigen::MatrixXd gain = delta * P * H.transpose() * S.inverse();
    m += gain * (dy - delta * H * m);
    const Eigen::MatrixXd J = I_d - delta * gain * H;
    P = J * P * J.transpose() + delta * gain * gain.transpose();
    P = 0.5 * (P + P.transpose());
    r.means.push_back(m);
    r.covariances.push_back(P);
  }
  return r;
}

std::vector<double> WeightedEnsemble::normalized_weights() const {
  std::vector<double> w(count());
  if (!w.empty()) normalize_log_weights(log_weights, w);
  return w;
}

double WeightedEnsemble::effective_sample_size() const {
  std::vector<double> w(count());
  return w.empty() ? 0.0 : normalize_log_weights(log_weights, w);
}

namespace {

struct ParsedLabel {
  enum Kind { one, coordinate, square, radius2 } kind;
  std::size_t index = 0;
};

ParsedLabel parse_label(const std::string& label, std::size_t d) {
  // Reuse the builtin registry for validation, then classify.
  (void)builtin_test_function(label, d);
  if (label == "one") return {ParsedLabel::one};
  if (label == "r2") return {ParsedLabel::radius2};
  const bool squared = label.ends_with("^2");
  const std::string digits = label.substr(1, label.size() - 1 - (squared ? 2 : 0));
  const std::size_t i = digits.empty() ? 0 : static_cast<std::size_t>(digits[0] - '1');
  return {squared ? ParsedLabel::square : ParsedLabel::coordinate, i};
}

BaselineEstimates make_estimates(const TimeSchedule& schedule, std::span<const TestFunction> fns) {
  BaselineEstimates e;
  e.schedule = schedule;
  for (const auto& f : fns) e.labels.push_back(f.label);
  const std::size_t rows = (schedule.steps() + 1) * fns.size();
  e.estimates.assign(rows, 0.0);
  e.stderrs.assign(rows, 0.0);
  e.ess.assign(schedule.steps() + 1, std::numeric_limits<double>::quiet_NaN());
  return e;
}

}  // namespace

BaselineEstimates kalman_estimates(const KalmanResult& result, const std::vector<std::string>& labels) {
  BaselineEstimates e;
  e.schedule = result.schedule;
  e.labels = labels;
  const std::size_t K = result.schedule.steps();
  const auto d = static_cast<std::size_t>(result.means.front().size());
  std::vector<ParsedLabel> parsed;
  for (const auto& l : labels) parsed.push_back(parse_label(l, d));
  e.estimates.resize((K + 1) * labels.size());
  e.stderrs.assign((K + 1) * labels.size(), 0.0);
  e.ess.assign(K + 1, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k <= K; ++k) {
    const auto& m = result.means[k];
    const auto& P = result.covariances[k];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(parsed[i].index);
      double v = 1.0;
      switch (parsed[i].kind) {
        case ParsedLabel::one: v = 1.0; break;
        case ParsedLabel::coordinate: v = m[j]; break;
        case ParsedLabel::square: v = m[j] * m[j] + P(j, j); break;
        case ParsedLabel::radius2: v = m.squaredNorm() + P.trace(); break;
      }
      e.estimates[k * labels.size() + i] = v;
    }
  }
  return e;
}

namespace {

/// One Euler-Maruyama step of the state equation (no observation).
struct StateStepper {
  const FilterModel& model;
  std::size_t d;
  double dt;
  double sqrt_dt;
  std::vector<double> f, g, noise;

  StateStepper(const FilterModel& m, double step)
      : model(m), d(m.dimension()), dt(step), sqrt_dt(std::sqrt(step)), f(d), g(d * d), noise(d) {}

  void step(std::span<double> x, const CounterRng& rng, std::uint64_t index) {
    model.drift(x, f);
    model.diffusion(x, g);
    for (std::size_t i = 0; i < d; ++i) noise[i] = sqrt_dt * rng.normal(index * d + i);
    for (std::size_t i = 0; i < d; ++i) {
      double gi = 0.0;
      for (std::size_t j = 0; j < d; ++j) gi += g[i * d + j] * noise[j];
      x[i] += f[i] * dt + gi;
    }
  }
};

void check_particles(std::span<const double> xs, std::size_t k) {
  for (double v : xs)
    if (!std::isfinite(v)) fail(ErrorCode::numerical, "particle state became non-finite before knot " + std::to_string(k));
}

}  // namespace

BaselineEstimates ks_monte_carlo(const FilterModel& model, const ObservationPath& obs,
                                 std::span<const TestFunction> test_functions, std::size_t particles,
                                 std::uint64_t seed, const KsOptions& options) {
  require(particles >= 1, "ks_monte_carlo needs at least one particle");
  require(options.substeps >= 1, "substeps must be >= 1");
  require(obs.dimension == model.observation_dimension(), "observation dimension does not match the model");
  const std::size_t d = model.dimension();
  const std::size_t n = obs.dimension;
  const std::size_t K = obs.schedule.steps();
  const std::size_t nf = test_functions.size();
  const std::size_t N = particles;
  const double dt = obs.schedule.delta() / static_cast<double>(options.substeps);

  BaselineEstimates est = make_estimates(obs.schedule, test_functions);
  std::vector<double> x(N * d), logw(N, 0.0), w(N), phi(N * nf), h(n);
  std::vector<CounterRng> noise_rng;
  noise_rng.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    model.sample_initial(CounterRng(seed, i, Stream::initial), std::span<double>(x.data() + i * d, d));
    noise_rng.emplace_back(seed, i, Stream::state_noise);
  }
  StateStepper stepper(model, dt);
  const std::vector<double> increments = observation_increments(obs);

  auto record = [&](std::size_t k) {
    const double ess = normalize_log_weights(logw, w);
    est.ess[k] = ess;
    if (ess < 10.0 && N >= 10) est.degenerate = true;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t f = 0; f < nf; ++f)
        phi[i * nf + f] = test_functions[f].evaluate(std::span<const double>(x.data() + i * d, d));
    for (std::size_t f = 0; f < nf; ++f) {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += w[i] * phi[i * nf + f];
      est.estimates[k * nf + f] = s;
    }
    const std::size_t B = options.bootstrap_replicates;
    if (B < 2 || N < 2) return;
    std::vector<double> reps(B * nf);
    for (std::size_t b = 0; b < B; ++b) {
      const CounterRng rng(seed, b, Stream::bootstrap);
      std::vector<double> num(nf, 0.0);
      double den = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        const auto i = std::min<std::size_t>(N - 1, static_cast<std::size_t>(rng.uniform(k * N + j) * static_cast<double>(N)));
        den += w[i];
        for (std::size_t f = 0; f < nf; ++f) num[f] += w[i] * phi[i * nf + f];
      }
      for (std::size_t f = 0; f < nf; ++f) reps[f * B + b] = den > 0.0 ? num[f] / den : 0.0;
    }
    for (std::size_t f = 0; f < nf; ++f) {
      const MeanStderr ms = mean_stderr(std::span<const double>(reps.data() + f * B, B));
      est.stderrs[k * nf + f] = ms.stderr_ * std::sqrt(static_cast<double>(B));
    }
  };

  record(0);
  for (std::size_t k = 1; k <= K; ++k) {
    const double* dy = increments.data() + (k - 1) * n;
    for (std::size_t i = 0; i < N; ++i) {
      std::span<double> xi(x.data() + i * d, d);
      for (std::size_t s = 0; s < options.substeps; ++s) {
        model.observation(xi, h);
        double lw = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          lw += h[j] * dy[j] / static_cast<double>(options.substeps) - 0.5 * h[j] * h[j] * dt;
        logw[i] += lw;
        stepper.step(xi, noise_rng[i], (k - 1) * options.substeps + s);
      }
    }
    check_particles(x, k);
    record(k);
  }
  return est;
}

BaselineEstimates bootstrap_pf(const FilterModel& model, const ObservationPath& obs,
                               std::span<const TestFunction> test_functions, std::size_t particles,
                               std::uint64_t seed, const PfOptions& options) {
  require(particles >= 2, "bootstrap_pf needs at least two particles");
  require(options.substeps >= 1, "substeps must be >= 1");
  require(obs.dimension == model.observation_dimension(), "observation dimension does not match the model");
  const std::size_t d = model.dimension();
  const std::size_t n = obs.dimension;
  const std::size_t K = obs.schedule.steps();
  const std::size_t nf = test_functions.size();
  const std::size_t N = particles;
  const double delta = obs.schedule.delta();
  const std::size_t B = options.islands > 0 ? std::min(options.islands, N / 2) : (N >= 100 ? 10 : 1);
  require(B >= 1, "at least one island is required");

  std::vector<std::size_t> begin(B + 1, 0);
  for (std::size_t b = 0; b < B; ++b) begin[b + 1] = begin[b] + N / B + (b < N % B ? 1 : 0);

  BaselineEstimates est = make_estimates(obs.schedule, test_functions);
  std::vector<double> x(N * d), logw(N, 0.0), w(N), h(n), scratch(N * d);
  for (std::size_t i = 0; i < N; ++i)
    model.sample_initial(CounterRng(seed, i, Stream::initial), std::span<double>(x.data() + i * d, d));
  StateStepper stepper(model, delta / static_cast<double>(options.substeps));
  const std::vector<double> increments = observation_increments(obs);

  std::vector<double> island_est(B * nf), island_var(B * nf), island_ess(B);
  auto record = [&](std::size_t k) {
    double total_ess = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t lo = begin[b], cnt = begin[b + 1] - begin[b];
      std::span<double> wb(w.data() + lo, cnt);
      island_ess[b] = normalize_log_weights(std::span<const double>(logw.data() + lo, cnt), wb);
      total_ess += island_ess[b];
      for (std::size_t f = 0; f < nf; ++f) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < cnt; ++i) {
          const double v = test_functions[f].evaluate(std::span<const double>(x.data() + (lo + i) * d, d));
          s += wb[i] * v;
          s2 += wb[i] * v * v;
        }
        island_est[b * nf + f] = s;
        island_var[b * nf + f] = std::max(0.0, s2 - s * s);
      }
    }
    est.ess[k] = total_ess;
    if (total_ess < 10.0) est.degenerate = true;
    for (std::size_t f = 0; f < nf; ++f) {
      if (B == 1) {
        est.estimates[k * nf + f] = island_est[f];
        est.stderrs[k * nf + f] = std::sqrt(island_var[f] / island_ess[0]);
      } else {
        std::vector<double> e(B);
        for (std::size_t b = 0; b < B; ++b) e[b] = island_est[b * nf + f];
        const MeanStderr ms = mean_stderr(e);
        est.estimates[k * nf + f] = ms.mean;
        est.stderrs[k * nf + f] = ms.stderr_;
      }
    }
  };

  auto resample = [&](std::size_t k) {
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t lo = begin[b], cnt = begin[b + 1] - begin[b];
      if (island_ess[b] >= 0.5 * static_cast<double>(cnt)) continue;
      const double u0 = CounterRng(seed, b, Stream::resampling).uniform(k);
      double cumulative = w[lo];
      std::size_t src = 0;
      for (std::size_t j = 0; j < cnt; ++j) {
        const double target = (u0 + static_cast<double>(j)) / static_cast<double>(cnt);
        while (cumulative < target && src + 1 < cnt) cumulative += w[lo + ++src];
        for (std::size_t c = 0; c < d; ++c) scratch[(lo + j) * d + c] = x[(lo + src) * d + c];
      }
      std::copy(scratch.begin() + static_cast<long>(lo * d), scratch.begin() + static_cast<long>((lo + cnt) * d),
                x.begin() + static_cast<long>(lo * d));
      std::fill(logw.begin() + static_cast<long>(lo), logw.begin() + static_cast<long>(lo + cnt), 0.0);
    }
  };

  record(0);
  for (std::size_t k = 1; k <= K; ++k) {
    const double* dy = increments.data() + (k - 1) * n;
    for (std::size_t i = 0; i < N; ++i) {
      std::span<double> xi(x.data() + i * d, d);
      const CounterRng rng(seed, i, Stream::state_noise);
      for (std::size_t s = 0; s < options.substeps; ++s) stepper.step(xi, rng, (k - 1) * options.substeps + s);
      model.observation(xi, h);
      double lw = 0.0;
      for (std::size_t j = 0; j < n; ++j) lw += h[j] * dy[j] - 0.5 * h[j] * h[j] * delta;
      logw[i] += lw;
    }
    check_particles(x, k);
    record(k);
    resample(k);
  }
  return est;
}

FilterOutput fine_oracle(const FilterModel& model, const Grid& grid, const ObservationPath& fine_obs,
                         std::size_t coarse_steps, std::span<const TestFunction> test_functions,
                         std::size_t space_refine, std::size_t substeps) {
  require(space_refine >= 1, "space refinement factor must be >= 1");
  const std::size_t K_fine = fine_obs.schedule.steps();
  require(coarse_steps >= 1 && K_fine % coarse_steps == 0,
          "fine observation path must refine the coarse schedule by an integer factor");
  const std::size_t stride = K_fine / coarse_steps;
  const Grid fine_grid(grid.dimension(), grid.radius(), space_refine * (grid.points_per_axis() - 1) + 1);
  const FilterOutput fine =
      run_filter(model, fine_grid, fine_obs.schedule, fine_obs, test_functions, substeps);

  FilterOutput out;
  out.schedule = TimeSchedule(fine_obs.schedule.terminal(), coarse_steps);
  out.labels = fine.labels;
  const std::size_t nf = fine.labels.size();
  for (std::size_t k = 0; k <= coarse_steps; ++k) {
    const std::size_t kf = k * stride;
    for (std::size_t f = 0; f < nf; ++f) out.estimates.push_back(fine.estimate(kf, f));
    out.mass_log.push_back(fine.mass_log[kf]);
    out.clamped_mass.push_back(fine.clamped_mass[kf]);
    out.min_value.push_back(fine.min_value[kf]);
  }
  return out;
}

void write_baseline_csv(std::ostream& os, const BaselineEstimates& est, const std::string& comment) {
  write_comment(os, comment);
  os << 't';
  for (const auto& l : est.labels) os << ',' << l;
  for (const auto& l : est.labels) os << ',' << l << "_stderr";
  os << ",ess\n";
  const std::size_t nf = est.labels.size();
  for (std::size_t k = 0; k <= est.schedule.steps(); ++k) {
    os << format_double(est.schedule.knot(k));
    for (std::size_t f = 0; f < nf; ++f) os << ',' << format_double(est.estimates[k * nf + f]);
    for (std::size_t f = 0; f < nf; ++f) os << ',' << format_double(est.stderrs[k * nf + f]);
    os << ',' << format_double(est.ess[k]) << '\n';
  }
}

}  // namespace yyf
