#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "error.hpp"

namespace yyf {

namespace {

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

double standard_normal_quantile(double u) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, u);
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

FilterModel::FilterModel(Spec spec) : spec_(std::move(spec)) {
  if (spec_.observation_dimension == 0) spec_.observation_dimension = spec_.dimension;
  require(spec_.dimension >= 1 && spec_.dimension <= 3,
          "model '" + spec_.name + "': dimension must be 1, 2 or 3");
  require(spec_.drift && spec_.diffusion && spec_.observation && spec_.initial_density,
          "model '" + spec_.name + "': drift, diffusion, observation and initial density are required");
  const auto& a = spec_.assumptions;
  require(a.lipschitz > 0 && a.ellipticity > 0 && a.moment_order > 0 && a.growth_order > 0 &&
              a.growth_constant > 0,
          "model '" + spec_.name + "': assumption constants must be strictly positive");
  if (!spec_.initial_sampler) {
    // Envelope for rejection sampling from a coarse scan of the support box.
    const std::size_t d = spec_.dimension;
    const int per_axis = d == 1 ? 801 : (d == 2 ? 161 : 61);
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_axis;
    std::vector<double> x(d);
    double peak = 0.0;
    for (std::size_t n = 0; n < total; ++n) {
      std::size_t rem = n;
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = -spec_.support_radius +
               2.0 * spec_.support_radius * static_cast<double>(rem % per_axis) / (per_axis - 1);
        rem /= per_axis;
      }
      peak = std::max(peak, spec_.initial_density(x));
    }
    rejection_envelope_ = 1.25 * peak;
  }
}

void FilterModel::diffusion_square(std::span<const double> x, std::span<double> out) const {
  if (spec_.diffusion_square) {
    spec_.diffusion_square(x, out);
    return;
  }
  const std::size_t d = spec_.dimension;
  double g[9];
  spec_.diffusion(x, std::span<double>(g, d * d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += g[i * d + k] * g[j * d + k];
      out[i * d + j] = s;
    }
}

void FilterModel::sample_initial(const CounterRng& rng, std::span<double> out) const {
  if (spec_.initial_sampler) {
    spec_.initial_sampler(rng, out);
    return;
  }
  const std::size_t d = spec_.dimension;
  if (!(rejection_envelope_ > 0.0))
    fail(ErrorCode::domain, "model '" + spec_.name + "': initial density vanishes on its support box");
  constexpr std::uint64_t max_attempts = 10'000'000;
  std::uint64_t counter = 0;
  for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t i = 0; i < d; ++i)
      out[i] = spec_.support_radius * (2.0 * rng.uniform(counter++) - 1.0);
    const double u = rng.uniform(counter++);
    if (u * rejection_envelope_ <= spec_.initial_density(out)) return;
  }
  fail(ErrorCode::numerical, "model '" + spec_.name + "': rejection sampling of sigma_0 did not terminate");
}

FilterModel FilterModel::with_scaled_initial_density(double factor) const {
  require(factor > 0.0, "density scale factor must be positive");
  Spec s = spec_;
  ScalarField base = spec_.initial_density;
  s.initial_density = [base, factor](std::span<const double> x) { return factor * base(x); };
  if (!s.initial_sampler) {
    // Rejection sampling is scale-free; keep draws identical to the unscaled model.
    const FilterModel original = *this;
    s.initial_sampler = [original](const CounterRng& rng, std::span<double> out) {
      original.sample_initial(rng, out);
    };
  }
  return FilterModel(std::move(s));
}

TestFunction builtin_test_function(const std::string& label, std::size_t dimension) {
  auto coordinate = [&](const std::string& digits) -> std::size_t {
    if (digits.empty()) return 0;
    if (digits.size() != 1 || digits[0] < '1' || digits[0] > '3')
      fail(ErrorCode::unknown_name, "unknown test function '" + label + "'");
    const std::size_t i = static_cast<std::size_t>(digits[0] - '1');
    if (i >= dimension)
      fail(ErrorCode::invalid_argument,
           "test function '" + label + "' refers to a coordinate beyond dimension " +
               std::to_string(dimension));
    return i;
  };
  if (label == "one") return {label, [](std::span<const double>) { return 1.0; }, 1, 1.0};
  if (label == "r2") return {label, [](std::span<const double> x) { return norm2(x); }, 1, 1.0};
  if (label.size() >= 1 && label[0] == 'x') {
    const bool squared = label.size() >= 2 && label.ends_with("^2");
    const std::string digits = label.substr(1, label.size() - 1 - (squared ? 2 : 0));
    const std::size_t i = coordinate(digits);
    if (squared)
      return {label, [i](std::span<const double> x) { return x[i] * x[i]; }, 1, 1.0};
    return {label, [i](std::span<const double> x) { return x[i]; }, 1, 1.0};
  }
  fail(ErrorCode::unknown_name,
       "unknown test function '" + label + "' (valid: one, x, x<i>, x^2, x<i>^2, r2)");
}

std::vector<TestFunction> builtin_test_functions(const std::vector<std::string>& labels,
                                                 std::size_t dimension) {
  std::vector<TestFunction> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(builtin_test_function(l, dimension));
  return out;
}

TimeSchedule::TimeSchedule(double terminal, std::size_t steps)
    : terminal_(terminal), steps_(steps), delta_(terminal / static_cast<double>(steps)) {
  require(steps >= 1, "K must be >= 1");
  require(std::isfinite(terminal) && terminal > 0.0, "T must be positive and finite");
}

std::vector<double> TimeSchedule::knots() const {
  std::vector<double> t(steps_ + 1);
  for (std::size_t k = 0; k <= steps_; ++k) t[k] = knot(k);
  return t;
}

FilterModel make_linear_model(std::string name, LinearGaussian lin) {
  const auto d = static_cast<std::size_t>(lin.drift.rows());
  const auto n = static_cast<std::size_t>(lin.observation.rows());
  require(lin.drift.cols() == static_cast<Eigen::Index>(d) &&
              lin.diffusion.rows() == static_cast<Eigen::Index>(d) &&
              lin.diffusion.cols() == static_cast<Eigen::Index>(d) &&
              lin.observation.cols() == static_cast<Eigen::Index>(d) &&
              lin.initial_mean.size() == static_cast<Eigen::Index>(d) &&
              lin.initial_cov.rows() == static_cast<Eigen::Index>(d) &&
              lin.initial_cov.cols() == static_cast<Eigen::Index>(d),
          "linear model '" + name + "': inconsistent matrix shapes");
  Eigen::LLT<Eigen::MatrixXd> chol(lin.initial_cov);
  require(chol.info() == Eigen::Success, "linear model '" + name + "': initial covariance must be positive definite");
  const Eigen::MatrixXd lower = chol.matrixL();
  const Eigen::MatrixXd precision = lin.initial_cov.inverse();
  const double log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) -
                          lower.diagonal().array().log().sum();
  const Eigen::MatrixXd gg = lin.diffusion * lin.diffusion.transpose();

  FilterModel::Spec s;
  s.name = std::move(name);
  s.dimension = d;
  s.observation_dimension = n;
  s.drift = [F = lin.drift, d](std::span<const double> x, std::span<double> out) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(d));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(d)) = F * xv;
  };
  s.diffusion = [G = lin.diffusion, d](std::span<const double>, std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] = G(i, j);
  };
  s.diffusion_square = [gg, d](std::span<const double>, std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] = gg(i, j);
  };
  s.observation = [H = lin.observation, d, n](std::span<const double> x, std::span<double> out) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(d));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(n)) = H * xv;
  };
  s.initial_density = [m = lin.initial_mean, precision, log_norm, d](std::span<const double> x) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(d));
    const Eigen::VectorXd r = xv - m;
    return std::exp(log_norm - 0.5 * r.dot(precision * r));
  };
  s.initial_sampler = [m = lin.initial_mean, lower, d](const CounterRng& rng, std::span<double> out) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) z[static_cast<Eigen::Index>(i)] = standard_normal_quantile(rng.uniform(i));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(d)) = m + lower * z;
  };
  // Lipschitz constant of F x is the spectral norm; ellipticity is the smallest eigenvalue of g g^T.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lin.drift);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gg);
  s.assumptions.lipschitz = std::max({svd.singularValues()(0), gg.norm(), 1e-12});
  s.assumptions.ellipticity = std::max(eig.eigenvalues()(0), 1e-300);
  s.assumptions.moment_order = 2;
  s.assumptions.growth_order = 1;
  s.assumptions.growth_constant = 1.0;
  s.linear = std::move(lin);
  s.support_radius = 8.0;
  return FilterModel(std::move(s));
}

const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names = {"linear1d", "linearNd", "benes", "cubic_sensor"};
  return names;
}

namespace {

FilterModel scalar_model(std::string name, double (*drift)(double), double (*observation)(double),
                         AssumptionProfile assumptions) {
  FilterModel::Spec s;
  s.name = std::move(name);
  s.dimension = 1;
  s.drift = [drift](std::span<const double> x, std::span<double> out) { out[0] = drift(x[0]); };
  s.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  s.diffusion_square = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  s.observation = [observation](std::span<const double> x, std::span<double> out) {
    out[0] = observation(x[0]);
  };
  s.initial_density = [](std::span<const double> x) {
    return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi);
  };
  s.initial_sampler = [](const CounterRng& rng, std::span<double> out) {
    out[0] = standard_normal_quantile(rng.uniform(0));
  };
  s.assumptions = assumptions;
  return FilterModel(std::move(s));
}

}  // namespace

FilterModel builtin_model(const std::string& name) {
  if (name == "linear1d") {
    LinearGaussian lin{Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Identity(1, 1),
                       Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                       Eigen::MatrixXd::Identity(1, 1)};
    return make_linear_model("linear1d", std::move(lin));
  }
  if (name == "linearNd") {
    constexpr int d = 2;
    LinearGaussian lin{-Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(d, d),
                       Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d),
                       Eigen::MatrixXd::Identity(d, d)};
    return make_linear_model("linearNd", std::move(lin));
  }
  if (name == "benes") {
    return scalar_model(
        "benes", [](double x) { return std::tanh(x); }, [](double x) { return x; },
        AssumptionProfile{1.0, 1.0, 2, 1, 1.0});
  }
  if (name == "cubic_sensor") {
    return scalar_model(
        "cubic_sensor", [](double x) { return -x; }, [](double x) { return x * x * x; },
        AssumptionProfile{1.0, 1.0, 2, 2, 1.0});
  }
  std::string valid;
  for (const auto& n : builtin_model_names()) valid += (valid.empty() ? "" : ", ") + n;
  fail(ErrorCode::unknown_name, "unknown model '" + name + "' (valid: " + valid + ")");
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {

void check_finite(std::span<const double> values, const char* what, std::span<const double> x) {
  for (double v : values)
    if (!std::isfinite(v))
      fail(ErrorCode::numerical, std::string(what) + " is not finite at x=" + format_point(x));
}

void sample_ball(const CounterRng& rng, std::uint64_t& counter, double radius,
                 std::span<double> out) {
  const std::size_t d = out.size();
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = rng.normal(counter++);
    r2 += out[i] * out[i];
  }
  const double scale = radius * std::pow(rng.uniform(counter++), 1.0 / static_cast<double>(d)) /
                       std::sqrt(std::max(r2, 1e-300));
  for (double& v : out) v *= scale;
}

}  // namespace

ValidationReport validate_assumptions(const FilterModel& model, double domain_radius,
                                      std::size_t samples, std::uint64_t seed,
                                      std::span<const TestFunction> test_functions) {
  require(domain_radius > 0.0, "domain_radius must be positive");
  require(samples >= 2, "at least two samples are required");
  const std::size_t d = model.dimension();
  const auto& assumptions = model.assumptions();
  const CounterRng rng(seed, 0, Stream::initial);
  std::uint64_t counter = 0;

  ValidationReport report;
  report.model = model.name();
  report.domain_radius = domain_radius;

  std::vector<double> x(d), y(d), fx(d), fy(d), a(d * d);
  double max_quotient = 0.0;
  double max_a_norm = 0.0;
  double min_eigen = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    sample_ball(rng, counter, domain_radius, x);
    if (s % 2 == 0) {
      sample_ball(rng, counter, domain_radius, y);
    } else {
      // Nearby pairs probe the local derivative.
      const double eps = domain_radius * 1e-3 * rng.uniform(counter++);
      for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + eps * rng.normal(counter++);
    }
    model.drift(x, fx);
    check_finite(fx, "drift f", x);
    model.drift(y, fy);
    check_finite(fy, "drift f", y);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      num += (fx[i] - fy[i]) * (fx[i] - fy[i]);
      den += (x[i] - y[i]) * (x[i] - y[i]);
    }
    if (den > 0.0) max_quotient = std::max(max_quotient, std::sqrt(num / den));

    model.diffusion_square(x, a);
    check_finite(a, "diffusion a", x);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> am(
        a.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(am);
    min_eigen = std::min(min_eigen, eig.eigenvalues()(0));
    max_a_norm = std::max(max_a_norm, eig.eigenvalues().cwiseAbs().maxCoeff());

    std::vector<double> hx(model.observation_dimension());
    model.observation(x, hx);
    check_finite(hx, "observation h", x);
  }

  const double L = assumptions.lipschitz;
  report.checks.push_back({"A1", max_quotient <= 1.01 * L && max_a_norm <= 1.01 * L, max_quotient,
                           1.01 * L, "max sampled |f(x)-f(y)|/|x-y|; max |a(x)| = " + std::to_string(max_a_norm)});
  const double lambda = assumptions.ellipticity;
  report.checks.push_back({"A2", min_eigen >= 0.99 * lambda, min_eigen, 0.99 * lambda,
                           "min sampled smallest eigenvalue of a(x)"});

  // A3: moments of sigma_0 by trapezoid quadrature on the cube of the domain radius.
  {
    const int per_axis = d == 1 ? 4001 : (d == 2 ? 401 : 81);
    const double h = 2.0 * domain_radius / (per_axis - 1);
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_axis;
    const int n = assumptions.moment_order;
    report.moments.assign(static_cast<std::size_t>(n), 0.0);
    for (std::size_t node = 0; node < total; ++node) {
      std::size_t rem = node;
      double w = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const auto idx = static_cast<int>(rem % per_axis);
        rem /= per_axis;
        x[i] = -domain_radius + h * idx;
        w *= (idx == 0 || idx == per_axis - 1) ? 0.5 * h : h;
      }
      const double p = model.initial_density(x);
      if (!std::isfinite(p)) fail(ErrorCode::numerical, "initial density sigma_0 is not finite at x=" + format_point(x));
      const double r2 = norm2(x);
      double pw = 1.0;
      for (int k = 1; k <= n; ++k) {
        pw *= r2;
        report.moments[static_cast<std::size_t>(k - 1)] += w * pw * p;
      }
    }
    const bool finite = std::all_of(report.moments.begin(), report.moments.end(),
                                    [](double m) { return std::isfinite(m); });
    report.checks.push_back({"A3", finite, report.moments.empty() ? 0.0 : report.moments.back(), 0.0,
                             "integral of |x|^{2n} sigma_0 for n = " + std::to_string(n)});
  }

  // A4: growth of each test function against its declared (m, L).
  std::vector<TestFunction> defaults;
  if (test_functions.empty()) {
    defaults = builtin_test_functions({"one", "x", "x^2"}, d);
    test_functions = defaults;
  }
  for (const auto& phi : test_functions) {
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      sample_ball(rng, counter, domain_radius, x);
      const double v = phi.evaluate(x);
      if (!std::isfinite(v)) fail(ErrorCode::numerical, "test function " + phi.label + " is not finite at x=" + format_point(x));
      const double bound = phi.growth_constant * (1.0 + std::pow(norm2(x), phi.growth_order));
      worst = std::max(worst, std::abs(v) / bound);
    }
    report.checks.push_back({"A4:" + phi.label, worst <= 1.0, worst, 1.0,
                             "max |phi(x)| / (L (1 + |x|^{2m}))"});
  }
  return report;
}

}  // namespace yyf
