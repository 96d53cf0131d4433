#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace yyf {

/// Coefficient callbacks write into `out`; matrices are row-major d x d.
/// Callbacks must be pure so models can be shared between threads.
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
using MatrixField = std::function<void(std::span<const double> x, std::span<double> out)>;
using ScalarField = std::function<double(std::span<const double> x)>;
using InitialSampler = std::function<void(const CounterRng& rng, std::span<double> out)>;

struct AssumptionProfile {
  double lipschitz = 1.0;    // A1
  double ellipticity = 1.0;  // A2, lower bound for a on the truncation domain
  int moment_order = 2;      // A3, moments up to 2n are checked
  int growth_order = 1;      // A4
  double growth_constant = 1.0;
};

/// dX = F X dt + Gamma dV, dY = H X dt + dW, X_0 ~ N(m0, P0).
struct LinearGaussian {
  Eigen::MatrixXd drift;
  Eigen::MatrixXd diffusion;
  Eigen::MatrixXd observation;
  Eigen::VectorXd initial_mean;
  Eigen::MatrixXd initial_cov;
};

class FilterModel {
 public:
  struct Spec {
    std::string name;
    std::size_t dimension = 1;
    std::size_t observation_dimension = 0;  // 0 means same as dimension
    VectorField drift;
    MatrixField diffusion;
    MatrixField diffusion_square;  // optional closed form of g g^T
    VectorField observation;
    ScalarField initial_density;
    InitialSampler initial_sampler;  // optional; rejection sampling otherwise
    AssumptionProfile assumptions;
    std::optional<LinearGaussian> linear;
    double support_radius = 8.0;  // box used by rejection sampling
  };

  explicit FilterModel(Spec spec);

  const std::string& name() const { return spec_.name; }
  std::size_t dimension() const { return spec_.dimension; }
  std::size_t observation_dimension() const { return spec_.observation_dimension; }
  const AssumptionProfile& assumptions() const { return spec_.assumptions; }
  const LinearGaussian* linear() const { return spec_.linear ? &*spec_.linear : nullptr; }

  void drift(std::span<const double> x, std::span<double> out) const { spec_.drift(x, out); }
  void diffusion(std::span<const double> x, std::span<double> out) const { spec_.diffusion(x, out); }
  void diffusion_square(std::span<const double> x, std::span<double> out) const;
  void observation(std::span<const double> x, std::span<double> out) const {
    spec_.observation(x, out);
  }
  double initial_density(std::span<const double> x) const { return spec_.initial_density(x); }

  /// Draws X_0 ~ sigma_0 using only counters of `rng`.
  void sample_initial(const CounterRng& rng, std::span<double> out) const;

  /// Same model with sigma_0 multiplied by a positive constant.
  FilterModel with_scaled_initial_density(double factor) const;

  const Spec& spec() const { return spec_; }

 private:
  Spec spec_;
  double rejection_envelope_ = 0.0;
};

/// A test function phi with its declared A4 growth (m, L).
struct TestFunction {
  std::string label;
  ScalarField evaluate;
  int growth_order = 1;
  double growth_constant = 1.0;
};

/// Labels: "one", "x" (= "x1"), "x<i>", "x^2" (= "x1^2"), "x<i>^2", "r2" (|x|^2).
TestFunction builtin_test_function(const std::string& label, std::size_t dimension);
std::vector<TestFunction> builtin_test_functions(const std::vector<std::string>& labels,
                                                 std::size_t dimension);

class TimeSchedule {
 public:
  TimeSchedule(double terminal, std::size_t steps);

  double terminal() const { return terminal_; }
  std::size_t steps() const { return steps_; }
  double delta() const { return delta_; }
  double knot(std::size_t k) const { return k == steps_ ? terminal_ : static_cast<double>(k) * delta_; }
  std::vector<double> knots() const;

 private:
  double terminal_;
  std::size_t steps_;
  double delta_;
};

const std::vector<std::string>& builtin_model_names();
FilterModel builtin_model(const std::string& name);

/// Builds a full model (callbacks, Gaussian sigma_0, sampler) from linear coefficients.
FilterModel make_linear_model(std::string name, LinearGaussian lin);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::string model;
  double domain_radius = 0.0;
  std::vector<AssumptionCheck> checks;
  std::vector<double> moments;  // integral of |x|^{2k} sigma_0 for k = 1..n
  bool passed() const;
};

ValidationReport validate_assumptions(const FilterModel& model, double domain_radius,
                                      std::size_t samples, std::uint64_t seed,
                                      std::span<const TestFunction> test_functions = {});

}  // namespace yyf
