#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>

#include "fracrc/core.hpp"
#include "fracrc/trajectory.hpp"

namespace fracrc {

using Vec3 = std::array<double, 3>;

struct Lorenz {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

/// Halvorsen flow with per-equation fractional exponents on the nonlinear terms.
struct FractionalHalvorsen {
  double a = 1.3;
  FracExponent xi1{100};
  FracExponent xi2{100};
  FracExponent xi3{100};
};

struct Thomas {
  double b = 0.21;
};

/// One of the three supported flows. Construct through make_system() to get
/// the invariants checked.
using SystemSpec = std::variant<Lorenz, FractionalHalvorsen, Thomas>;

/// Validates parameters (finite, Halvorsen exponents >= 1) and returns the spec.
SystemSpec make_system(SystemSpec spec);

std::string system_name(const SystemSpec& spec);

/// Time derivative of the flow at x.
Vec3 rhs(const SystemSpec& spec, const Vec3& x);

struct IntegratorConfig {
  double dt_sample = 0.01;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  /// Max-norm bound beyond which the run is declared diverged.
  double divergence_bound = 1e6;

  void validate() const;
};

/// Why an integration was abandoned.
struct Diverged {
  enum class Reason { NormBound, StepUnderflow, NonFinite };
  Reason reason;
  double time;  // system time at which the run was abandoned
  std::string message() const;
};

using IntegrationResult = std::variant<Trajectory, Diverged>;

/// Adaptive Dormand-Prince 5(4) stepping; states are read off the dense
/// output at t = k * dt_sample, k = 0 .. n_steps - 1. Sample 0 is x0.
IntegrationResult integrate(const SystemSpec& spec, const Vec3& x0, std::size_t n_steps,
                            const IntegratorConfig& cfg = {});

/// Convenience: integrate and throw NumericalError on divergence.
Trajectory integrate_or_throw(const SystemSpec& spec, const Vec3& x0, std::size_t n_steps,
                              const IntegratorConfig& cfg = {});

/// Lorenz: seeded uniform draw in [-20, 20]^3, coordinates independent.
/// Halvorsen and Thomas: (0.1, 0, 0).
Vec3 default_initial_condition(const SystemSpec& spec, std::uint64_t rng_seed);

/// Integrate from the default initial condition and drop `transient` steps.
IntegrationResult generate(const SystemSpec& spec, std::uint64_t seed, std::size_t n_steps,
                           std::size_t transient, const IntegratorConfig& cfg = {});

}  // namespace fracrc
