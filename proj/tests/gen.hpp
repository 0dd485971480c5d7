#pragma once

// Small random-case generators for the property tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "fracrc/core.hpp"
#include "fracrc/trajectory.hpp"

namespace gen {

inline double magnitude(fracrc::Rng& rng, double lo_exp, double hi_exp) {
  return std::pow(10.0, rng.uniform(lo_exp, hi_exp));
}

inline double signed_magnitude(fracrc::Rng& rng, double lo_exp, double hi_exp) {
  const double m = magnitude(rng, lo_exp, hi_exp);
  return rng.uniform() < 0.5 ? -m : m;
}

inline std::vector<double> uniform_vector(fracrc::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline double normal(fracrc::Rng& rng) {
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * rng.uniform());
}

inline fracrc::Trajectory uniform_cloud(fracrc::Rng& rng, std::size_t n, std::size_t dim) {
  return fracrc::Trajectory(uniform_vector(rng, n * dim, 0.0, 1.0), dim, 0.01);
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::fabs(a), std::fabs(b));
  return s == 0.0 ? 0.0 : std::fabs(a - b) / s;
}

}  // namespace gen
