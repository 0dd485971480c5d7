#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracrc/trajectory.hpp"

namespace fracrc {

/// Half spectrum of the FT surrogate before the inverse transform: original
/// amplitudes, phases of bins 1..ceil(n/2)-1 replaced by uniform draws on
/// [0, 2 pi), DC and (even n) Nyquist bins left as they are.
std::vector<std::complex<double>> surrogate_spectrum(std::span<const double> series, std::uint64_t seed);

/// Phase-randomized surrogate of a real series (n >= 4).
std::vector<double> ft_surrogate(std::span<const double> series, std::uint64_t seed);

/// Surrogate of every coordinate with independent phases.
Trajectory surrogate_trajectory(const Trajectory& traj, std::uint64_t seed);

/// Seed of realization m in an ensemble.
std::uint64_t surrogate_seed(std::uint64_t seed, std::size_t realization);

struct SurrogateBackground {
  double mean = 0.0;
  double std = 0.0;  // sample std (n - 1); NaN with fewer than two values
  std::size_t realizations = 0;
  std::vector<double> values;  // successful measures, in realization order
  std::vector<std::size_t> failed;
  std::vector<std::string> failure_messages;
};

/// Apply `measure` to M surrogate trajectories. A realization fails when the
/// measure throws a fracrc::Error or returns a non-finite value; failures are
/// excluded. More than M/2 failures raise NumericalError.
SurrogateBackground surrogate_background(const Trajectory& traj, std::size_t realizations,
                                         const std::function<double(const Trajectory&)>& measure,
                                         std::uint64_t seed, std::size_t jobs = 1);

/// Sample mean and sample standard deviation of precomputed measures, with
/// the same failure rule; NaN entries count as failures.
SurrogateBackground summarize_background(std::span<const double> measures);

}  // namespace fracrc
