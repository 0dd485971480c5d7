#include "fracrc/surrogates.hpp"

#include <cmath>
#include <numbers>

#include "fracrc/core.hpp"
#include "fracrc/fft.hpp"
#include "fracrc/harness/thread_pool.hpp"

namespace fracrc {

std::vector<std::complex<double>> surrogate_spectrum(std::span<const double> series, std::uint64_t seed) {
  const std::size_t n = series.size();
  if (n < 4) throw ConfigError("ft_surrogate: series needs at least 4 samples");
  for (double v : series) {
    if (!std::isfinite(v)) throw NumericalError("ft_surrogate: non-finite sample");
  }
  std::vector<std::complex<double>> spec = fft::forward_real(series);
  Rng rng(derive_seed(seed, {0x5u}));
  const std::size_t last = (n + 1) / 2 - 1;
  for (std::size_t k = 1; k <= last; ++k) {
    spec[k] = std::polar(std::abs(spec[k]), 2.0 * std::numbers::pi * rng.uniform());
  }
  return spec;
}

std::vector<double> ft_surrogate(std::span<const double> series, std::uint64_t seed) {
  return fft::inverse_real(surrogate_spectrum(series, seed), series.size());
}

std::uint64_t surrogate_seed(std::uint64_t seed, std::size_t realization) {
  return derive_seed(seed, {0x5a11, realization});
}

Trajectory surrogate_trajectory(const Trajectory& traj, std::uint64_t seed) {
  Trajectory out = traj;
  for (std::size_t c = 0; c < traj.dim(); ++c) {
    const std::vector<double> col = traj.column(c);
    out.set_column(c, ft_surrogate(col, derive_seed(seed, {c})));
  }
  return out;
}

SurrogateBackground summarize_background(std::span<const double> measures) {
  SurrogateBackground bg;
  bg.realizations = measures.size();
  for (std::size_t m = 0; m < measures.size(); ++m) {
    if (std::isfinite(measures[m])) {
      bg.values.push_back(measures[m]);
    } else {
      bg.failed.push_back(m);
    }
  }
  if (bg.realizations == 0 || 2 * bg.failed.size() > bg.realizations) {
    throw NumericalError("surrogate background: " + std::to_string(bg.failed.size()) + " of " +
                         std::to_string(bg.realizations) + " realizations failed");
  }
  double mean = 0.0;
  for (double v : bg.values) mean += v;
  mean /= static_cast<double>(bg.values.size());
  bg.mean = mean;
  if (bg.values.size() < 2) {
    bg.std = std::nan("");
  } else {
    double ss = 0.0;
    for (double v : bg.values) ss += (v - mean) * (v - mean);
    bg.std = std::sqrt(ss / static_cast<double>(bg.values.size() - 1));
  }
  return bg;
}

SurrogateBackground surrogate_background(const Trajectory& traj, std::size_t realizations,
                                         const std::function<double(const Trajectory&)>& measure,
                                         std::uint64_t seed, std::size_t jobs) {
  if (realizations < 1) throw ConfigError("surrogate background: need at least one realization");
  std::vector<double> values(realizations, std::nan(""));
  std::vector<std::string> messages(realizations);
  parallel_for(realizations, jobs, [&](std::size_t m) {
    try {
      values[m] = measure(surrogate_trajectory(traj, surrogate_seed(seed, m)));
    } catch (const Error& e) {
      messages[m] = e.what();
    }
  });
  SurrogateBackground bg = summarize_background(values);
  for (std::size_t m : bg.failed) bg.failure_messages.push_back(messages[m]);
  return bg;
}

}  // namespace fracrc
