#include "fracrc/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "fracrc/core.hpp"

namespace fracrc::fft {

namespace {

// Only plan creation and destruction touch FFTW's global state.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

}  // namespace

std::vector<std::complex<double>> forward_real(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  Plan p;
  {
    std::lock_guard lock(planner_mutex());
    p.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                  FFTW_ESTIMATE);
  }
  if (p.plan == nullptr) throw Error("fft: planning failed");
  fftw_execute(p.plan);
  return out;
}

std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t n) {
  if (half.size() != n / 2 + 1) throw Error("fft: half-spectrum size does not match n");
  std::vector<std::complex<double>> in(half.begin(), half.end());
  in.front().imag(0.0);
  if (n % 2 == 0) in.back().imag(0.0);
  std::vector<double> out(n);
  Plan p;
  {
    std::lock_guard lock(planner_mutex());
    p.plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                  FFTW_ESTIMATE);
  }
  if (p.plan == nullptr) throw Error("fft: planning failed");
  fftw_execute(p.plan);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

namespace {

std::vector<std::complex<double>> centered_spectrum(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> centered(x.begin(), x.end());
  for (double& v : centered) v -= mean;
  return forward_real(centered);
}

}  // namespace

std::size_t dominant_bin(std::span<const double> x) {
  if (x.size() < 4) return 0;
  const auto spec = centered_spectrum(x);
  std::size_t best = 0;
  double best_power = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double pw = std::norm(spec[k]);
    if (pw > best_power) {
      best_power = pw;
      best = k;
    }
  }
  return best;
}

double mean_frequency_bin(std::span<const double> x) {
  if (x.size() < 4) return 0.0;
  const auto spec = centered_spectrum(x);
  double weighted = 0.0, total = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double pw = std::norm(spec[k]);
    weighted += static_cast<double>(k) * pw;
    total += pw;
  }
  return total > 0.0 ? weighted / total : 0.0;
}

}  // namespace fracrc::fft
