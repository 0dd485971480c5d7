#include "fracrc/core.hpp"

#include <algorithm>

#include <cmath>
#include <cstdlib>

namespace fracrc {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error("Rng::below: empty range");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams) {
  std::uint64_t h = Rng::mix(seed);
  for (std::uint64_t s : streams) h = Rng::mix(h ^ Rng::mix(s + 0x632be59bd9b4e019ULL));
  return h;
}

FracExponent::FracExponent(int numerator, int denominator)
    : FracExponent(numerator, denominator, Unchecked{}) {
  if (denominator < 1) throw ConfigError("FracExponent: denominator must be >= 1, got " + std::to_string(denominator));
  if (numerator <= 0) throw ConfigError("FracExponent: numerator must be positive, got " + std::to_string(numerator));
  if (numerator % 2 != 0) throw ConfigError("FracExponent: numerator must be even, got " + std::to_string(numerator));
}

FracExponent FracExponent::linear(int denominator) {
  if (denominator < 1) throw ConfigError("FracExponent: denominator must be >= 1");
  return FracExponent(denominator, denominator, Unchecked{});
}

FracExponent FracExponent::from_value(double value, int denominator) {
  if (!std::isfinite(value) || value <= 0.0) throw ConfigError("FracExponent::from_value: exponent must be positive");
  const long n = 2 * std::lround(value * denominator / 2.0);
  return FracExponent(static_cast<int>(std::max(2L, n)), denominator);
}

std::string FracExponent::to_string() const { return std::to_string(num_) + "/" + std::to_string(den_); }

namespace {

// Integer exponents go through repeated squaring so that e = 2k*d/d agrees
// with |x|^(2k) to the last bit or two; fractional ones through pow().
inline double abs_pow(double ax, int num, int den, double value) {
  if (num % den == 0) {
    int k = num / den;
    double result = 1.0;
    double base = ax;
    while (k > 0) {
      if (k & 1) result *= base;
      base *= base;
      k >>= 1;
    }
    return result;
  }
  return std::pow(ax, value);
}

}  // namespace

double frac_pow(double x, const FracExponent& e) {
  if (!std::isfinite(x)) throw NumericalError("frac_pow: non-finite argument");
  return abs_pow(std::fabs(x), e.numerator(), e.denominator(), e.value());
}

void frac_pow(std::span<const double> in, const FracExponent& e, std::span<double> out) {
  const int num = e.numerator();
  const int den = e.denominator();
  const double v = e.value();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double x = in[i];
    if (!std::isfinite(x)) throw NumericalError("frac_pow: non-finite argument");
    out[i] = abs_pow(std::fabs(x), num, den, v);
  }
}

void library_pow(std::span<const double> in, const FracExponent& e, std::span<double> out) {
  if (e.is_linear()) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i];
    return;
  }
  frac_pow(in, e, out);
}

}  // namespace fracrc
