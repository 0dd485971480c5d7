#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace fracrc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-provided configuration. The CLI maps it to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-finite states, singular systems, degenerate data.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Counter-based generator: the stream is a pure function of (key, counter),
/// and split() derives statistically independent child streams. Every random
/// element in the library takes one of these, built from an explicit seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Rng split(std::uint64_t stream) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(stream + 0xbb67ae8584caa73bULL));
    return child;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Derive a child seed from a parent seed and a list of stream identifiers.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams);

/// Rational exponent n/d with an even numerator. Applied to data and
/// reservoir states as the d-th root of the n-th power, i.e. |x|^(n/d).
class FracExponent {
 public:
  static constexpr int kDefaultDenominator = 50;

  FracExponent(int numerator, int denominator = kDefaultDenominator);

  /// Exponent 1 (the linear term). Only allowed inside classic-RC libraries,
  /// where it maps to the signed state.
  static FracExponent linear(int denominator = kDefaultDenominator);

  /// Nearest grid exponent n/d with even n.
  static FracExponent from_value(double value, int denominator = kDefaultDenominator);

  int numerator() const { return num_; }
  int denominator() const { return den_; }
  double value() const { return value_; }
  bool is_linear() const { return num_ == den_; }

  /// Exact rational comparison.
  friend bool operator==(const FracExponent& a, const FracExponent& b) {
    return static_cast<long long>(a.num_) * b.den_ == static_cast<long long>(b.num_) * a.den_;
  }
  friend bool operator<(const FracExponent& a, const FracExponent& b) {
    return static_cast<long long>(a.num_) * b.den_ < static_cast<long long>(b.num_) * a.den_;
  }
  friend bool operator<=(const FracExponent& a, const FracExponent& b) { return !(b < a); }

  std::string to_string() const;

 private:
  struct Unchecked {};
  FracExponent(int n, int d, Unchecked) : num_(n), den_(d), value_(static_cast<double>(n) / d) {}

  int num_;
  int den_;
  double value_;
};

/// |x|^(n/d). Equals the real d-th root of x^n for even n, so it is even in x
/// and never negative. Throws NumericalError for non-finite x.
double frac_pow(double x, const FracExponent& e);

/// Element-wise frac_pow; `out` must have the size of `in`.
void frac_pow(std::span<const double> in, const FracExponent& e, std::span<double> out);

/// Like frac_pow, except that the linear exponent returns x itself (signed).
/// This is how classic-RC libraries treat their leading entry.
void library_pow(std::span<const double> in, const FracExponent& e, std::span<double> out);

}  // namespace fracrc
