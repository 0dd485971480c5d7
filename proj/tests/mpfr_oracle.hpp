#pragma once

#include <mpfr.h>

#include <cmath>

namespace oracle {

// d-th root of |x|^n in 256-bit arithmetic.
inline double mpfr_frac_pow(double x, int n, int d) {
  mpfr_t v;
  mpfr_init2(v, 256);
  mpfr_set_d(v, std::fabs(x), MPFR_RNDN);
  mpfr_pow_ui(v, v, static_cast<unsigned long>(n), MPFR_RNDN);
  mpfr_rootn_ui(v, v, static_cast<unsigned long>(d), MPFR_RNDN);
  const double out = mpfr_get_d(v, MPFR_RNDN);
  mpfr_clear(v);
  return out;
}

}  // namespace oracle
