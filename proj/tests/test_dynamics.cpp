#include <doctest.h>

#include <cmath>

#include "fracrc/dynamics.hpp"
#include "gen.hpp"

using namespace fracrc;

namespace {

// Classic fixed-step RK4 with an independent Lorenz right-hand side.
Vec3 lorenz_f(const Vec3& x) {
  return {10.0 * (x[1] - x[0]), 28.0 * x[0] - x[1] - x[0] * x[2], -8.0 / 3.0 * x[2] + x[0] * x[1]};
}

Vec3 axpy(const Vec3& x, double h, const Vec3& k) { return {x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]}; }

std::vector<Vec3> rk4_samples(Vec3 x, double h, int substeps, int samples) {
  std::vector<Vec3> out{x};
  for (int s = 1; s < samples; ++s) {
    for (int i = 0; i < substeps; ++i) {
      const Vec3 k1 = lorenz_f(x);
      const Vec3 k2 = lorenz_f(axpy(x, h / 2, k1));
      const Vec3 k3 = lorenz_f(axpy(x, h / 2, k2));
      const Vec3 k4 = lorenz_f(axpy(x, h, k3));
      for (int c = 0; c < 3; ++c) x[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("right-hand sides") {
  const Vec3 l = rhs(Lorenz{}, {1, 1, 1});
  CHECK(l[0] == 0.0);
  CHECK(l[1] == 26.0);
  CHECK(l[2] == doctest::Approx(-5.0 / 3.0).epsilon(1e-15));

  const FractionalHalvorsen h{1.3, FracExponent(100), FracExponent(100), FracExponent(100)};
  CHECK(rhs(h, {0, 0, 0}) == Vec3{0, 0, 0});
  CHECK(rhs(Thomas{0.21}, {0, 0, 0}) == Vec3{0, 0, 0});

  // -a x - 4y - 4z - |y|^xi with a = 1.3 at (1, -2, 0.5), xi = 2
  const Vec3 v = rhs(h, {1, -2, 0.5});
  CHECK(v[0] == doctest::Approx(-1.3 + 8.0 - 2.0 - 4.0));
  CHECK(v[1] == doctest::Approx(2.6 - 2.0 - 4.0 - 0.25));
  CHECK(v[2] == doctest::Approx(-0.65 - 4.0 + 8.0 - 1.0));

  const Vec3 t = rhs(Thomas{0.21}, {1, 2, 3});
  CHECK(t[0] == doctest::Approx(-0.21 + std::sin(2.0)));
  CHECK(t[2] == doctest::Approx(-0.63 + std::sin(1.0)));
}

TEST_CASE("origin is a fixed point of Halvorsen for any exponent") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const FracExponent e(2 * static_cast<int>(26 + rng.below(115)));
    CHECK(rhs(FractionalHalvorsen{rng.uniform(0.5, 5.0), e, e, e}, {0, 0, 0}) == Vec3{0, 0, 0});
  }
}

TEST_CASE("system validation") {
  CHECK_THROWS_AS(make_system(Lorenz{NAN, 28, 1}), ConfigError);
  CHECK_THROWS_AS(make_system(FractionalHalvorsen{1.3, FracExponent(40), FracExponent(100), FracExponent(100)}),
                  ConfigError);
  CHECK_NOTHROW(make_system(Thomas{0.21}));
  CHECK(system_name(Lorenz{}) == "lorenz");
}

TEST_CASE("Lorenz integration agrees with a fine fixed-step RK4") {
  const Trajectory t = integrate_or_throw(Lorenz{}, {1, 1, 1}, 10000);
  REQUIRE(t.size() == 10000);
  double max_abs = 0.0;
  for (double v : t.values()) {
    REQUIRE(std::isfinite(v));
    max_abs = std::max(max_abs, std::fabs(v));
  }
  CHECK(max_abs < 100.0);

  const auto ref = rk4_samples({1, 1, 1}, 1e-4, 100, 500);
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::fabs(t(k, c) - ref[k][c]));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("integration edge cases") {
  const Trajectory one = integrate_or_throw(Lorenz{}, {1, 2, 3}, 1);
  REQUIRE(one.size() == 1);
  CHECK(one(0, 0) == 1.0);
  CHECK(one(0, 1) == 2.0);
  CHECK(one(0, 2) == 3.0);
  CHECK_THROWS_AS(integrate(Lorenz{}, {1, 1, 1}, 0), ConfigError);
  CHECK_THROWS_AS(integrate(Lorenz{}, {NAN, 1, 1}, 10), ConfigError);
  IntegratorConfig bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(integrate(Lorenz{}, {1, 1, 1}, 10, bad), ConfigError);

  // A negative damping parameter makes the linear part expanding.
  const FractionalHalvorsen blowup{-5.0, FracExponent(100), FracExponent(100), FracExponent(100)};
  const IntegrationResult r = integrate(blowup, {0.1, 0, 0}, 100000);
  REQUIRE(std::holds_alternative<Diverged>(r));
  CHECK(std::get<Diverged>(r).reason == Diverged::Reason::NormBound);
  CHECK_THROWS_AS(integrate_or_throw(blowup, {0.1, 0, 0}, 100000), NumericalError);
}

TEST_CASE("fractional Halvorsen at a = 3.98 stays bounded") {
  const FracExponent xi(264);
  const IntegrationResult r = generate(FractionalHalvorsen{3.98, xi, xi, xi}, 0, 20000, 1000);
  REQUIRE(std::holds_alternative<Trajectory>(r));
  CHECK(std::get<Trajectory>(r).size() == 20000);
}

TEST_CASE("integration is deterministic") {
  const Trajectory a = integrate_or_throw(Thomas{}, {0.1, 0, 0}, 3000);
  const Trajectory b = integrate_or_throw(Thomas{}, {0.1, 0, 0}, 3000);
  CHECK(a == b);
}

TEST_CASE("initial conditions") {
  const FractionalHalvorsen h{1.3, FracExponent(100), FracExponent(100), FracExponent(100)};
  CHECK(default_initial_condition(h, 1) == Vec3{0.1, 0, 0});
  CHECK(default_initial_condition(h, 999) == Vec3{0.1, 0, 0});
  CHECK(default_initial_condition(Thomas{}, 5) == Vec3{0.1, 0, 0});
  CHECK(default_initial_condition(Lorenz{}, 17) == default_initial_condition(Lorenz{}, 17));
  CHECK(default_initial_condition(Lorenz{}, 17) != default_initial_condition(Lorenz{}, 18));
  double lo = 0.0, hi = 0.0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    for (double v : default_initial_condition(Lorenz{}, s)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  CHECK(lo >= -20.0);
  CHECK(hi <= 20.0);
  CHECK(lo < -19.9);
  CHECK(hi > 19.9);
}

TEST_CASE("transient removal") {
  std::vector<double> d(300);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(i);
  const Trajectory t(d, 3, 0.01);
  const Trajectory u = discard_transient(t, 10);
  CHECK(u.size() == 90);
  CHECK(u.transient_discarded() == 10);
  CHECK(u(0, 0) == 30.0);
  CHECK(discard_transient(t, 0) == t);
  CHECK_THROWS(discard_transient(t, 100));
  CHECK(discard_transient(u, 5).transient_discarded() == 15);
}

TEST_CASE("post-transient Lorenz statistics are stationary") {
  const Trajectory t = std::get<Trajectory>(generate(Lorenz{}, 11, 20000, 10000));
  REQUIRE(t.transient_discarded() == 10000);
  const auto a = column_std(t.slice(0, 10000));
  const auto b = column_std(t.slice(10000, 10000));
  CHECK(std::fabs(a[2] - b[2]) / b[2] < 0.1);
}
