#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fracrc/dynamics.hpp"
#include "fracrc/kdtree.hpp"
#include "fracrc/metrics.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace fracrc;

namespace {

Trajectory lorenz(std::size_t n, std::uint64_t seed = 3) {
  return std::get<Trajectory>(generate(Lorenz{}, seed, n, 10000));
}

}  // namespace

TEST_CASE("forecast horizon") {
  std::vector<double> d;
  for (int k = 0; k < 1000; ++k) {
    d.push_back(k % 2 == 0 ? 1.0 : -1.0);
    d.push_back(k % 2 == 0 ? -1.0 : 1.0);
  }
  const Trajectory truth(d, 2, 0.01);  // std exactly 1 per coordinate
  CHECK(forecast_horizon(truth, truth, 1.0).steps == 1000);

  std::vector<double> off(d);
  for (double& v : off) v += 10.0;
  CHECK(forecast_horizon(truth, Trajectory(off, 2, 0.01), 1.0).steps == 0);

  // error growing as delta * exp(t - 5) leaves the band at t = 5
  std::vector<double> grow(d);
  for (std::size_t k = 0; k < 1000; ++k) {
    const double e = std::exp(static_cast<double>(k) * 0.01 - 5.0);
    grow[2 * k] += e;
    grow[2 * k + 1] += e;
  }
  const ForecastHorizon fh = forecast_horizon(truth, Trajectory(grow, 2, 0.01), 0.9);
  CHECK(fh.steps == 500);
  CHECK(fh.lyapunov_times == doctest::Approx(4.5));
  CHECK(std::isnan(forecast_horizon(truth, truth, 0.0).lyapunov_times));

  // a shorter (diverged) prediction bounds the horizon
  CHECK(forecast_horizon(truth, truth.slice(0, 40), 1.0).steps == 40);
  CHECK(forecast_horizon(truth, Trajectory::empty(2, 0.01), 1.0).steps == 0);
}

TEST_CASE("fit_slope") {
  CHECK(fit_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
  CHECK_THROWS(fit_slope({1}, {1}));
  CHECK_THROWS(fit_slope({1, 1}, {1, 2}));
}

TEST_CASE("Rosenstein on a periodic signal is near zero") {
  std::vector<double> s;
  for (int k = 0; k < 20000; ++k) s.push_back(std::sin(0.01 * k));
  const double lam = lyapunov_rosenstein(Trajectory(s, 1, 0.01));
  CHECK(std::fabs(lam) < 0.02);

  std::vector<double> circle;
  for (int k = 0; k < 20000; ++k) {
    circle.push_back(std::sin(0.01 * k));
    circle.push_back(std::cos(0.01 * k));
  }
  CHECK(std::fabs(lyapunov_rosenstein(Trajectory(circle, 2, 0.01))) < 0.02);
}

TEST_CASE("Rosenstein on Lorenz") {
  const double lam = lyapunov_rosenstein(lorenz(10000));
  CHECK(lam > 0.75);
  CHECK(lam < 1.05);
}

TEST_CASE("Rosenstein error paths") {
  std::vector<double> flat(300, 1.0);
  CHECK_THROWS_AS(lyapunov_rosenstein(Trajectory(flat, 1, 0.01)), NumericalError);
  CHECK_THROWS_AS(lyapunov_rosenstein(Trajectory(std::vector<double>(10, 0.0), 1, 0.01)), ConfigError);
  RosensteinConfig bad;
  bad.fit_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("mean period of a sinusoid") {
  std::vector<double> s;
  for (int k = 0; k < 10000; ++k) s.push_back(std::sin(2.0 * M_PI * k / 250.0));
  CHECK(mean_period(Trajectory(s, 1, 0.01)) == 250);
}

TEST_CASE("tree pair counts equal brute force") {
  Rng rng(404);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t dim = 1 + rng.below(4);
    const std::size_t n = 50 + rng.below(1500);
    const auto pts = gen::uniform_vector(rng, n * dim);
    std::vector<double> radii;
    double r = gen::magnitude(rng, -2.5, -1.0);
    for (int k = 0; k < 10; ++k) {
      radii.push_back(r);
      r *= 1.5;
    }
    const KdTree tree(pts, dim, 1 + rng.below(40));
    CHECK(tree.pair_counts(radii) == oracle::brute_pair_counts(pts, dim, radii, 0));
  }
}

TEST_CASE("a large cluster of coincident points stays one oversized leaf") {
  Rng rng(77);
  std::vector<double> pts;
  for (int i = 0; i < 300; ++i) pts.insert(pts.end(), {0.5, -0.25, 1.0});
  for (int i = 0; i < 40; ++i) {
    for (int c = 0; c < 3; ++c) pts.push_back(rng.uniform());
  }
  const KdTree tree(pts, 3, 8);
  const std::vector<double> radii{1e-3, 0.1, 0.5, 2.0};
  CHECK(tree.pair_counts(radii) == oracle::brute_pair_counts(pts, 3, radii, 0));
  const std::vector<double> q{0.5, -0.25, 1.0};
  const auto nb = tree.nearest_outside_window(q, 0, 5);
  CHECK(nb.found);
  CHECK(nb.index == 6);
  CHECK(nb.sq_dist == 0.0);
}

TEST_CASE("correlation sum equals brute force at n = 5000") {
  const Trajectory t = lorenz(5000, 8);
  std::vector<double> pts(t.values().begin(), t.values().end());
  for (std::size_t window : {std::size_t{0}, std::size_t{37}, CorrelationDimensionConfig::kAutoWindow}) {
    CorrelationDimensionConfig cfg;
    cfg.theiler_window = window;
    const CorrelationSum cs = correlation_sum(t, cfg);
    REQUIRE(cs.points == 5000);
    CHECK(cs.pairs == oracle::brute_pair_counts(pts, 3, cs.radii, cs.theiler_window));
    const std::uint64_t w = cs.theiler_window;
    CHECK(cs.total_pairs == (5000 - w) * (5000 - w - 1) / 2);
  }
}

TEST_CASE("correlation dimension of simple sets") {
  Rng rng(9);
  CorrelationDimensionConfig cfg;
  cfg.theiler_window = 0;
  const double square = correlation_dimension(gen::uniform_cloud(rng, 10000, 2), cfg);
  CHECK(square == doctest::Approx(2.0).epsilon(0.05));

  std::vector<double> line;
  for (int i = 0; i < 10000; ++i) {
    const double s = rng.uniform();
    line.insert(line.end(), {s, 2.0 * s, -s});
  }
  const double seg = correlation_dimension(Trajectory(line, 3, 0.01), cfg);
  CHECK(std::fabs(seg - 1.0) < 0.05);

  CHECK_THROWS_AS(correlation_dimension(Trajectory(std::vector<double>(600, 1.0), 3, 0.01), cfg), NumericalError);
  CHECK_THROWS_AS(correlation_dimension(gen::uniform_cloud(rng, 50, 2), cfg), ConfigError);
}

TEST_CASE("Lorenz correlation dimension and its brute-force cross-check") {
  const Trajectory t = lorenz(50000, 21);
  const double tree_value = correlation_dimension(t);
  CHECK(std::fabs(tree_value - 2.05) < 0.1);

  // independent slope from an O(n^2) sum on a 5000-point subsample
  CorrelationDimensionConfig cfg;
  cfg.max_points = 5000;
  const CorrelationSum cs = correlation_sum(t, cfg);
  std::vector<double> pts;
  for (std::size_t i = 0; i < 5000; ++i) {
    const std::size_t src = i * 10;
    pts.insert(pts.end(), {t(src, 0), t(src, 1), t(src, 2)});
  }
  const std::size_t window = cs.theiler_window / 10;  // subsample stride 10
  const auto counts = oracle::brute_pair_counts(pts, 3, cs.radii, window);
  const double total = (5000.0 - window) * (5000.0 - window - 1.0) / 2.0;
  std::vector<double> x, y;
  for (std::size_t k = cs.fit_begin; k < cs.fit_end; ++k) {
    x.push_back(std::log(cs.radii[k]));
    y.push_back(std::log(static_cast<double>(counts[k]) / total));
  }
  CHECK(std::fabs(fit_slope(x, y) - tree_value) < 0.05);
}

TEST_CASE("climate check") {
  const Trajectory t = lorenz(10000, 5);
  const ClimateReport same = climate_check(t, t);
  CHECK(same.success);
  CHECK(same.lyapunov_pred == same.lyapunov_true);
  CHECK(same.correlation_dim_pred == same.correlation_dim_true);

  // white noise with the attractor's per-coordinate variance
  Rng rng(6);
  const auto sd = column_std(t);
  std::vector<double> noise;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) noise.push_back(sd[c] * gen::normal(rng));
  }
  const Trajectory nt(noise, 3, t.dt());
  const double noise_dim = correlation_dimension(nt);
  CHECK(noise_dim > 2.5);
  CHECK_FALSE(climate_check(t, nt).success);
}
