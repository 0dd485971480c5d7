#include "fracrc/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace fracrc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ConfigError(std::string("system parameter ") + what + " must be finite");
}

}  // namespace

SystemSpec make_system(SystemSpec spec) {
  std::visit(Overloaded{
                 [](const Lorenz& s) {
                   require_finite(s.sigma, "sigma");
                   require_finite(s.rho, "rho");
                   require_finite(s.beta, "beta");
                 },
                 [](const FractionalHalvorsen& s) {
                   require_finite(s.a, "a");
                   for (const auto& xi : {s.xi1, s.xi2, s.xi3}) {
                     if (xi.value() < 1.0) throw ConfigError("Halvorsen exponent " + xi.to_string() + " is below 1");
                   }
                 },
                 [](const Thomas& s) { require_finite(s.b, "b"); },
             },
             spec);
  return spec;
}

std::string system_name(const SystemSpec& spec) {
  return std::visit(Overloaded{
                        [](const Lorenz&) { return std::string("lorenz"); },
                        [](const FractionalHalvorsen&) { return std::string("halvorsen"); },
                        [](const Thomas&) { return std::string("thomas"); },
                    },
                    spec);
}

Vec3 rhs(const SystemSpec& spec, const Vec3& x) {
  return std::visit(
      Overloaded{
          [&](const Lorenz& s) -> Vec3 {
            return {s.sigma * (x[1] - x[0]), s.rho * x[0] - x[1] - x[0] * x[2], -s.beta * x[2] + x[0] * x[1]};
          },
          [&](const FractionalHalvorsen& s) -> Vec3 {
            return {-s.a * x[0] - 4.0 * x[1] - 4.0 * x[2] - frac_pow(x[1], s.xi1),
                    -s.a * x[1] - 4.0 * x[2] - 4.0 * x[0] - frac_pow(x[2], s.xi2),
                    -s.a * x[2] - 4.0 * x[0] - 4.0 * x[1] - frac_pow(x[0], s.xi3)};
          },
          [&](const Thomas& s) -> Vec3 {
            return {-s.b * x[0] + std::sin(x[1]), -s.b * x[1] + std::sin(x[2]), -s.b * x[2] + std::sin(x[0])};
          },
      },
      spec);
}

void IntegratorConfig::validate() const {
  if (!(dt_sample > 0.0) || !std::isfinite(dt_sample)) throw ConfigError("integrator: dt_sample must be > 0");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator: tolerances must be > 0");
  if (!(divergence_bound > 0.0)) throw ConfigError("integrator: divergence_bound must be > 0");
}

std::string Diverged::message() const {
  const char* why = reason == Reason::NormBound       ? "state norm exceeded the divergence bound"
                    : reason == Reason::StepUnderflow ? "step size underflow"
                                                      : "non-finite state";
  return std::string(why) + " at t=" + std::to_string(time);
}

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

inline bool all_finite(const Vec3& v) { return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]); }

inline double max_norm(const Vec3& v) { return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])}); }

double rms_scaled(const Vec3& v, const Vec3& y, const IntegratorConfig& cfg) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::fabs(y[i]);
    s += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(s / 3.0);
}

double initial_step(const SystemSpec& spec, const Vec3& y, const Vec3& f0, const IntegratorConfig& cfg) {
  const double dn0 = rms_scaled(y, y, cfg);
  const double dn1 = rms_scaled(f0, y, cfg);
  double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
  h0 = std::min(h0, cfg.dt_sample);
  Vec3 y1;
  for (int i = 0; i < 3; ++i) y1[i] = y[i] + h0 * f0[i];
  const Vec3 f1 = rhs(spec, y1);
  Vec3 df;
  for (int i = 0; i < 3; ++i) df[i] = f1[i] - f0[i];
  const double dn2 = rms_scaled(df, y, cfg) / h0;
  const double m = std::max(dn1, dn2);
  const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
  return std::min(100.0 * h0, h1);
}

}  // namespace

IntegrationResult integrate(const SystemSpec& spec, const Vec3& x0, std::size_t n_steps,
                            const IntegratorConfig& cfg) {
  cfg.validate();
  if (n_steps < 1) throw ConfigError("integrate: n_steps must be >= 1");
  if (!all_finite(x0)) throw ConfigError("integrate: initial condition must be finite");

  std::vector<double> out;
  out.reserve(3 * n_steps);
  out.insert(out.end(), x0.begin(), x0.end());
  if (n_steps == 1) return Trajectory(std::move(out), 3, cfg.dt_sample);

  double t = 0.0;
  Vec3 y = x0;
  try {
    Vec3 k1 = rhs(spec, y);
    double h = initial_step(spec, y, k1, cfg);
    bool last_rejected = false;
    std::size_t next = 1;
    const double t_end = static_cast<double>(n_steps - 1) * cfg.dt_sample;

    while (next < n_steps) {
      if (h < 1e-14 * std::max(1.0, std::fabs(t))) return Diverged{Diverged::Reason::StepUnderflow, t};
      // Land exactly on the final sample instead of overshooting far past it.
      if (t + h > t_end && t < t_end) h = std::max(t_end - t, h * 1e-3);

      Vec3 k2, k3, k4, k5, k6, k7, ys, yn;
      for (int i = 0; i < 3; ++i) ys[i] = y[i] + h * a21 * k1[i];
      k2 = rhs(spec, ys);
      for (int i = 0; i < 3; ++i) ys[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = rhs(spec, ys);
      for (int i = 0; i < 3; ++i) ys[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = rhs(spec, ys);
      for (int i = 0; i < 3; ++i) ys[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = rhs(spec, ys);
      for (int i = 0; i < 3; ++i) {
        ys[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      k6 = rhs(spec, ys);
      for (int i = 0; i < 3; ++i) {
        yn[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      }
      if (!all_finite(yn)) {
        h *= 0.2;
        last_rejected = true;
        continue;
      }
      k7 = rhs(spec, yn);

      Vec3 err;
      for (int i = 0; i < 3; ++i) {
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      }
      double en = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y[i]), std::fabs(yn[i]));
        en += (err[i] / sc) * (err[i] / sc);
      }
      en = std::sqrt(en / 3.0);
      if (!std::isfinite(en)) {
        h *= 0.2;
        last_rejected = true;
        continue;
      }

      if (en > 1.0) {
        h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
        last_rejected = true;
        continue;
      }

      // Accepted: sample the dense output on the grid inside (t, t + h].
      const double t_new = t + h;
      Vec3 rc2, rc3, rc4, rc5;
      for (int i = 0; i < 3; ++i) {
        const double ydiff = yn[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        rc2[i] = ydiff;
        rc3[i] = bspl;
        rc4[i] = ydiff - h * k7[i] - bspl;
        rc5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      while (next < n_steps) {
        const double tk = static_cast<double>(next) * cfg.dt_sample;
        if (tk > t_new) break;
        const double th = (tk - t) / h;
        const double th1 = 1.0 - th;
        for (int i = 0; i < 3; ++i) {
          out.push_back(y[i] + th * (rc2[i] + th1 * (rc3[i] + th * (rc4[i] + th1 * rc5[i]))));
        }
        ++next;
      }

      t = t_new;
      y = yn;
      k1 = k7;
      if (max_norm(y) > cfg.divergence_bound) return Diverged{Diverged::Reason::NormBound, t};

      double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h *= fac;
      last_rejected = false;
    }
  } catch (const NumericalError&) {
    return Diverged{Diverged::Reason::NonFinite, t};
  }

  for (double v : out) {
    if (!std::isfinite(v) || std::fabs(v) > cfg.divergence_bound) return Diverged{Diverged::Reason::NormBound, t};
  }
  return Trajectory(std::move(out), 3, cfg.dt_sample);
}

Trajectory integrate_or_throw(const SystemSpec& spec, const Vec3& x0, std::size_t n_steps,
                              const IntegratorConfig& cfg) {
  auto res = integrate(spec, x0, n_steps, cfg);
  if (auto* d = std::get_if<Diverged>(&res)) throw NumericalError(system_name(spec) + " diverged: " + d->message());
  return std::get<Trajectory>(std::move(res));
}

Vec3 default_initial_condition(const SystemSpec& spec, std::uint64_t rng_seed) {
  if (std::holds_alternative<Lorenz>(spec)) {
    Rng rng(derive_seed(rng_seed, {0x1c}));
    Vec3 x;
    for (double& v : x) v = rng.uniform(-20.0, 20.0);
    return x;
  }
  return {0.1, 0.0, 0.0};
}

IntegrationResult generate(const SystemSpec& spec, std::uint64_t seed, std::size_t n_steps, std::size_t transient,
                           const IntegratorConfig& cfg) {
  auto res = integrate(spec, default_initial_condition(spec, seed), n_steps + transient, cfg);
  if (auto* traj = std::get_if<Trajectory>(&res)) {
    if (transient > 0) return discard_transient(*traj, transient);
  }
  return res;
}

}  // namespace fracrc
