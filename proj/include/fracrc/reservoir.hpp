#pragma once

// Training and closed-loop prediction shared by every reservoir machine.
// A machine supplies its dimensions, a linear-or-not state update and the
// generalized readout state; the regression and feedback loop live here.

#include <cmath>
#include <concepts>
#include <span>
#include <string>
#include <vector>

#include "fracrc/core.hpp"
#include "fracrc/linalg.hpp"
#include "fracrc/trajectory.hpp"

namespace fracrc {

template <class M>
concept ReservoirMachine = requires(const M& m, std::span<double> state, std::span<const double> input,
                                    std::span<double> scratch, std::span<const double> cstate,
                                    std::span<double> out) {
  { m.input_dim() } -> std::convertible_to<std::size_t>;
  { m.state_dim() } -> std::convertible_to<std::size_t>;
  { m.feature_dim() } -> std::convertible_to<std::size_t>;
  { m.ridge() } -> std::convertible_to<double>;
  m.advance(state, input, scratch);
  m.generalize(cstate, out);
};

struct Prediction {
  Trajectory trajectory;
  bool diverged = false;
  /// First step index whose prediction was non-finite or out of bounds.
  std::size_t diverged_at = 0;
};

/// Prediction magnitudes beyond this are treated as divergence.
inline constexpr double kPredictionBound = 1e6;

namespace detail {

inline bool finite_all(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace detail

/// Drive the reservoir open-loop from r(0)=0 over `traj`, pair the
/// generalized state r~(t+1) with x(t+1) after the first `sync_len`
/// steps, and solve the ridge problem.
template <ReservoirMachine M>
Readout train(const M& machine, const Trajectory& traj, std::size_t sync_len) {
  if (traj.dim() != machine.input_dim()) throw ConfigError("train: trajectory dimension does not match the machine");
  if (traj.size() < sync_len + 2) {
    throw ConfigError("train: trajectory of " + std::to_string(traj.size()) + " steps is shorter than sync_len + 2");
  }
  std::vector<double> r(machine.state_dim(), 0.0);
  std::vector<double> scratch(machine.state_dim());
  std::vector<double> feature(machine.feature_dim());
  RidgeAccumulator acc(machine.feature_dim(), machine.input_dim());
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
    machine.advance(r, traj.row(t), scratch);
    if (t < sync_len) continue;
    try {
      machine.generalize(r, feature);
    } catch (const NumericalError&) {
      throw NumericalError("train: non-finite reservoir state at step " + std::to_string(t + 1));
    }
    if (!detail::finite_all(feature)) {
      throw NumericalError("train: non-finite generalized state at step " + std::to_string(t + 1));
    }
    acc.add(feature, traj.row(t + 1));
  }
  return acc.solve(machine.ridge());
}

/// Synchronize open-loop on `warmup`, then feed each prediction back as the
/// next input for `n_steps`. The first predicted row continues directly
/// after the last warm-up row.
template <ReservoirMachine M>
Prediction predict(const M& machine, const Readout& readout, const Trajectory& warmup, std::size_t n_steps) {
  if (warmup.empty()) throw ConfigError("predict: warm-up trajectory is empty");
  if (warmup.dim() != machine.input_dim() || readout.outputs != machine.input_dim() ||
      readout.features != machine.feature_dim()) {
    throw ConfigError("predict: readout/machine/warm-up shapes disagree");
  }
  const std::size_t dim = machine.input_dim();
  std::vector<double> r(machine.state_dim(), 0.0);
  std::vector<double> scratch(machine.state_dim());
  std::vector<double> feature(machine.feature_dim());
  for (std::size_t t = 0; t < warmup.size(); ++t) machine.advance(r, warmup.row(t), scratch);

  Prediction out;
  std::vector<double> data;
  data.reserve(n_steps * dim);
  std::vector<double> x(dim);
  for (std::size_t s = 0; s < n_steps; ++s) {
    bool ok = detail::finite_all(r);
    if (ok) {
      machine.generalize(r, feature);
      readout.apply(feature, x);
      for (double v : x) ok = ok && std::isfinite(v) && std::fabs(v) < kPredictionBound;
    }
    if (!ok) {
      out.diverged = true;
      out.diverged_at = s;
      break;
    }
    data.insert(data.end(), x.begin(), x.end());
    if (s + 1 < n_steps) machine.advance(r, x, scratch);
  }
  out.trajectory = data.empty() ? Trajectory::empty(dim, warmup.dt()) : Trajectory(std::move(data), dim, warmup.dt());
  return out;
}

}  // namespace fracrc
