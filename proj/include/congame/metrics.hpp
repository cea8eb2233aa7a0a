#pragma once

#include <vector>

#include "congame/engine.hpp"
#include "congame/types.hpp"

namespace congame {

enum class MetricKind { anccvc, weighted_ccv, ergodic_violation };

struct MetricSeries {
  MetricKind kind = MetricKind::anccvc;
  std::vector<Index> t;
  std::vector<double> value;
};

/// Averaged norm of the clipped cumulative constraint violation:
///   || [ sum_{tau<t} (A X_tau - b) ]_+ ||_2 / t ,
/// clipping applied after the (compensated) summation. 1 <= t <= steps().
double anccvc(const Trajectory& traj, Index t);

/// The same for every prefix, computed in one O(T R) pass.
MetricSeries anccvc_series(const Trajectory& traj);

/// || [ sum_{tau<t} gamma_tau (A X_tau - b) ]_+ ||_2^2 (squared, not
/// normalized); the quantity the congestion bound controls.
double weighted_ccv(const Trajectory& traj, Index t);
MetricSeries weighted_ccv_series(const Trajectory& traj);

/// Step-weighted ergodic average sum gamma_tau X_tau / sum gamma_tau over
/// tau < t.
Vector ergodic_average(const Trajectory& traj, Index t);

/// || [ A xbar_t - b ]_+ ||_2 of the ergodic average.
double ergodic_violation(const Trajectory& traj, Index t, const ResourceConstraints& rc);

/// Least-squares slope of log(value) against log(horizon). All values must
/// be positive.
double decay_fit(const std::vector<double>& horizons, const std::vector<double>& values);

/// Prefix sums sum_{tau<t} gamma_tau <X_tau - x_ref, xi_tau>; zero-mean
/// under zero-mean noise. Needs a trajectory recorded with noise.
Vector pairing_martingale_series(const Trajectory& traj, const VectorRef& x_ref);

/// Prefix sums sum_{tau<t} gamma_tau^2 ||xi_tau||_*^2 in the product dual
/// norm of `game`.
Vector noise_energy_series(const Trajectory& traj, const GameSpec& game);

}  // namespace congame
