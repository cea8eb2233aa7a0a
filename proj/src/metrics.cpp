#include "congame/metrics.hpp"

#include <cmath>

#include "congame/errors.hpp"

namespace congame {

namespace {

void check_t(const Trajectory& traj, Index t) {
  if (t < 1 || t > traj.steps())
    throw InvalidArgument("metric prefix length " + std::to_string(t) +
                          " outside [1, " + std::to_string(traj.steps()) + "]");
}

}  // namespace

double anccvc(const Trajectory& traj, Index t) {
  check_t(traj, t);
  CompensatedVectorSum acc(traj.congestion.cols());
  for (Index tau = 0; tau < t; ++tau) acc.add(traj.congestion.row(tau).transpose());
  return acc.value().cwiseMax(0.0).norm() / double(t);
}

MetricSeries anccvc_series(const Trajectory& traj) {
  MetricSeries s;
  s.kind = MetricKind::anccvc;
  const Index T = traj.steps();
  s.t.reserve(T);
  s.value.reserve(T);
  CompensatedVectorSum acc(traj.congestion.cols());
  for (Index t = 0; t < T; ++t) {
    acc.add(traj.congestion.row(t).transpose());
    s.t.push_back(t + 1);
    s.value.push_back(acc.value().cwiseMax(0.0).norm() / double(t + 1));
  }
  return s;
}

double weighted_ccv(const Trajectory& traj, Index t) {
  check_t(traj, t);
  CompensatedVectorSum acc(traj.congestion.cols());
  for (Index tau = 0; tau < t; ++tau)
    acc.add_scaled(traj.gamma[tau], traj.congestion.row(tau).transpose());
  return acc.value().cwiseMax(0.0).squaredNorm();
}

MetricSeries weighted_ccv_series(const Trajectory& traj) {
  MetricSeries s;
  s.kind = MetricKind::weighted_ccv;
  const Index T = traj.steps();
  CompensatedVectorSum acc(traj.congestion.cols());
  for (Index t = 0; t < T; ++t) {
    acc.add_scaled(traj.gamma[t], traj.congestion.row(t).transpose());
    s.t.push_back(t + 1);
    s.value.push_back(acc.value().cwiseMax(0.0).squaredNorm());
  }
  return s;
}

Vector ergodic_average(const Trajectory& traj, Index t) {
  check_t(traj, t);
  CompensatedVectorSum acc(traj.actions.cols());
  CompensatedSum mass;
  for (Index tau = 0; tau < t; ++tau) {
    acc.add_scaled(traj.gamma[tau], traj.actions.row(tau).transpose());
    mass.add(traj.gamma[tau]);
  }
  if (!(mass.value() > 0)) throw InvalidArgument("ergodic average needs positive step mass");
  return acc.value() / mass.value();
}

double ergodic_violation(const Trajectory& traj, Index t, const ResourceConstraints& rc) {
  return congestion(ergodic_average(traj, t), rc).cwiseMax(0.0).norm();
}

double decay_fit(const std::vector<double>& horizons, const std::vector<double>& values) {
  if (horizons.size() != values.size() || horizons.size() < 2)
    throw InvalidArgument("decay fit needs at least two (horizon, value) pairs");
  const size_t n = horizons.size();
  double mx = 0, my = 0;
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(horizons[i] > 0) || !(values[i] > 0))
      throw InvalidArgument("decay fit needs positive horizons and values");
    lx[i] = std::log(horizons[i]);
    ly[i] = std::log(values[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0) throw InvalidArgument("decay fit needs at least two distinct horizons");
  return sxy / sxx;
}

Vector pairing_martingale_series(const Trajectory& traj, const VectorRef& x_ref) {
  const Index T = traj.steps();
  if (traj.noise.rows() != T)
    throw InvalidArgument("martingale series needs a trajectory recorded with noise");
  if (x_ref.size() != traj.actions.cols())
    throw DimensionError("reference point", traj.actions.cols(), x_ref.size());
  Vector out(T);
  CompensatedSum acc;
  for (Index t = 0; t < T; ++t) {
    const double inc =
        traj.gamma[t] * (traj.actions.row(t).transpose() - x_ref).dot(traj.noise.row(t));
    acc.add(inc);
    out[t] = acc.value();
  }
  return out;
}

Vector noise_energy_series(const Trajectory& traj, const GameSpec& game) {
  const Index T = traj.steps();
  if (traj.noise.rows() != T)
    throw InvalidArgument("noise energy series needs a trajectory recorded with noise");
  Vector out(T);
  CompensatedSum acc;
  for (Index t = 0; t < T; ++t) {
    const double d = product_dual_norm(game, traj.noise.row(t).transpose());
    acc.add(traj.gamma[t] * traj.gamma[t] * d * d);
    out[t] = acc.value();
  }
  return out;
}

}  // namespace congame
