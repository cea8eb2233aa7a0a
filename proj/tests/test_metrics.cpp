#include <doctest.h>

#include <cmath>
#include <vector>

#include "congame/metrics.hpp"
#include "congame/quad_game.hpp"
#include "test_util.hpp"

using namespace congame;

namespace {

Trajectory from_congestion(const Matrix& phi, const Vector& gamma) {
  Trajectory traj;
  traj.congestion = phi;
  traj.actions = Matrix::Zero(phi.rows(), 1);  // steps() bookkeeping only
  traj.gamma = gamma;
  return traj;
}

Trajectory from_congestion(const Matrix& phi) {
  return from_congestion(phi, Vector::Ones(phi.rows()));
}

}  // namespace

TEST_CASE("averaged violation clips after summing, not per step") {
  Matrix phi(2, 2);
  phi << 1.0, -1.0,  //
      -0.5, 2.0;
  Trajectory traj = from_congestion(phi);
  // t=1: [(1,-1)]_+ = (1,0)
  CHECK(anccvc(traj, 1) == doctest::Approx(1.0).epsilon(1e-15));
  // t=2: cumulative (0.5, 1); per-step clipping would give (1, 2) instead
  CHECK(anccvc(traj, 2) == doctest::Approx(std::sqrt(1.25) / 2.0).epsilon(1e-15));

  const MetricSeries s = anccvc_series(traj);
  REQUIRE(s.t.size() == 2);
  CHECK(s.t[0] == 1);
  CHECK(s.t[1] == 2);
  CHECK(s.value[0] == doctest::Approx(anccvc(traj, 1)).epsilon(1e-15));
  CHECK(s.value[1] == doctest::Approx(anccvc(traj, 2)).epsilon(1e-15));
}

TEST_CASE("series agrees with pointwise evaluation on random data") {
  RngStream rng(91);
  Matrix phi(100, 3);
  for (Index i = 0; i < phi.rows(); ++i)
    for (Index j = 0; j < phi.cols(); ++j) phi(i, j) = rng.gaussian();
  Vector gamma(100);
  for (Index i = 0; i < gamma.size(); ++i) gamma[i] = 0.01 + rng.uniform();
  Trajectory traj = from_congestion(phi, gamma);

  const MetricSeries a = anccvc_series(traj);
  const MetricSeries w = weighted_ccv_series(traj);
  for (Index t = 1; t <= 100; t += 7) {
    CHECK(a.value[t - 1] == doctest::Approx(anccvc(traj, t)).epsilon(1e-13));
    CHECK(w.value[t - 1] == doctest::Approx(weighted_ccv(traj, t)).epsilon(1e-13));
  }
}

TEST_CASE("weighted violation uses the step sizes and squares the norm") {
  Matrix phi(2, 2);
  phi << -1.0, 3.0,  //
      0.25, 1.0;
  Vector gamma(2);
  gamma << 0.5, 2.0;
  Trajectory traj = from_congestion(phi, gamma);
  // 0.5(-1,3) + 2(0.25,1) = (0, 3.5); clipped norm^2 = 12.25
  CHECK(weighted_ccv(traj, 2) == doctest::Approx(12.25).epsilon(1e-15));
  CHECK(weighted_ccv(traj, 1) == doctest::Approx(0.5 * 0.5 * 9.0).epsilon(1e-15));
}

TEST_CASE("cumulative sums survive catastrophic cancellation") {
  Matrix phi(3, 1);
  phi << 1e16, 1.0, -1e16;
  Trajectory traj = from_congestion(phi);
  // naive left-to-right double addition loses the 1.0 entirely
  CHECK(anccvc(traj, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(anccvc_series(traj).value[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("compensated prefix sums match long double re-summation") {
  RngStream rng(123);
  const Index T = 10000;
  Matrix phi(T, 2);
  for (Index i = 0; i < T; ++i) {
    phi(i, 0) = rng.gaussian() * std::exp(4.0 * rng.uniform() - 2.0);
    phi(i, 1) = rng.gaussian();
  }
  Trajectory traj = from_congestion(phi);
  const MetricSeries s = anccvc_series(traj);

  long double acc0 = 0, acc1 = 0;
  for (Index t = 1; t <= T; ++t) {
    acc0 += (long double)phi(t - 1, 0);
    acc1 += (long double)phi(t - 1, 1);
    if (t % 997 != 0 && t != T) continue;
    const long double c0 = acc0 > 0 ? acc0 : 0, c1 = acc1 > 0 ? acc1 : 0;
    const double want = (double)(sqrtl(c0 * c0 + c1 * c1) / t);
    CHECK(s.value[t - 1] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("ergodic average weights actions by step size") {
  Trajectory traj;
  traj.actions = Matrix(2, 2);
  traj.actions << 1.0, 0.0,  //
      0.0, 1.0;
  traj.congestion = Matrix::Zero(2, 1);
  traj.gamma = Vector(2);
  traj.gamma << 1.0, 3.0;
  const Vector avg = ergodic_average(traj, 2);
  CHECK(avg[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(avg[1] == doctest::Approx(0.75).epsilon(1e-15));

  ResourceConstraints rc;
  rc.A = Matrix::Identity(2, 2);
  rc.b = Vector::Constant(2, 0.5);
  // [avg - b]_+ = (0, 0.25)
  CHECK(ergodic_violation(traj, 2, rc) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("ergodic average of a real run stays in the simplex product") {
  GameSpec g = make_quadratic_game(3, 2, 11, 6.0);
  SimConfig cfg;
  cfg.game = g;
  cfg.regularizers = regularizers_for(g);
  cfg.schedules = ScheduleSet{Schedule::PowerLaw(0.05, 0.5), Schedule::Constant(0.05),
                              Schedule::Constant(0.02), Schedule::Constant(2.0)};
  cfg.horizon = 200;
  cfg.seed = 31;
  const Trajectory traj = run(cfg);
  const Vector avg = ergodic_average(traj, 200);
  CHECK(g.contains(avg, 1e-9));
}

TEST_CASE("decay fit recovers exact power laws") {
  std::vector<double> horizons = {100, 200, 400, 800};
  std::vector<double> half, flat;
  for (double T : horizons) {
    half.push_back(3.0 * std::pow(T, -0.5));
    flat.push_back(7.5);
  }
  CHECK(decay_fit(horizons, half) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(decay_fit(horizons, flat) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(decay_fit({100}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(decay_fit({100, 200}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(decay_fit({100, 200}, {1.0, -2.0}), InvalidArgument);
  CHECK_THROWS_AS(decay_fit({100, 100}, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("pairing martingale is empirically centered under iid noise") {
  GameSpec g = make_quadratic_game(2, 2, 17, 6.0);
  g.noise = NoiseModel::Gaussian(2.0);
  SimConfig cfg;
  cfg.game = g;
  cfg.regularizers = regularizers_for(g);
  cfg.schedules = ScheduleSet{Schedule::Constant(0.05), Schedule::Constant(0.05),
                              Schedule::Constant(0.02), Schedule::Constant(2.0)};
  cfg.horizon = 60;
  cfg.record.noise = true;
  Vector x_ref = Vector::Constant(4, 0.5);

  const int reps = 4000;
  const Index t_probe = 60;
  double mean = 0, m2 = 0;
  for (int r = 0; r < reps; ++r) {
    cfg.seed = derive_seed(555, (std::uint64_t)r);
    const Trajectory traj = run(cfg);
    const Vector m = pairing_martingale_series(traj, x_ref);
    const double v = m[t_probe - 1];
    const double d = v - mean;
    mean += d / (r + 1);
    m2 += d * (v - mean);
  }
  const double se = std::sqrt(m2 / (reps - 1) / reps);
  CHECK(std::abs(mean) <= 4.0 * se + 1e-12);
}

TEST_CASE("noise energy series uses the product dual norm") {
  GameSpec g = make_quadratic_game(2, 2, 17, 6.0);
  Trajectory traj;
  traj.actions = Matrix::Zero(2, 4);
  traj.congestion = Matrix::Zero(2, 2);
  traj.gamma = Vector(2);
  traj.gamma << 0.5, 2.0;
  traj.noise = Matrix(2, 4);
  traj.noise << 1.0, -2.0, 0.5, 0.5,  //
      0.0, 0.0, 3.0, -4.0;
  // simplex blocks pair with the sup norm; the product dual takes the max
  const Vector e = noise_energy_series(traj, g);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == doctest::Approx(0.25 * 4.0).epsilon(1e-14));
  CHECK(e[1] == doctest::Approx(0.25 * 4.0 + 4.0 * 16.0).epsilon(1e-14));
}

TEST_CASE("metric argument validation") {
  Matrix phi(2, 2);
  phi << 1.0, -1.0, -0.5, 2.0;
  Trajectory traj = from_congestion(phi);
  CHECK_THROWS_AS(anccvc(traj, 0), InvalidArgument);
  CHECK_THROWS_AS(anccvc(traj, 3), InvalidArgument);
  CHECK_THROWS_AS(weighted_ccv(traj, 5), InvalidArgument);
  Trajectory no_noise = traj;
  CHECK_THROWS_AS(pairing_martingale_series(no_noise, Vector::Zero(1)), InvalidArgument);
}
