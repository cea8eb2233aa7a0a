#include <doctest.h>

#include <cmath>

#include "congame/engine.hpp"
#include "congame/quad_game.hpp"
#include "test_util.hpp"

using namespace congame;

namespace {

// One simplex player with a constant payoff gradient; everything is
// hand-checkable.
SimConfig tiny_config() {
  GameSpec g;
  g.n_players = 1;
  g.dims = {2};
  g.action_sets.push_back(ActionSetDescriptor::Simplex(2));
  g.resources.A = Matrix::Identity(2, 2);
  g.resources.b = Vector::Constant(2, 0.6);
  Vector off(2);
  off << 1.0, 0.0;
  g.gradient.affine = AffineMap{Matrix::Zero(2, 2), off};
  g.gradient.eval = [off](const VectorRef&) -> Vector { return off; };

  SimConfig cfg;
  cfg.game = g;
  cfg.regularizers = regularizers_for(g);
  cfg.schedules = ScheduleSet{Schedule::Constant(0.5), Schedule::Constant(0.3),
                              Schedule::Constant(0.1), Schedule::Constant(2.0)};
  cfg.horizon = 6;
  cfg.seed = 0;
  return cfg;
}

SimConfig quad_config(Index n, Index d, double capacity, double sigma, Index horizon,
                      std::uint64_t seed) {
  GameSpec g = make_quadratic_game(n, d, 42, capacity);
  if (sigma >= 0) g.noise = NoiseModel::Gaussian(sigma);
  SimConfig cfg;
  cfg.game = std::move(g);
  cfg.regularizers = regularizers_for(cfg.game);
  cfg.schedules = ScheduleSet{Schedule::Constant(0.05), Schedule::Constant(0.05),
                              Schedule::Constant(0.02), Schedule::Constant(2.0)};
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.record.noise = true;
  return cfg;
}

}  // namespace

TEST_CASE("the loop plays mirror, scores with current prices, then reprices") {
  SimConfig cfg = tiny_config();
  const Trajectory traj = run(cfg);

  Vector y = Vector::Zero(2);
  Vector lam = Vector::Zero(2), lam_eff = Vector::Zero(2);
  const Vector v = cfg.game.gradient.eval(Vector::Zero(2));
  for (Index t = 0; t < cfg.horizon; ++t) {
    const Vector x = softmax(y);
    CHECK((traj.actions.row(t).transpose() - x).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK((traj.scores.row(t).transpose() - y).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK((traj.prices.row(t).transpose() - lam).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK((traj.effective_prices.row(t).transpose() - lam_eff).lpNorm<Eigen::Infinity>() <=
          1e-14);

    const Vector phi = x - Vector::Constant(2, 0.6);
    CHECK((traj.congestion.row(t).transpose() - phi).lpNorm<Eigen::Infinity>() <= 1e-14);

    // scores advance with the prices *before* this step's price update
    y = y + 0.5 * (v - cfg.game.resources.A.transpose() * lam_eff);
    lam = (0.9 * lam + 0.3 * phi).cwiseMax(0.0);
    lam_eff = 2.0 * lam;
  }
  CHECK((traj.final_scores - y).lpNorm<Eigen::Infinity>() <= 1e-14);
  CHECK((traj.final_prices - lam).lpNorm<Eigen::Infinity>() <= 1e-14);

  // the price series must start moving only after the first positive load
  CHECK(traj.prices.row(0).norm() == 0.0);
  CHECK(traj.gamma.isConstant(0.5));
  CHECK(traj.zeta.isConstant(0.3));
  CHECK(traj.eta.isConstant(0.1));
  CHECK(traj.beta.isConstant(2.0));
}

TEST_CASE("runs are deterministic and prefix-stable") {
  SimConfig cfg = quad_config(3, 2, 6.0, 1.5, 80, 2024);
  const Trajectory a = run(cfg);
  const Trajectory b = run(cfg);
  CHECK((a.actions - b.actions).norm() == 0.0);
  CHECK((a.noise - b.noise).norm() == 0.0);
  CHECK((a.prices - b.prices).norm() == 0.0);

  SimConfig longer = cfg;
  longer.horizon = 160;
  const Trajectory c = run(longer);
  CHECK((c.actions.topRows(80) - a.actions).norm() == 0.0);
  CHECK((c.prices.topRows(80) - a.prices).norm() == 0.0);
}

TEST_CASE("recorded noise reconstructs the score recurrence") {
  SimConfig cfg = quad_config(2, 3, 8.0, 2.0, 50, 7);
  const Trajectory traj = run(cfg);
  const Matrix At = cfg.game.resources.A.transpose();
  for (Index t = 0; t < traj.steps(); ++t) {
    const Vector x = traj.actions.row(t).transpose();
    const Vector expected_next =
        traj.scores.row(t).transpose() +
        traj.gamma[t] * (cfg.game.gradient.eval(x) + traj.noise.row(t).transpose() -
                         At * traj.effective_prices.row(t).transpose());
    const Vector actual_next = t + 1 < traj.steps()
                                   ? Vector(traj.scores.row(t + 1).transpose())
                                   : traj.final_scores;
    CHECK((expected_next - actual_next).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("zero-sigma gaussian plays the same actions as no noise") {
  SimConfig a = quad_config(3, 2, 6.0, 0.0, 60, 5);
  SimConfig b = quad_config(3, 2, 6.0, -1, 60, 5);  // sigma < 0 keeps kind none
  CHECK(b.game.noise.kind == NoiseKind::none);
  const Trajectory ta = run(a);
  const Trajectory tb = run(b);
  CHECK((ta.actions - tb.actions).norm() == 0.0);
  CHECK((ta.prices - tb.prices).norm() == 0.0);
}

TEST_CASE("trajectory validation accepts runs and rejects tampering") {
  SimConfig cfg = quad_config(3, 2, 6.0, 1.0, 40, 9);
  Trajectory traj = run(cfg);
  CHECK_NOTHROW(validate_trajectory(traj, cfg));

  Trajectory broken = traj;
  broken.prices(20, 0) += 0.5;
  CHECK_THROWS_AS(validate_trajectory(broken, cfg), InvalidArgument);

  broken = traj;
  broken.congestion(5, 1) -= 0.25;
  CHECK_THROWS_AS(validate_trajectory(broken, cfg), InvalidArgument);

  broken = traj;
  broken.actions(3, 0) += 0.2;
  CHECK_THROWS_AS(validate_trajectory(broken, cfg), InvalidArgument);
}

TEST_CASE("initial prices pass through the step-zero beta") {
  SimConfig cfg = tiny_config();
  Vector lam0(2);
  lam0 << 1.0, 2.0;
  cfg.initial_prices = lam0;
  const Trajectory traj = run(cfg);
  CHECK(traj.prices(0, 0) == 1.0);
  CHECK(traj.prices(0, 1) == 2.0);
  CHECK(traj.effective_prices(0, 0) == 2.0);
  CHECK(traj.effective_prices(0, 1) == 4.0);
}

TEST_CASE("energy diagnostic matches a manual evaluation") {
  SimConfig cfg = quad_config(2, 2, 6.0, 0.5, 30, 3);
  const Trajectory traj = run(cfg);
  Vector x_ref(4);
  x_ref << 0.5, 0.5, 0.25, 0.75;
  Vector lam_ref(2);
  lam_ref << 0.1, 0.0;
  const Vector e = energy_diagnostic(traj, x_ref, lam_ref, cfg.regularizers);
  REQUIRE(e.size() == 30);
  for (Index t : {Index(0), Index(12), Index(29)}) {
    const double manual =
        total_fenchel_coupling(x_ref, traj.scores.row(t).transpose(), cfg.regularizers) +
        0.5 * (traj.prices.row(t).transpose() - lam_ref).squaredNorm();
    CHECK(e[t] == doctest::Approx(manual).epsilon(1e-14));
  }
  CHECK(e.minCoeff() >= 0.0);
}

TEST_CASE("divergence is reported, not propagated as NaN") {
  SimConfig cfg = tiny_config();
  Vector huge(2);
  huge << 1e308, 0.0;
  cfg.game.gradient.eval = [huge](const VectorRef&) -> Vector { return huge; };
  cfg.game.gradient.affine.reset();
  cfg.horizon = 10;
  CHECK_THROWS_AS(run(cfg), NumericalError);
}

TEST_CASE("config validation") {
  SimConfig cfg = tiny_config();
  cfg.horizon = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);

  cfg = tiny_config();
  cfg.initial_prices = Vector::Constant(2, -0.5);
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);

  cfg = tiny_config();
  cfg.regularizers.clear();
  CHECK_THROWS_AS(cfg.validate(), DimensionError);

  cfg = tiny_config();
  Vector lo = Vector::Zero(2), up = Vector::Ones(2);
  cfg.regularizers[0] = Regularizer::SquaredEuclidean(lo, up);
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
