#include <doctest.h>

#include <cmath>

#include "congame/mirror.hpp"
#include "test_util.hpp"

using namespace congame;

TEST_CASE("entropy mirror map pinned values") {
  const auto reg = Regularizer::Entropy(3);
  Vector y(3);
  y << 1, 0, 0;
  const Vector x = mirror_map(y, reg);
  const double e = std::exp(1.0);
  CHECK(x[0] == doctest::Approx(e / (e + 2)).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0 / (e + 2)).epsilon(1e-14));
  CHECK(x[2] == doctest::Approx(1.0 / (e + 2)).epsilon(1e-14));

  // shift invariance and overflow safety
  Vector big(3);
  big << 1e6 + 1, 1e6, 1e6;
  const Vector xb = mirror_map(big, reg);
  CHECK(xb[0] == doctest::Approx(x[0]).epsilon(1e-12));
  CHECK(xb.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("coupling pinned value at simplex vertex") {
  const auto reg = Regularizer::Entropy(2);
  Vector p(2), y(2);
  p << 1, 0;
  y << 0, 0;
  CHECK(fenchel_coupling(p, y, reg) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("box mirror map clamps") {
  Vector lo(3), up(3);
  lo << -1, 0, 2;
  up << 1, 2, 3;
  const auto reg = Regularizer::SquaredEuclidean(lo, up);
  Vector y(3);
  y << -4, 1.5, 10;
  const Vector x = mirror_map(y, reg);
  CHECK(x[0] == -1.0);
  CHECK(x[1] == 1.5);
  CHECK(x[2] == 3.0);
}

TEST_CASE("psi ranges in closed form") {
  CHECK(Regularizer::Entropy(5).psi_range() == doctest::Approx(std::log(5.0)).epsilon(1e-14));

  Vector lo(2), up(2);
  lo << -1, 1;
  up << 2, 3;
  const auto reg = Regularizer::SquaredEuclidean(lo, up);
  // brute force over corners plus the zero clamp per coordinate
  double hi = -1e300, lo_v = 1e300;
  for (double a : {-1.0, 0.0, 2.0})
    for (double b : {1.0, 3.0}) {
      Vector x(2);
      x << a, b;
      const double v = 0.5 * x.squaredNorm();
      hi = std::max(hi, v);
      lo_v = std::min(lo_v, v);
    }
  CHECK(reg.psi_range() == doctest::Approx(hi - lo_v).epsilon(1e-14));
}

TEST_CASE("entropy mirror map agrees with an independent grid maximizer") {
  const auto reg = Regularizer::Entropy(3);
  RngStream rng(314);
  for (int trial = 0; trial < 60; ++trial) {
    const Vector y = testutil::random_uniform_vec(rng, 3, -1.0, 1.0);
    const Vector closed = mirror_map(y, reg);
    const Vector grid = testutil::grid_argmax_simplex3(
        [&](const Vector& x) { return y.dot(x) - reg.psi(x); });
    CHECK((closed - grid).lpNorm<1>() <= 2e-3);
  }
}

TEST_CASE("box mirror map agrees with a per-coordinate grid maximizer") {
  Vector lo(2), up(2);
  lo << -1, 0.5;
  up << 2, 1.5;
  const auto reg = Regularizer::SquaredEuclidean(lo, up);
  RngStream rng(217);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector y = testutil::random_uniform_vec(rng, 2, -4.0, 4.0);
    const Vector closed = mirror_map(y, reg);
    for (Index k = 0; k < 2; ++k) {
      double best_x = lo[k], best_v = -1e300;
      const int n = 40000;
      for (int i = 0; i <= n; ++i) {
        const double x = lo[k] + (up[k] - lo[k]) * double(i) / n;
        const double v = y[k] * x - 0.5 * x * x;
        if (v > best_v) {
          best_v = v;
          best_x = x;
        }
      }
      CHECK(std::abs(closed[k] - best_x) <= 2e-4);
    }
  }
}

TEST_CASE("coupling properties: nonnegativity and distance domination") {
  RngStream rng(808);

  SUBCASE("entropy") {
    const auto reg = Regularizer::Entropy(4);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector p = testutil::random_simplex(rng, 4);
      const Vector y = testutil::random_uniform_vec(rng, 4, -3.0, 3.0);
      const double f = fenchel_coupling(p, y, reg);
      CHECK(f >= 0.0);
      const Vector x = mirror_map(y, reg);
      const double d1 = (x - p).lpNorm<1>();
      CHECK(f + 1e-12 >= 0.5 * d1 * d1);
    }
  }

  SUBCASE("box") {
    Vector lo = -Vector::Ones(3), up = Vector::Ones(3);
    const auto reg = Regularizer::SquaredEuclidean(lo, up);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector p = testutil::random_uniform_vec(rng, 3, -1.0, 1.0);
      const Vector y = testutil::random_uniform_vec(rng, 3, -3.0, 3.0);
      const double f = fenchel_coupling(p, y, reg);
      CHECK(f >= 0.0);
      const Vector x = mirror_map(y, reg);
      CHECK(f + 1e-12 >= 0.5 * (x - p).squaredNorm());
    }
  }
}

TEST_CASE("one-step coupling inequality") {
  RngStream rng(555);

  SUBCASE("entropy, dual norm l-infinity") {
    const auto reg = Regularizer::Entropy(4);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector p = testutil::random_simplex(rng, 4);
      const Vector y = testutil::random_uniform_vec(rng, 4, -2.0, 2.0);
      const Vector dy = testutil::random_uniform_vec(rng, 4, -1.0, 1.0);
      const Vector y2 = y + dy;
      const double lhs = fenchel_coupling(p, y2, reg);
      const double rhs = fenchel_coupling(p, y, reg) + (mirror_map(y, reg) - p).dot(dy) +
                         0.5 * dy.lpNorm<Eigen::Infinity>() * dy.lpNorm<Eigen::Infinity>();
      CHECK(lhs <= rhs + 1e-10);
    }
  }

  SUBCASE("box, dual norm l2") {
    Vector lo = -Vector::Ones(3), up = 2.0 * Vector::Ones(3);
    const auto reg = Regularizer::SquaredEuclidean(lo, up);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector p = testutil::random_uniform_vec(rng, 3, -1.0, 2.0);
      const Vector y = testutil::random_uniform_vec(rng, 3, -3.0, 3.0);
      const Vector dy = testutil::random_uniform_vec(rng, 3, -1.0, 1.0);
      const double lhs = fenchel_coupling(p, y + dy, reg);
      const double rhs =
          fenchel_coupling(p, y, reg) + (mirror_map(y, reg) - p).dot(dy) + 0.5 * dy.squaredNorm();
      CHECK(lhs <= rhs + 1e-10);
    }
  }
}

TEST_CASE("blockwise totals match per-block values") {
  std::vector<Regularizer> regs;
  regs.push_back(Regularizer::Entropy(3));
  Vector lo = -Vector::Ones(2), up = Vector::Ones(2);
  regs.push_back(Regularizer::SquaredEuclidean(lo, up));

  RngStream rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    Vector y = testutil::random_uniform_vec(rng, 5, -2.0, 2.0);
    const Vector x = total_mirror(y, regs);
    CHECK((x.head(3) - mirror_map(y.head(3), regs[0])).norm() == 0.0);
    CHECK((x.tail(2) - mirror_map(y.tail(2), regs[1])).norm() == 0.0);

    Vector p(5);
    p.head(3) = testutil::random_simplex(rng, 3);
    p.tail(2) = testutil::random_uniform_vec(rng, 2, -1.0, 1.0);
    const double total = total_fenchel_coupling(p, y, regs);
    const double split = fenchel_coupling(p.head(3), y.head(3), regs[0]) +
                         fenchel_coupling(p.tail(2), y.tail(2), regs[1]);
    CHECK(total == doctest::Approx(split).epsilon(1e-14));
  }
}

TEST_CASE("mirror map input validation") {
  const auto reg = Regularizer::Entropy(3);
  Vector bad(3);
  bad << 1.0, std::numeric_limits<double>::infinity(), 0.0;
  CHECK_THROWS_AS(mirror_map(bad, reg), NumericalError);
  CHECK_THROWS_AS(mirror_map(Vector::Zero(2), reg), DimensionError);
  CHECK_THROWS_AS(regularizer_for(ActionSetDescriptor::PolytopeEnum(Matrix::Identity(2, 2))),
                  InvalidArgument);
}
