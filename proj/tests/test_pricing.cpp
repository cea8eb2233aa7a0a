#include <doctest.h>

#include <cmath>

#include "congame/pricing.hpp"
#include "congame/rng.hpp"

using namespace congame;

TEST_CASE("schedules evaluate as declared") {
  const auto c = Schedule::Constant(0.3);
  CHECK(c.at(0) == 0.3);
  CHECK(c.at(1000) == 0.3);

  const auto p = Schedule::PowerLaw(2.0, 0.5);
  CHECK(p.at(4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.at(100) == doctest::Approx(0.2).epsilon(1e-14));
  // step 0 is clamped to step 1, keeping the first value finite
  CHECK(p.at(0) == p.at(1));
  CHECK(p.at(1) == 2.0);
}

TEST_CASE("schedule set range validation") {
  ScheduleSet s{Schedule::Constant(0.1), Schedule::Constant(0.2), Schedule::Constant(0.0),
                Schedule::Constant(2.0)};
  CHECK_NOTHROW(s.validate_at(0));

  s.gamma = Schedule::Constant(0.0);
  CHECK_THROWS_AS(s.validate_at(0), InvalidArgument);
  s.gamma = Schedule::Constant(0.1);

  s.zeta = Schedule::Constant(1.0);
  CHECK_THROWS_AS(s.validate_at(0), InvalidArgument);
  s.zeta = Schedule::Constant(0.2);

  s.eta = Schedule::Constant(1.5);
  CHECK_THROWS_AS(s.validate_at(0), InvalidArgument);
  s.eta = Schedule::Constant(1.0);
  CHECK_NOTHROW(s.validate_at(0));

  s.beta = Schedule::Constant(-0.5);
  CHECK_THROWS_AS(s.validate_at(0), InvalidArgument);

  // a growing power law can leave (0,1) later even if step 0 passes
  s.beta = Schedule::Constant(2.0);
  s.zeta = Schedule::PowerLaw(0.5, -0.5);  // 0.5 sqrt(t)
  CHECK_NOTHROW(s.validate_at(1));
  CHECK_THROWS_AS(s.validate_at(9), InvalidArgument);
}

TEST_CASE("price update clips after the convex step") {
  PriceState s = PriceState::Zero(2, 2.0);
  CHECK(s.prices.norm() == 0.0);
  CHECK(s.effective.norm() == 0.0);

  Vector phi(2);
  phi << -1.0, 0.5;
  const PriceState s1 = update_price(s, phi, 0.1, 0.5, 2.0);
  CHECK(s1.prices[0] == 0.0);  // negative load cannot push below zero
  CHECK(s1.prices[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(s1.effective[1] == doctest::Approx(0.5).epsilon(1e-14));

  phi << 0.2, -10.0;
  const PriceState s2 = update_price(s1, phi, 0.25, 0.5, 3.0);
  // (1-eta) 0 + 0.5*0.2 = 0.1 ; (1-eta) 0.25 - 5 clipped to 0
  CHECK(s2.prices[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(s2.prices[1] == 0.0);
  CHECK(s2.effective[0] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("price update validates ranges") {
  PriceState s = PriceState::Zero(1, 2.0);
  Vector phi(1);
  phi << 1.0;
  CHECK_THROWS_AS(update_price(s, phi, -0.1, 0.5, 2.0), InvalidArgument);
  CHECK_THROWS_AS(update_price(s, phi, 0.1, 1.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(update_price(s, phi, 0.1, 0.5, -1.0), InvalidArgument);
  CHECK_THROWS_AS(update_price(s, Vector::Zero(2), 0.1, 0.5, 2.0), DimensionError);
}

TEST_CASE("prices stay nonnegative under random updates") {
  RngStream rng(11);
  PriceState s = PriceState::Zero(3, 2.0);
  for (int t = 0; t < 5000; ++t) {
    Vector phi(3);
    for (int r = 0; r < 3; ++r) phi[r] = 10.0 * rng.gaussian();
    s = update_price(s, phi, 0.3 * rng.uniform(), 0.01 + 0.8 * rng.uniform(), 2.0);
    CHECK(s.prices.minCoeff() >= 0.0);
    CHECK((s.effective - 2.0 * s.prices).norm() == 0.0);
  }
}

TEST_CASE("score update applies priced gradient") {
  Matrix A(2, 3);
  A << 1, 0, 2, 0, 1, 1;
  Vector y(3), v(3), lam(2);
  y << 1, 2, 3;
  v << 0.5, -0.5, 1.0;
  lam << 2.0, 1.0;
  const Vector y2 = score_update(y, v, lam, A, 0.5);
  // A' lam = (2, 1, 5); y + 0.5 (v - A' lam)
  CHECK(y2[0] == doctest::Approx(1 + 0.5 * (0.5 - 2)).epsilon(1e-14));
  CHECK(y2[1] == doctest::Approx(2 + 0.5 * (-0.5 - 1)).epsilon(1e-14));
  CHECK(y2[2] == doctest::Approx(3 + 0.5 * (1 - 5)).epsilon(1e-14));

  CHECK_THROWS_AS(score_update(y, v, lam, A, 0.0), InvalidArgument);
  CHECK_THROWS_AS(score_update(y, Vector::Zero(2), lam, A, 0.5), DimensionError);
  CHECK_THROWS_AS(score_update(y, v, Vector::Zero(3), A, 0.5), DimensionError);
}

TEST_CASE("schedule json round trip") {
  const auto c = Schedule::Constant(0.25);
  const auto c2 = Schedule::from_json(c.to_json());
  CHECK(c2.kind() == Schedule::Kind::constant);
  CHECK(c2.value() == 0.25);

  const auto p = Schedule::PowerLaw(0.05, 0.5);
  const auto p2 = Schedule::from_json(p.to_json());
  CHECK(p2.kind() == Schedule::Kind::power_law);
  CHECK(p2.value() == 0.05);
  CHECK(p2.exponent() == 0.5);
}
