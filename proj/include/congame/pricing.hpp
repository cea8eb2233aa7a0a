#pragma once

#include <nlohmann/json.hpp>

#include "congame/errors.hpp"
#include "congame/types.hpp"

namespace congame {

/// Step-size / weight schedule: either a constant c or c * t^(-p).
/// Power laws are evaluated at max(t, 1) so the step-0 value is finite.
class Schedule {
 public:
  enum class Kind { constant, power_law };

  static Schedule Constant(double value) { return Schedule(Kind::constant, value, 0.0); }
  static Schedule PowerLaw(double coeff, double exponent) {
    return Schedule(Kind::power_law, coeff, exponent);
  }

  double at(Index t) const {
    if (kind_ == Kind::constant) return value_;
    return value_ * std::pow(double(std::max<Index>(t, 1)), -exponent_);
  }

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  double exponent() const { return exponent_; }
  bool is_constant() const { return kind_ == Kind::constant || exponent_ == 0.0; }

  nlohmann::json to_json() const;
  static Schedule from_json(const nlohmann::json& j);

 private:
  Schedule(Kind k, double v, double e) : kind_(k), value_(v), exponent_(e) {}
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  double exponent_ = 0.0;
};

/// The four schedules of one run: agent step gamma, price step zeta,
/// price discount eta, price pass-through beta.
struct ScheduleSet {
  Schedule gamma = Schedule::Constant(0.0);
  Schedule zeta = Schedule::Constant(0.0);
  Schedule eta = Schedule::Constant(0.0);
  Schedule beta = Schedule::Constant(0.0);

  /// gamma > 0, zeta in (0,1), eta in [0,1], beta >= 0 at step t.
  void validate_at(Index t) const;
};

/// Raw prices and the scaled prices the agents actually see.
struct PriceState {
  Vector prices;     // Lambda_t, elementwise >= 0
  Vector effective;  // beta_t * Lambda_t

  static PriceState Zero(Index n_resources, double beta0);
};

/// Lambda' = [(1 - eta) Lambda + zeta phi]_+ , effective' = beta Lambda',
/// where eta, zeta, beta are the step-t schedule values of the step that
/// produced phi.
PriceState update_price(const PriceState& state, const VectorRef& phi, double eta_t,
                        double zeta_t, double beta_t);

/// y' = y + gamma (v_hat - A^T lambda_eff): dual-averaging step on scores.
Vector score_update(const VectorRef& scores, const VectorRef& v_hat,
                    const VectorRef& effective_prices, const MatrixRef& A,
                    double gamma_t);

}  // namespace congame
