#include "congame/pricing.hpp"

#include <cmath>

namespace congame {

nlohmann::json Schedule::to_json() const {
  if (kind_ == Kind::constant) return {{"kind", "constant"}, {"value", value_}};
  return {{"kind", "power_law"}, {"coeff", value_}, {"exponent", exponent_}};
}

Schedule Schedule::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return Constant(j.at("value").get<double>());
  if (kind == "power_law")
    return PowerLaw(j.at("coeff").get<double>(), j.at("exponent").get<double>());
  throw InvalidArgument("unknown schedule kind '" + kind + "'");
}

void ScheduleSet::validate_at(Index t) const {
  const double g = gamma.at(t), z = zeta.at(t), e = eta.at(t), b = beta.at(t);
  if (!(g > 0)) throw InvalidArgument("gamma must be positive (step " + std::to_string(t) + ")");
  if (!(z > 0 && z < 1))
    throw InvalidArgument("zeta must lie in (0,1) (step " + std::to_string(t) + ")");
  if (!(e >= 0 && e <= 1))
    throw InvalidArgument("eta must lie in [0,1] (step " + std::to_string(t) + ")");
  if (!(b >= 0)) throw InvalidArgument("beta must be nonnegative (step " + std::to_string(t) + ")");
}

PriceState PriceState::Zero(Index n_resources, double beta0) {
  PriceState s;
  s.prices = Vector::Zero(n_resources);
  s.effective = beta0 * s.prices;
  return s;
}

PriceState update_price(const PriceState& state, const VectorRef& phi, double eta_t,
                        double zeta_t, double beta_t) {
  if (phi.size() != state.prices.size())
    throw DimensionError("congestion vector", state.prices.size(), phi.size());
  if (!(eta_t >= 0 && eta_t <= 1)) throw InvalidArgument("eta outside [0,1]");
  if (!(zeta_t > 0 && zeta_t < 1)) throw InvalidArgument("zeta outside (0,1)");
  if (!(beta_t >= 0)) throw InvalidArgument("beta must be nonnegative");
  PriceState next;
  next.prices = ((1.0 - eta_t) * state.prices + zeta_t * phi).cwiseMax(0.0);
  next.effective = beta_t * next.prices;
  return next;
}

Vector score_update(const VectorRef& scores, const VectorRef& v_hat,
                    const VectorRef& effective_prices, const MatrixRef& A,
                    double gamma_t) {
  if (v_hat.size() != scores.size())
    throw DimensionError("payoff gradient", scores.size(), v_hat.size());
  if (A.cols() != scores.size()) throw DimensionError("constraint matrix", scores.size(), A.cols());
  if (effective_prices.size() != A.rows())
    throw DimensionError("effective prices", A.rows(), effective_prices.size());
  if (!(gamma_t > 0)) throw InvalidArgument("gamma must be positive");
  return scores + gamma_t * (v_hat - A.transpose() * effective_prices);
}

}  // namespace congame
