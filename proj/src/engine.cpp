#include "congame/engine.hpp"

#include <cmath>

#include "congame/errors.hpp"

namespace congame {

void SimConfig::validate() const {
  game.validate();
  if (static_cast<Index>(regularizers.size()) != game.n_players)
    throw DimensionError("regularizers", game.n_players,
                         static_cast<Index>(regularizers.size()));
  for (Index i = 0; i < game.n_players; ++i) {
    if (regularizers[i].dimension() != game.dims[i])
      throw DimensionError("regularizer of player " + std::to_string(i), game.dims[i],
                           regularizers[i].dimension());
    const auto kind = game.action_sets[i].kind;
    const auto rkind = regularizers[i].kind();
    const bool ok = (kind == ActionSetKind::simplex &&
                     rkind == RegularizerKind::entropy_simplex) ||
                    (kind == ActionSetKind::box &&
                     rkind == RegularizerKind::squared_euclidean_box);
    if (!ok)
      throw InvalidArgument("regularizer kind does not match action set of player " +
                            std::to_string(i));
  }
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
  if (!game.gradient.eval) throw InvalidArgument("game has no gradient oracle");
  if (initial_scores.size() != 0 && initial_scores.size() != game.total_dim())
    throw DimensionError("initial scores", game.total_dim(), initial_scores.size());
  if (initial_prices.size() != 0) {
    if (initial_prices.size() != game.resources.A.rows())
      throw DimensionError("initial prices", game.resources.A.rows(), initial_prices.size());
    if ((initial_prices.array() < 0).any())
      throw InvalidArgument("initial prices must be nonnegative");
  }
  schedules.validate_at(0);
}

EngineState initial_state(const SimConfig& cfg) {
  EngineState s;
  s.scores = cfg.initial_scores.size() ? cfg.initial_scores
                                       : Vector::Zero(cfg.game.total_dim());
  const Index r = cfg.game.resources.A.rows();
  s.prices.prices = cfg.initial_prices.size() ? cfg.initial_prices : Vector::Zero(r);
  s.prices.effective = cfg.schedules.beta.at(0) * s.prices.prices;
  s.t = 0;
  return s;
}

EngineState step(const EngineState& state, const SimConfig& cfg, RngStream& rng,
                 StepRecord* rec) {
  const Index t = state.t;
  cfg.schedules.validate_at(t);
  const double gamma = cfg.schedules.gamma.at(t);
  const double eta = cfg.schedules.eta.at(t);
  const double zeta = cfg.schedules.zeta.at(t);
  const double beta = cfg.schedules.beta.at(t);

  const Vector action = total_mirror(state.scores, cfg.regularizers);
  Vector xi;
  const Vector v_hat = noisy_gradient(action, cfg.game, rng, &xi);
  Vector next_scores =
      score_update(state.scores, v_hat, state.prices.effective, cfg.game.resources.A, gamma);
  const Vector phi = congestion(action, cfg.game.resources);
  PriceState next_prices = update_price(state.prices, phi, eta, zeta, beta);

  if (!all_finite(next_scores) || !all_finite(next_prices.prices))
    throw NumericalError("state diverged to non-finite values at step " + std::to_string(t));

  if (rec) {
    rec->t = t;
    rec->action = action;
    rec->scores = state.scores;
    rec->prices = state.prices.prices;
    rec->effective_prices = state.prices.effective;
    rec->congestion = phi;
    rec->noise = std::move(xi);
    rec->gamma = gamma;
    rec->eta = eta;
    rec->zeta = zeta;
    rec->beta = beta;
  }

  EngineState next;
  next.scores = std::move(next_scores);
  next.prices = std::move(next_prices);
  next.t = t + 1;
  return next;
}

Trajectory run(const SimConfig& cfg) {
  cfg.validate();
  const Index T = cfg.horizon;
  const Index d = cfg.game.total_dim();
  const Index r = cfg.game.resources.A.rows();

  Trajectory traj;
  traj.actions.resize(T, d);
  if (cfg.record.scores) traj.scores.resize(T, d);
  traj.prices.resize(T, r);
  traj.effective_prices.resize(T, r);
  traj.congestion.resize(T, r);
  if (cfg.record.noise) traj.noise.resize(T, d);
  traj.gamma.resize(T);
  traj.eta.resize(T);
  traj.zeta.resize(T);
  traj.beta.resize(T);

  RngStream rng(cfg.seed);
  EngineState state = initial_state(cfg);
  StepRecord rec;
  for (Index t = 0; t < T; ++t) {
    state = step(state, cfg, rng, &rec);
    traj.actions.row(t) = rec.action.transpose();
    if (cfg.record.scores) traj.scores.row(t) = rec.scores.transpose();
    traj.prices.row(t) = rec.prices.transpose();
    traj.effective_prices.row(t) = rec.effective_prices.transpose();
    traj.congestion.row(t) = rec.congestion.transpose();
    if (cfg.record.noise) traj.noise.row(t) = rec.noise.transpose();
    traj.gamma[t] = rec.gamma;
    traj.eta[t] = rec.eta;
    traj.zeta[t] = rec.zeta;
    traj.beta[t] = rec.beta;
  }
  traj.final_scores = state.scores;
  traj.final_prices = state.prices.prices;
  traj.final_effective = state.prices.effective;
  return traj;
}

void validate_trajectory(const Trajectory& traj, const SimConfig& cfg, double tol) {
  const Index T = traj.steps();
  const bool have_scores = traj.scores.rows() == T && T > 0;
  for (Index t = 0; t < T; ++t) {
    if (!all_finite(traj.actions.row(t)) || !all_finite(traj.prices.row(t)))
      throw NumericalError("non-finite trajectory row " + std::to_string(t));
    if (!cfg.game.contains(traj.actions.row(t).transpose(), tol))
      throw InvalidArgument("action at step " + std::to_string(t) +
                            " leaves the action sets");
    if ((traj.prices.row(t).array() < -tol).any())
      throw InvalidArgument("negative price at step " + std::to_string(t));
    if (have_scores) {
      const Vector expect =
          total_mirror(traj.scores.row(t).transpose(), cfg.regularizers);
      if ((expect - traj.actions.row(t).transpose()).lpNorm<Eigen::Infinity>() > tol)
        throw InvalidArgument("action/score mismatch at step " + std::to_string(t));
    }
    const Vector phi = congestion(traj.actions.row(t).transpose(), cfg.game.resources);
    if ((phi - traj.congestion.row(t).transpose()).lpNorm<Eigen::Infinity>() > tol)
      throw InvalidArgument("congestion mismatch at step " + std::to_string(t));
    const Vector lambda_next =
        ((1.0 - traj.eta[t]) * traj.prices.row(t).transpose() +
         traj.zeta[t] * traj.congestion.row(t).transpose())
            .cwiseMax(0.0);
    const Vector next = t + 1 < T ? Vector(traj.prices.row(t + 1).transpose())
                                  : traj.final_prices;
    if (next.size() && (lambda_next - next).lpNorm<Eigen::Infinity>() > tol)
      throw InvalidArgument("price recurrence fails at step " + std::to_string(t));
  }
}

Vector energy_diagnostic(const Trajectory& traj, const VectorRef& x_ref,
                         const VectorRef& lambda_ref,
                         const std::vector<Regularizer>& regs) {
  const Index T = traj.steps();
  if (traj.scores.rows() != T)
    throw InvalidArgument("energy diagnostic needs recorded scores");
  Vector e(T);
  for (Index t = 0; t < T; ++t) {
    const double coupling = total_fenchel_coupling(x_ref, traj.scores.row(t).transpose(), regs);
    const double price_term =
        0.5 * (traj.prices.row(t).transpose() - lambda_ref).squaredNorm();
    e[t] = coupling + price_term;
  }
  return e;
}

}  // namespace congame
