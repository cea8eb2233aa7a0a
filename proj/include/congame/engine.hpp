#pragma once

#include <vector>

#include "congame/game.hpp"
#include "congame/mirror.hpp"
#include "congame/pricing.hpp"
#include "congame/types.hpp"

namespace congame {

struct RecordOptions {
  bool scores = true;  // keep per-step score vectors (needed for energies)
  bool noise = false;  // keep drawn noise (needed for martingale diagnostics)
};

struct SimConfig {
  GameSpec game;
  std::vector<Regularizer> regularizers;  // one per player, matching kinds
  ScheduleSet schedules;
  Index horizon = 0;
  std::uint64_t seed = 0;
  Vector initial_scores;  // empty = zeros
  Vector initial_prices;  // empty = zeros; must be elementwise >= 0
  RecordOptions record;

  void validate() const;
};

/// Mutable state between steps: scores Y_t and prices (Lambda_t, beta
/// pass-through applied).
struct EngineState {
  Vector scores;
  PriceState prices;
  Index t = 0;
};

/// Everything one step produces, indexed by the step that played it.
struct StepRecord {
  Index t = 0;
  Vector action, scores, prices, effective_prices, congestion, noise;
  double gamma = 0, eta = 0, zeta = 0, beta = 0;
};

/// Row t holds the state as played at step t: actions X_t = mirror(Y_t),
/// scores Y_t, prices Lambda_t, effective prices beta Lambda_t, congestion
/// A X_t - b, plus the schedule values used. `final_*` is the state after
/// the last update (step `steps()`).
struct Trajectory {
  Matrix actions, scores, prices, effective_prices, congestion, noise;
  Vector gamma, eta, zeta, beta;
  Vector final_scores, final_prices, final_effective;

  Index steps() const { return actions.rows(); }
};

EngineState initial_state(const SimConfig& cfg);

/// One step of the priced play/update loop:
///   X_t = mirror(Y_t); observe v_hat; Y_{t+1} = Y_t + gamma (v_hat - A' L~_t);
///   phi_t = A X_t - b;  L_{t+1} = [(1-eta) L_t + zeta phi_t]_+;
///   L~_{t+1} = beta_t L_{t+1}.
/// Throws NumericalError if the state stops being finite.
EngineState step(const EngineState& state, const SimConfig& cfg, RngStream& rng,
                 StepRecord* rec = nullptr);

/// Run `cfg.horizon` steps from the initial state, deterministically in
/// (cfg, cfg.seed). Horizon prefixes of longer runs coincide.
Trajectory run(const SimConfig& cfg);

/// Checks the recorded rows against the recurrences they claim to satisfy
/// (mirror consistency, congestion, price updates, nonnegativity). Throws on
/// the first violated row.
void validate_trajectory(const Trajectory& traj, const SimConfig& cfg, double tol = 1e-9);

/// E_t = F(x_ref, Y_t) + 0.5 ||Lambda_t - lambda_ref||^2 for every recorded
/// step; the Lyapunov-style quantity tracked by the stability analysis.
Vector energy_diagnostic(const Trajectory& traj, const VectorRef& x_ref,
                         const VectorRef& lambda_ref,
                         const std::vector<Regularizer>& regs);

}  // namespace congame
