#pragma once

#include <functional>
#include <optional>
#include <utility>

#include <nlohmann/json.hpp>

#include "congame/engine.hpp"
#include "congame/game.hpp"
#include "congame/mirror.hpp"
#include "congame/types.hpp"

namespace congame {

/// Structural constants of a priced game, in the product norm pairing
/// (primal = sum of block norms, dual = max of block dual norms):
///   C1: ||A' lambda||_* <= C1 ||lambda||_2
///   C2: max_x ||v(x)||_*
///   C3: max_x ||A x - b||_2
///   K : strong convexity of the product regularizer
///   delta_psi: sum over players of (max psi - min psi)
///   C_tilde1 = 2 (C2^2 / K + 2 C3^2)
///   C_tilde2: price-stability constant; defaults to 1, callers with a dual
///             solution should set ||lambda*||_2 + 1
///   sigma_star2: certified bound on E ||xi||_*^2 (NaN if unknown)
struct GameConstants {
  double C1 = 0, C2 = 0, C3 = 0;
  double K = 1;
  double delta_psi = 0;
  double C_tilde1 = 0;
  double C_tilde2 = 1;
  double sigma_star2 = 0;
};

/// Exact where vertex structure allows (simplex blocks, small vertex
/// products, shared coordinate constraints), certified upper bounds
/// otherwise. Requires the gradient's affine map.
GameConstants compute_constants(const GameSpec& game, const std::vector<Regularizer>& regs);

/// eta^2 - eta/4 + gamma^2 C1^2 / (4K) <= 0, evaluated in long double.
bool trackability_check(double gamma, double eta, const GameConstants& c);

/// The closed interval of eta passing the check at this gamma, or nullopt
/// if no eta does. Roots via the subtraction-free quadratic formula.
std::optional<std::pair<double, double>> eta_interval(double gamma, const GameConstants& c);

/// Largest gamma with a nonempty eta interval: sqrt(K) / (4 C1).
double gamma_threshold(const GameConstants& c);

/// True when the bound's hypotheses hold up to step t: beta == 2 and
/// zeta == gamma (rel. tol 1e-12) plus the trackability check at every
/// step < t. Reports the first failing step through `failing_step`.
bool violation_bound_applies(const ScheduleSet& schedules, Index t, const GameConstants& c,
                             Index* failing_step = nullptr);

/// Anytime bound on the squared clipped weighted congestion at step t.
/// Throws HypothesisError naming the first failing step when
/// violation_bound_applies does not hold. `noise_second_moment(tau)` is
/// E||xi_{tau+1}||_*^2; by default the certified sigma_star2 is used.
double violation_bound(Index t, const ScheduleSet& schedules, const GameConstants& c,
                       const std::function<double(Index)>& noise_second_moment = {});

struct KktResidual {
  double stationarity = 0;    // ||x - proj_X(x + v(x) - A'lambda)||_2
  double feasibility = 0;     // ||[A x - b]_+||_2
  double complementarity = 0; // |lambda . (A x - b)|
  double max_residual() const;
};

KktResidual kkt_residual(const VectorRef& x, const VectorRef& lambda, const GameSpec& game);

struct VIOptions {
  double tol = 1e-10;
  Index max_iters = 500000;
  double dual_cap = 0;  // 0 = choose from the game's constants
  std::uint64_t seed = 0x5eedcafe;
};

struct VISolution {
  Vector x_star, lambda_star;
  KktResidual residuals;
  Index iterations = 0;
  double dual_cap = 0;
};

/// Extragradient solver for the game's primal-dual variational problem on
/// X x [0, cap]^R: step sampled from local Lipschitz estimates, halved on
/// stalls; cap doubled (up to 10 times) whenever the dual hits it.
VISolution solve_constrained_vi(const GameSpec& game, const VIOptions& opts = {});

/// Certified bound on E||xi||_*^2 for the game's noise model; 0 for none,
/// sigma^2 min(D, 2 ln(2D) + 1) for iid Gaussian when every block is a
/// simplex, sigma^2 D otherwise. Throws for custom noise.
double noise_second_moment_bound(const GameSpec& game);

nlohmann::json constants_to_json(const GameConstants& c);
GameConstants constants_from_json(const nlohmann::json& j);
nlohmann::json vi_solution_to_json(const VISolution& s);

}  // namespace congame
