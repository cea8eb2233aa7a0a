#pragma once

#include <nlohmann/json.hpp>

#include "congame/game.hpp"
#include "congame/types.hpp"

namespace congame {

/// Splittable quadratic game on simplices. Player i minimizes
///   J_i(x) = 0.5 x_i' Q x_i + x_i' C s(x) + c_i' x_i,
/// with s(x) the average action, so the payoff gradient is
///   v_i(x) = -( Q x_i + C s(x) + (1/N) C' x_i + c_i ).
/// Q is drawn once from `build_seed`: Q = 2 sqrt(G'G) + I with G iid
/// standard normal, which makes the game strongly monotone. Resources are
/// coordinates: row r of A charges usage 4 * sum_i x_i[r] against capacity
/// `capacity` (the default 16 = 4N/D is exactly tight at N=20, D=5).
struct QuadGameParams {
  Index n_players = 0;
  Index dim = 0;  // per-player dimension = number of resources
  Matrix Q;       // dim x dim, symmetric positive definite
  Matrix Cmat;    // dim x dim interaction weight
  Vector c;       // stacked per-player linear terms, length n*dim
  Matrix A;       // dim x (n*dim)
  Vector b;       // capacities
  std::uint64_t build_seed = 0;
  double capacity = 16.0;
};

QuadGameParams make_quad_params(Index n_players, Index dim, std::uint64_t build_seed,
                                double capacity = 16.0);

/// Blockwise gradient evaluation, O(n * dim^2).
Vector quad_gradient(const VectorRef& x, const QuadGameParams& p);

double quad_cost(Index player, const VectorRef& x, const QuadGameParams& p);

/// Dense linear part M of v(x) = M x + offset (offset = -c).
Matrix quad_gradient_matrix(const QuadGameParams& p);

/// Full GameSpec with simplex action sets, the affine gradient oracle and
/// the coordinate resource constraints. Noise defaults to none.
GameSpec make_quadratic_game(const QuadGameParams& p);
GameSpec make_quadratic_game(Index n_players, Index dim, std::uint64_t build_seed,
                             double capacity = 16.0);

nlohmann::json quad_params_to_json(const QuadGameParams& p);
QuadGameParams quad_params_from_json(const nlohmann::json& j);

}  // namespace congame
