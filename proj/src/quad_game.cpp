#include "congame/quad_game.hpp"

#include <cmath>

#include "congame/errors.hpp"
#include "congame/rng.hpp"
#include "congame/serialize.hpp"

namespace congame {

QuadGameParams make_quad_params(Index n_players, Index dim, std::uint64_t build_seed,
                                double capacity) {
  if (n_players < 1 || dim < 1) throw InvalidArgument("need n_players >= 1 and dim >= 1");
  if (!(capacity > 0)) throw InvalidArgument("capacity must be positive");

  QuadGameParams p;
  p.n_players = n_players;
  p.dim = dim;
  p.build_seed = build_seed;
  p.capacity = capacity;

  // G filled row by row so the draw order is part of the contract.
  RngStream rng(build_seed);
  Matrix G(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) G(r, c) = rng.gaussian();

  const Matrix S = G.transpose() * G;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed while building Q");
  Vector ev = eig.eigenvalues();
  for (Index k = 0; k < dim; ++k) {
    if (ev[k] < 0) {
      if (ev[k] < -1e-12)
        throw NumericalError("G'G produced eigenvalue " + std::to_string(ev[k]) +
                             " far below zero");
      ev[k] = 0;
    }
  }
  const Matrix sqrtS =
      eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  p.Q = 2.0 * sqrtS + Matrix::Identity(dim, dim);

  p.Cmat = 4.0 * Matrix::Identity(dim, dim);
  p.c = Vector::Zero(n_players * dim);

  p.A = Matrix::Zero(dim, n_players * dim);
  for (Index i = 0; i < n_players; ++i)
    p.A.block(0, i * dim, dim, dim) = 4.0 * Matrix::Identity(dim, dim);
  p.b = Vector::Constant(dim, capacity);
  return p;
}

Vector quad_gradient(const VectorRef& x, const QuadGameParams& p) {
  const Index n = p.n_players, d = p.dim;
  if (x.size() != n * d) throw DimensionError("quad gradient input", n * d, x.size());
  Vector sigma = Vector::Zero(d);
  for (Index i = 0; i < n; ++i) sigma += x.segment(i * d, d);
  sigma /= double(n);

  Vector v(n * d);
  const Vector Csigma = p.Cmat * sigma;
  for (Index i = 0; i < n; ++i) {
    const auto xi = x.segment(i * d, d);
    v.segment(i * d, d) =
        -(p.Q * xi + Csigma + (1.0 / double(n)) * (p.Cmat.transpose() * xi) +
          p.c.segment(i * d, d));
  }
  return v;
}

double quad_cost(Index player, const VectorRef& x, const QuadGameParams& p) {
  const Index n = p.n_players, d = p.dim;
  if (player < 0 || player >= n) throw InvalidArgument("player index out of range");
  if (x.size() != n * d) throw DimensionError("quad cost input", n * d, x.size());
  Vector sigma = Vector::Zero(d);
  for (Index i = 0; i < n; ++i) sigma += x.segment(i * d, d);
  sigma /= double(n);
  const auto xi = x.segment(player * d, d);
  return 0.5 * xi.dot(p.Q * xi) + xi.dot(p.Cmat * sigma) + p.c.segment(player * d, d).dot(xi);
}

Matrix quad_gradient_matrix(const QuadGameParams& p) {
  const Index n = p.n_players, d = p.dim;
  Matrix M = Matrix::Zero(n * d, n * d);
  for (Index i = 0; i < n; ++i) {
    M.block(i * d, i * d, d, d) -= p.Q + (1.0 / double(n)) * p.Cmat.transpose();
    for (Index j = 0; j < n; ++j) M.block(i * d, j * d, d, d) -= (1.0 / double(n)) * p.Cmat;
  }
  return M;
}

GameSpec make_quadratic_game(const QuadGameParams& p) {
  GameSpec g;
  g.n_players = p.n_players;
  g.dims.assign(p.n_players, p.dim);
  for (Index i = 0; i < p.n_players; ++i)
    g.action_sets.push_back(ActionSetDescriptor::Simplex(p.dim));
  g.resources.A = p.A;
  g.resources.b = p.b;

  AffineMap aff;
  aff.M = quad_gradient_matrix(p);
  aff.offset = -p.c;
  g.gradient.affine = aff;
  QuadGameParams params = p;  // owned by the closure
  g.gradient.eval = [params](const VectorRef& x) { return quad_gradient(x, params); };

  g.validate();
  return g;
}

GameSpec make_quadratic_game(Index n_players, Index dim, std::uint64_t build_seed,
                             double capacity) {
  return make_quadratic_game(make_quad_params(n_players, dim, build_seed, capacity));
}

nlohmann::json quad_params_to_json(const QuadGameParams& p) {
  return {{"kind", "quad_bench"},
          {"players", p.n_players},
          {"resources", p.dim},
          {"build_seed", p.build_seed},
          {"capacity", p.capacity}};
}

QuadGameParams quad_params_from_json(const nlohmann::json& j) {
  if (j.contains("kind") && j["kind"].get<std::string>() != "quad_bench")
    throw InvalidArgument("unsupported game kind '" + j["kind"].get<std::string>() + "'");
  const Index n = j.at("players").get<Index>();
  const Index d = j.contains("resources") ? j["resources"].get<Index>() : j.at("dim").get<Index>();
  const std::uint64_t seed = j.value("build_seed", std::uint64_t(0));
  const double cap = j.value("capacity", 16.0);
  return make_quad_params(n, d, seed, cap);
}

}  // namespace congame
