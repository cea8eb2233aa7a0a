#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "congame/errors.hpp"
#include "congame/rng.hpp"
#include "congame/types.hpp"

namespace congame {

enum class ActionSetKind { simplex, box, polytope_enum };

/// One player's feasible set. `simplex` is the probability simplex of the
/// stated dimension; `box` is [lower, upper]; `polytope_enum` is the convex
/// hull of an explicit vertex list (one vertex per row).
struct ActionSetDescriptor {
  ActionSetKind kind = ActionSetKind::simplex;
  Index dim = 0;
  Vector lower, upper;  // box only
  Matrix vertices;      // polytope_enum only

  static ActionSetDescriptor Simplex(Index d);
  static ActionSetDescriptor Box(Vector lo, Vector up);
  static ActionSetDescriptor PolytopeEnum(Matrix verts);

  void validate() const;
  bool contains(const VectorRef& x, double tol = 1e-9) const;
  /// Vertex list (rows). Box corners are enumerated; throws if 2^dim would
  /// exceed `max_points`.
  Matrix extreme_points(Index max_points = 1 << 20) const;
};

/// Shared resource coupling: loads A x against capacities b. A Slater point
/// (strictly feasible joint action) is optional; tight instances have none.
struct ResourceConstraints {
  Matrix A;  // R x total_dim
  Vector b;  // R
  std::optional<Vector> slater_point;

  Index n_resources() const { return A.rows(); }
};

enum class NoiseKind { none, gaussian_iid, custom };

/// Additive zero-mean noise on gradient observations. `custom` is an
/// extension hook: the sampler must be zero-mean for any guarantees
/// downstream to apply, which is the caller's responsibility.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;
  std::function<Vector(const VectorRef& x, RngStream&)> sample_custom;

  static NoiseModel None() { return {}; }
  static NoiseModel Gaussian(double s);
  static NoiseModel Custom(std::function<Vector(const VectorRef&, RngStream&)> f);
};

/// v(x) = M x + offset; exact linear structure, used by the constant
/// calculator to optimize over vertices instead of sampling.
struct AffineMap {
  Matrix M;
  Vector offset;
};

struct GradientOracle {
  std::function<Vector(const VectorRef&)> eval;
  std::optional<AffineMap> affine;
};

struct GameSpec {
  Index n_players = 0;
  std::vector<Index> dims;
  std::vector<ActionSetDescriptor> action_sets;
  GradientOracle gradient;
  ResourceConstraints resources;
  NoiseModel noise;

  Index total_dim() const;
  std::vector<Index> block_offsets() const;  // n_players+1 entries
  void validate() const;
  bool contains(const VectorRef& x, double tol = 1e-9) const;
};

/// A x - b, one slack per resource (positive = overload).
Vector congestion(const VectorRef& x, const ResourceConstraints& rc);

Vector sample_noise(const NoiseModel& noise, const VectorRef& x, Index dim,
                    RngStream& rng);

/// v(x) + xi. The drawn noise is returned through `xi_out` when non-null.
Vector noisy_gradient(const VectorRef& x, const GameSpec& game, RngStream& rng,
                      Vector* xi_out = nullptr);

// Per-block norms: simplex blocks pair l1 with l-infinity, everything else
// l2 with l2. The product primal norm sums block norms; its dual takes the
// max over blocks.
double block_primal_norm(const ActionSetDescriptor& set, const VectorRef& v);
double block_dual_norm(const ActionSetDescriptor& set, const VectorRef& v);
double product_primal_norm(const GameSpec& game, const VectorRef& x);
double product_dual_norm(const GameSpec& game, const VectorRef& y);

// Euclidean projections used by the solvers and membership tests.
Vector project_simplex(const VectorRef& v);
Vector project_box(const VectorRef& v, const VectorRef& lo, const VectorRef& up);
Vector project_action_set(const ActionSetDescriptor& set, const VectorRef& v);
Vector project_all(const GameSpec& game, const VectorRef& x);

// JSON round trip. The gradient's eval hook is reconstructed only when an
// affine map is present; custom noise samplers do not serialize.
nlohmann::json game_spec_to_json(const GameSpec& g);
GameSpec game_spec_from_json(const nlohmann::json& j);

}  // namespace congame
