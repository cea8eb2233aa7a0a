#pragma once

#include <vector>

#include "congame/game.hpp"
#include "congame/types.hpp"

namespace congame {

enum class RegularizerKind { entropy_simplex, squared_euclidean_box };

/// Strongly convex regularizer over one player's action set, with its
/// closed-form mirror map. Entropy
///   psi(x) = sum_k x_k log x_k          (simplex, 1-strongly convex in l1)
/// maps scores through softmax; the Euclidean regularizer
///   psi(x) = 0.5 ||x||^2                (box, 1-strongly convex in l2)
/// maps scores through coordinate clamping.
class Regularizer {
 public:
  static Regularizer Entropy(Index dim);
  static Regularizer SquaredEuclidean(Vector lower, Vector upper);

  RegularizerKind kind() const { return kind_; }
  Index dimension() const { return dim_; }
  double strong_convexity() const { return 1.0; }

  double psi(const VectorRef& x) const;
  /// psi* (convex conjugate) evaluated via the mirror map.
  double psi_star(const VectorRef& y) const;
  /// max psi - min psi over the domain, in closed form.
  double psi_range() const;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Regularizer() = default;
  RegularizerKind kind_ = RegularizerKind::entropy_simplex;
  Index dim_ = 0;
  Vector lower_, upper_;  // box only
};

/// argmax_x { <y,x> - psi(x) }  (softmax / clamp)
Vector mirror_map(const VectorRef& y, const Regularizer& reg);

/// F(p, y) = psi(p) + psi*(y) - <y, p>. Nonnegative; tiny negative values
/// from roundoff are clamped to zero.
double fenchel_coupling(const VectorRef& p, const VectorRef& y, const Regularizer& reg);

/// Blockwise mirror map over a product of regularizers.
Vector total_mirror(const VectorRef& y, const std::vector<Regularizer>& regs);

/// Sum of blockwise couplings.
double total_fenchel_coupling(const VectorRef& p, const VectorRef& y,
                              const std::vector<Regularizer>& regs);

/// Default regularizer for an action set: entropy on simplices, squared
/// Euclidean on boxes. Enumerated polytopes have no closed-form map and are
/// rejected.
Regularizer regularizer_for(const ActionSetDescriptor& set);
std::vector<Regularizer> regularizers_for(const GameSpec& game);

}  // namespace congame
