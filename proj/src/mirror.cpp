#include "congame/mirror.hpp"

#include <cmath>

#include "congame/errors.hpp"

namespace congame {

Regularizer Regularizer::Entropy(Index dim) {
  if (dim < 1) throw InvalidArgument("entropy regularizer needs dim >= 1");
  Regularizer r;
  r.kind_ = RegularizerKind::entropy_simplex;
  r.dim_ = dim;
  return r;
}

Regularizer Regularizer::SquaredEuclidean(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() < 1)
    throw InvalidArgument("box regularizer needs matching nonempty bounds");
  if ((lower.array() > upper.array()).any())
    throw InvalidArgument("box regularizer has lower > upper");
  Regularizer r;
  r.kind_ = RegularizerKind::squared_euclidean_box;
  r.dim_ = lower.size();
  r.lower_ = std::move(lower);
  r.upper_ = std::move(upper);
  return r;
}

double Regularizer::psi(const VectorRef& x) const {
  if (x.size() != dim_) throw DimensionError("psi input", dim_, x.size());
  if (kind_ == RegularizerKind::entropy_simplex) {
    double s = 0;
    for (Index k = 0; k < dim_; ++k)
      if (x[k] > 0) s += x[k] * std::log(x[k]);  // 0 log 0 = 0
    return s;
  }
  return 0.5 * x.squaredNorm();
}

double Regularizer::psi_star(const VectorRef& y) const {
  if (y.size() != dim_) throw DimensionError("psi_star input", dim_, y.size());
  if (kind_ == RegularizerKind::entropy_simplex) return log_sum_exp(y);
  const Vector x = project_box(y, lower_, upper_);
  return y.dot(x) - 0.5 * x.squaredNorm();
}

double Regularizer::psi_range() const {
  if (kind_ == RegularizerKind::entropy_simplex) return std::log(double(dim_));
  double hi = 0, lo = 0;
  for (Index k = 0; k < dim_; ++k) {
    const double a = lower_[k], b = upper_[k];
    hi += 0.5 * std::max(a * a, b * b);
    lo += (a <= 0 && 0 <= b) ? 0.0 : 0.5 * std::min(a * a, b * b);
  }
  return hi - lo;
}

Vector mirror_map(const VectorRef& y, const Regularizer& reg) {
  if (y.size() != reg.dimension())
    throw DimensionError("mirror map input", reg.dimension(), y.size());
  if (!all_finite(y)) throw NumericalError("mirror map got non-finite scores");
  if (reg.kind() == RegularizerKind::entropy_simplex) return softmax(y);
  return project_box(y, reg.lower(), reg.upper());
}

double fenchel_coupling(const VectorRef& p, const VectorRef& y, const Regularizer& reg) {
  const double f = reg.psi(p) + reg.psi_star(y) - y.dot(p);
  if (f < 0) {
    if (f < -1e-8)
      throw NumericalError("coupling came out negative: " + std::to_string(f) +
                           " (reference point outside the domain?)");
    return 0.0;
  }
  return f;
}

Vector total_mirror(const VectorRef& y, const std::vector<Regularizer>& regs) {
  Index total = 0;
  for (const auto& r : regs) total += r.dimension();
  if (y.size() != total) throw DimensionError("total mirror input", total, y.size());
  Vector x(total);
  Index off = 0;
  for (const auto& r : regs) {
    x.segment(off, r.dimension()) = mirror_map(y.segment(off, r.dimension()), r);
    off += r.dimension();
  }
  return x;
}

double total_fenchel_coupling(const VectorRef& p, const VectorRef& y,
                              const std::vector<Regularizer>& regs) {
  Index total = 0;
  for (const auto& r : regs) total += r.dimension();
  if (p.size() != total) throw DimensionError("total coupling reference", total, p.size());
  if (y.size() != total) throw DimensionError("total coupling scores", total, y.size());
  CompensatedSum s;
  Index off = 0;
  for (const auto& r : regs) {
    s.add(fenchel_coupling(p.segment(off, r.dimension()), y.segment(off, r.dimension()), r));
    off += r.dimension();
  }
  return s.value();
}

Regularizer regularizer_for(const ActionSetDescriptor& set) {
  switch (set.kind) {
    case ActionSetKind::simplex:
      return Regularizer::Entropy(set.dim);
    case ActionSetKind::box:
      return Regularizer::SquaredEuclidean(set.lower, set.upper);
    case ActionSetKind::polytope_enum:
      throw InvalidArgument("no closed-form mirror map for enumerated polytopes");
  }
  throw InvalidArgument("unknown action set kind");
}

std::vector<Regularizer> regularizers_for(const GameSpec& game) {
  std::vector<Regularizer> regs;
  regs.reserve(game.action_sets.size());
  for (const auto& s : game.action_sets) regs.push_back(regularizer_for(s));
  return regs;
}

}  // namespace congame
