#pragma once

#include <Eigen/Dense>

namespace congame {

using Scalar = double;
using Index = Eigen::Index;

template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VecT<Scalar>;
using Matrix = MatT<Scalar>;
using VectorRef = Eigen::Ref<const Vector>;
using MatrixRef = Eigen::Ref<const Matrix>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.array().isFinite().all();
}

/// max-shifted log(sum(exp(y))); finite for arbitrarily large scores.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& y) {
  using S = typename Derived::Scalar;
  const S m = y.maxCoeff();
  return m + std::log((y.array() - m).exp().sum());
}

/// exp(y)/sum(exp(y)) with the same max shift.
template <typename Derived>
VecT<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& y) {
  using S = typename Derived::Scalar;
  const S m = y.maxCoeff();
  VecT<S> z = (y.array() - m).exp();
  z /= z.sum();
  return z;
}

/// Neumaier-compensated scalar accumulator.
class CompensatedSum {
 public:
  void add(Scalar v) {
    const Scalar t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  Scalar value() const { return sum_ + comp_; }
  void reset() { sum_ = comp_ = 0; }

 private:
  Scalar sum_ = 0;
  Scalar comp_ = 0;
};

/// Component-wise compensated accumulation of vectors of fixed dimension.
class CompensatedVectorSum {
 public:
  explicit CompensatedVectorSum(Index dim)
      : sum_(Vector::Zero(dim)), comp_(Vector::Zero(dim)) {}

  void add(const VectorRef& v) {
    for (Index k = 0; k < sum_.size(); ++k) {
      const Scalar t = sum_[k] + v[k];
      if (std::abs(sum_[k]) >= std::abs(v[k]))
        comp_[k] += (sum_[k] - t) + v[k];
      else
        comp_[k] += (v[k] - t) + sum_[k];
      sum_[k] = t;
    }
  }
  void add_scaled(Scalar w, const VectorRef& v) {
    for (Index k = 0; k < sum_.size(); ++k) {
      const Scalar x = w * v[k];
      const Scalar t = sum_[k] + x;
      if (std::abs(sum_[k]) >= std::abs(x))
        comp_[k] += (sum_[k] - t) + x;
      else
        comp_[k] += (x - t) + sum_[k];
      sum_[k] = t;
    }
  }
  Vector value() const { return sum_ + comp_; }
  Index dim() const { return sum_.size(); }

 private:
  Vector sum_, comp_;
};

}  // namespace congame
