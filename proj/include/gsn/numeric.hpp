#pragma once

#include "gsn/core.hpp"
#include "gsn/rng.hpp"

#include <cmath>
#include <limits>

namespace gsn {

/// Checked product; throws ShapeError when inner dimensions disagree.
Matrix matmul(const Matrix& a, const Matrix& b);

/// i.i.d. N(0, sigma^2) entries, drawn row-major from `rng`.
Matrix gaussian_noise(Rng& rng, Index rows, Index cols, double sigma);

/// Each entry independently, with probability p, is replaced by 0 or 1 with
/// equal odds. Exactly one draw is consumed per entry regardless of outcome.
Matrix salt_and_pepper(Rng& rng, const Matrix& x, double p);

/// Independent Bernoulli(probabilities) entries, one draw per entry in
/// row-major order.
Matrix bernoulli_sample(Rng& rng, const Matrix& probabilities);

struct StationaryOptions {
  double tol = 1e-10;
  long max_iterations = 100000;
  /// When power iteration stalls, solve the balance equations densely
  /// instead of failing.
  bool dense_fallback = false;
};

/// Row vector pi with pi K = pi, pi >= 0, sum(pi) = 1, for a row-stochastic
/// K. Reducible chains (more than one closed class) and chains on which
/// power iteration does not reach `tol` throw ConvergenceError.
RowVector stationary_distribution(const Matrix& k, const StationaryOptions& opts = {});

/// Max-absolute-row-sum norm.
template <typename Derived>
double inf_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::DenseBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const S top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.derived().array() - top).exp().sum());
}

template <typename Derived>
Matrix sigmoid(const Eigen::MatrixBase<Derived>& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

}  // namespace gsn
