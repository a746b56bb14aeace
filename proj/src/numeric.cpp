#include "gsn/numeric.hpp"

#include "support_graph.hpp"

#include <sstream>

namespace gsn {

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + shape_string(a) + " times " + shape_string(b));
  Matrix out = a * b;
  return out;
}

Matrix gaussian_noise(Rng& rng, Index rows, Index cols, double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("gaussian_noise: sigma must be >= 0");
  Matrix out(rows, cols);
  if (sigma == 0.0) {
    out.setZero();
    return out;
  }
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) out(r, c) = sigma * rng.normal();
  return out;
}

Matrix salt_and_pepper(Rng& rng, const Matrix& x, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("salt_and_pepper: p must lie in [0, 1]");
  Matrix out = x;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      const std::uint64_t draw = rng.next_u64();
      const double u = static_cast<double>(draw >> 11) * 0x1.0p-53;
      if (u < p) out(r, c) = static_cast<double>(draw & 1U);
    }
  }
  return out;
}

Matrix bernoulli_sample(Rng& rng, const Matrix& probabilities) {
  Matrix out(probabilities.rows(), probabilities.cols());
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c) out(r, c) = rng.uniform() < probabilities(r, c) ? 1.0 : 0.0;
  return out;
}

namespace {

RowVector dense_stationary(const Matrix& k) {
  const Index n = k.rows();
  Matrix system = k.transpose() - Matrix::Identity(n, n);
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw ConvergenceError("stationary_distribution: balance equations are singular");
  RowVector pi = lu.solve(rhs).transpose();
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

}  // namespace

RowVector stationary_distribution(const Matrix& k, const StationaryOptions& opts) {
  if (k.rows() != k.cols() || k.rows() == 0)
    throw ShapeError("stationary_distribution: square non-empty matrix required, got " + shape_string(k));
  if (!all_finite(k) || (k.array() < 0.0).any())
    throw ParameterError("stationary_distribution: entries must be finite and non-negative");
  const Index n = k.rows();
  const double worst_row = (k.rowwise().sum().array() - 1.0).abs().maxCoeff();
  if (worst_row > 1e-9) throw ParameterError("stationary_distribution: matrix is not row-stochastic");

  const auto closed = detail::closed_class_count(k);
  if (closed > 1)
    throw ConvergenceError("stationary_distribution: chain is reducible (" + std::to_string(closed) +
                           " closed classes), no unique stationary distribution");

  RowVector pi = RowVector::Constant(n, 1.0 / static_cast<double>(n));
  for (long it = 0; it < opts.max_iterations; ++it) {
    RowVector next = pi * k;
    const double residual = (next - pi).lpNorm<1>();
    if (residual <= opts.tol) return pi / pi.sum();
    pi = next / next.sum();
  }
  if (opts.dense_fallback) return dense_stationary(k);
  throw ConvergenceError("stationary_distribution: no convergence after " + std::to_string(opts.max_iterations) +
                         " iterations (chain is likely periodic)");
}

}  // namespace gsn
