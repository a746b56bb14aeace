#include "gsn/parzen.hpp"

#include "gsn/numeric.hpp"

#include <cmath>
#include <numbers>

namespace gsn {

ParzenEstimator::ParzenEstimator(Matrix samples, double sigma) : samples_(std::move(samples)), sigma_(sigma) {
  if (!(sigma > 0.0)) throw ParameterError("Parzen bandwidth must be > 0");
  if (samples_.rows() < 1) throw ParameterError("Parzen estimator needs at least one sample");
  sample_sq_norms_ = samples_.rowwise().squaredNorm();
}

Vector ParzenEstimator::log_density(const Matrix& points) const {
  if (points.cols() != dimension())
    throw ShapeError("Parzen: points have " + std::to_string(points.cols()) + " columns, estimator has " +
                     std::to_string(dimension()));
  const double inv_two_var = 1.0 / (2.0 * sigma_ * sigma_);
  const double log_norm = std::log(static_cast<double>(samples_.rows())) +
                          0.5 * static_cast<double>(dimension()) * std::log(2.0 * std::numbers::pi * sigma_ * sigma_);
  Vector out(points.rows());
  // Blocked so the squared-distance matrix stays small.
  constexpr Index kBlock = 256;
  for (Index first = 0; first < points.rows(); first += kBlock) {
    const Index count = std::min(kBlock, points.rows() - first);
    const auto block = points.middleRows(first, count);
    Matrix sq = (-2.0 * block) * samples_.transpose();
    sq.colwise() += block.rowwise().squaredNorm();
    sq.rowwise() += sample_sq_norms_.transpose();
    sq = sq.cwiseMax(0.0);
    for (Index i = 0; i < count; ++i) out(first + i) = logsumexp(-inv_two_var * sq.row(i)) - log_norm;
  }
  return out;
}

LogLikelihood log_likelihood(const ParzenEstimator& est, const Matrix& test) {
  if (test.rows() < 1) throw ParameterError("Parzen: empty test set");
  const Vector ll = est.log_density(test);
  LogLikelihood r;
  const double n = static_cast<double>(ll.size());
  r.mean = ll.mean();
  if (ll.size() > 1) r.std_error = std::sqrt((ll.array() - r.mean).square().sum() / (n - 1.0)) / std::sqrt(n);
  return r;
}

double select_bandwidth(const Matrix& samples, const Matrix& validation, const std::vector<double>& grid) {
  if (grid.empty()) throw ParameterError("select_bandwidth: empty grid");
  double best_sigma = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (double sigma : grid) {
    const double ll = log_likelihood(ParzenEstimator(samples, sigma), validation).mean;
    if (ll > best || (ll == best && sigma < best_sigma)) {
      best = ll;
      best_sigma = sigma;
    }
  }
  return best_sigma;
}

std::vector<double> log_spaced(double lo, double hi, Index count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ParameterError("log_spaced: need count >= 1 and 0 < lo <= hi");
  std::vector<double> out;
  if (count == 1) return {lo};
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (Index i = 0; i < count; ++i) out.push_back(lo * std::exp(step * static_cast<double>(i)));
  out.back() = hi;
  return out;
}

}  // namespace gsn
