#pragma once

#include "gsn/core.hpp"

#include <vector>

namespace gsn {

/// Isotropic Gaussian kernel density over stored samples (one per row).
class ParzenEstimator {
 public:
  ParzenEstimator(Matrix samples, double sigma);

  const Matrix& samples() const { return samples_; }
  double sigma() const { return sigma_; }
  Index dimension() const { return samples_.cols(); }

  /// log density at each row of `points`:
  /// logsumexp_j(-|x - s_j|^2 / 2 sigma^2) - log N - (d/2) log(2 pi sigma^2).
  Vector log_density(const Matrix& points) const;

 private:
  Matrix samples_;
  Vector sample_sq_norms_;
  double sigma_;
};

struct LogLikelihood {
  double mean = 0.0;
  double std_error = 0.0;  // sample std (n - 1) / sqrt(n); 0 for one point
};

LogLikelihood log_likelihood(const ParzenEstimator& est, const Matrix& test);

/// Grid sigma with the highest mean validation log-likelihood; ties go to
/// the smaller sigma.
double select_bandwidth(const Matrix& samples, const Matrix& validation, const std::vector<double>& grid);

/// `count` log-spaced values from `lo` to `hi` inclusive.
std::vector<double> log_spaced(double lo, double hi, Index count);

}  // namespace gsn
