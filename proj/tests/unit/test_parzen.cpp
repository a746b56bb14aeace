#include <doctest.h>

#include "gsn/numeric.hpp"
#include "gsn/parzen.hpp"

#include <algorithm>
#include <numbers>

using namespace gsn;

namespace {

// Direct density: mean of Gaussian kernels evaluated one by one.
double direct_log_density(const Matrix& samples, const RowVector& x, double sigma) {
  const double d = static_cast<double>(samples.cols());
  double sum = 0.0;
  for (Index j = 0; j < samples.rows(); ++j) {
    const double sq = (samples.row(j) - x).squaredNorm();
    sum += std::exp(-sq / (2.0 * sigma * sigma)) / std::pow(2.0 * std::numbers::pi * sigma * sigma, d / 2.0);
  }
  return std::log(sum / static_cast<double>(samples.rows()));
}

Matrix normal_rows(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  return gaussian_noise(rng, n, d, 1.0);
}

}  // namespace

TEST_CASE("parzen: single sample at the test point, unit bandwidth") {
  const ParzenEstimator est(Matrix::Constant(1, 1, 0.3), 1.0);
  const LogLikelihood ll = log_likelihood(est, Matrix::Constant(1, 1, 0.3));
  CHECK(ll.mean == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(ll.std_error == 0.0);
}

TEST_CASE("parzen: far test points stay finite") {
  const ParzenEstimator est(normal_rows(50, 3, 1), 0.05);
  const Vector far = est.log_density(Matrix::Constant(2, 3, 100.0));
  CHECK(std::isfinite(far(0)));
  CHECK(far(0) < -1e5);
}

TEST_CASE("parzen: two samples in two dimensions match the direct sum") {
  Matrix samples(2, 2), test(3, 2);
  samples << 0.1, -0.4, 1.2, 0.7;
  test << 0.0, 0.0, 1.0, 1.0, -0.5, 2.0;
  const ParzenEstimator est(samples, 0.6);
  const Vector got = est.log_density(test);
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(got(i) - direct_log_density(samples, test.row(i), 0.6)) < 1e-12);
}

TEST_CASE("parzen: blocked evaluation over many samples matches the direct sum") {
  const Matrix samples = normal_rows(700, 4, 2);
  const Matrix test = normal_rows(5, 4, 3);
  const ParzenEstimator est(samples, 0.8);
  const Vector got = est.log_density(test);
  for (Index i = 0; i < 5; ++i) CHECK(std::abs(got(i) - direct_log_density(samples, test.row(i), 0.8)) < 1e-11);
}

TEST_CASE("parzen: permuting stored samples leaves the likelihood unchanged") {
  const Matrix samples = normal_rows(300, 3, 4);
  const Matrix test = normal_rows(40, 3, 5);
  std::vector<Index> order(300);
  for (Index i = 0; i < 300; ++i) order[static_cast<std::size_t>(i)] = 299 - (i * 7) % 300;
  std::sort(order.begin(), order.end(), [](Index a, Index b) { return (a * 37) % 301 < (b * 37) % 301; });
  Matrix permuted(300, 3);
  for (Index i = 0; i < 300; ++i) permuted.row(i) = samples.row(order[static_cast<std::size_t>(i)]);
  const double a = log_likelihood(ParzenEstimator(samples, 0.4), test).mean;
  const double b = log_likelihood(ParzenEstimator(permuted, 0.4), test).mean;
  CHECK(std::abs(a - b) < 1e-9);
}

TEST_CASE("parzen: duplicating a sample follows the logsumexp algebra") {
  const Matrix samples = normal_rows(20, 2, 6);
  const Matrix test = normal_rows(8, 2, 7);
  const double sigma = 0.7;
  Matrix extended(21, 2);
  extended.topRows(20) = samples;
  extended.row(20) = samples.row(3);
  const Vector before = ParzenEstimator(samples, sigma).log_density(test);
  const Vector after = ParzenEstimator(extended, sigma).log_density(test);
  for (Index i = 0; i < 8; ++i) {
    // N p_N(x) + k_3(x) = (N + 1) p_{N+1}(x), with k_3 the duplicated kernel.
    const double kernel = -(samples.row(3) - test.row(i)).squaredNorm() / (2.0 * sigma * sigma) -
                          std::log(2.0 * std::numbers::pi * sigma * sigma);
    const double predicted = std::log(20.0 * std::exp(before(i)) + std::exp(kernel)) - std::log(21.0);
    CHECK(std::abs(after(i) - predicted) < 1e-12);
  }
}

TEST_CASE("parzen: errors and standard error") {
  CHECK_THROWS_AS(ParzenEstimator(Matrix::Zero(3, 2), 0.0), ParameterError);
  CHECK_THROWS_AS(ParzenEstimator(Matrix::Zero(0, 2), 1.0), ParameterError);
  const ParzenEstimator est(normal_rows(10, 2, 8), 1.0);
  CHECK_THROWS_AS(est.log_density(Matrix::Zero(3, 3)), ShapeError);
  const Matrix test = normal_rows(6, 2, 9);
  const Vector lp = est.log_density(test);
  const double mean = lp.mean();
  const double sd = std::sqrt((lp.array() - mean).square().sum() / 5.0);
  const LogLikelihood ll = log_likelihood(est, test);
  CHECK(ll.mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(ll.std_error == doctest::Approx(sd / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("bandwidth: single value, dense-grid agreement, degenerate samples") {
  const Matrix samples = normal_rows(1000, 1, 10);
  const Matrix validation = normal_rows(1000, 1, 11);
  CHECK(select_bandwidth(samples, validation, {0.3}) == 0.3);

  const auto grid = log_spaced(0.05, 2.0, 20);
  const auto dense = log_spaced(0.05, 2.0, 200);
  const double coarse = select_bandwidth(samples, validation, grid);
  const double fine = select_bandwidth(samples, validation, dense);
  CHECK(coarse <= 2.0 * fine);
  CHECK(coarse >= 0.5 * fine);

  const Matrix same = Matrix::Zero(30, 2);
  const Matrix away = Matrix::Constant(5, 2, 3.0);
  CHECK(select_bandwidth(same, away, grid) == grid.back());

  // Equal scores: the smaller sigma wins.
  CHECK(select_bandwidth(same, away, {1.0, 1.0}) == 1.0);
  CHECK_THROWS_AS(select_bandwidth(samples, validation, {}), ParameterError);
}

TEST_CASE("log_spaced: endpoints and ratio") {
  const auto g = log_spaced(0.05, 1.0, 20);
  REQUIRE(g.size() == 20);
  CHECK(g.front() == doctest::Approx(0.05));
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK(g[1] / g[0] == doctest::Approx(g[19] / g[18]));
}
