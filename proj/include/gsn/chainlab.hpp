#pragma once

#include "gsn/model.hpp"
#include "gsn/numeric.hpp"

#include <string>
#include <vector>

namespace gsn {

/// All binary vectors of `bits` coordinates, enumerated by binary counting:
/// state s has coordinate i equal to bit i of s (coordinate 0 is the least
/// significant bit).
class StateSpace {
 public:
  static constexpr Index kDefaultCap = 4096;

  explicit StateSpace(Index bits, Index cap = kDefaultCap);

  Index bits() const { return bits_; }
  Index size() const { return Index{1} << bits_; }
  /// bits x 1 column of 0/1 values.
  Matrix state(Index s) const;
  Index index_of(const Matrix& x) const;

 private:
  Index bits_;
};

struct ChainOperator {
  Matrix k;  // row-stochastic: k(i, j) = P(next = j | current = i)
  std::string label;

  Index size() const { return k.rows(); }
  /// Throws NumericalError unless entries are >= 0 and rows sum to 1 within tol.
  void validate(double tol = 1e-12) const;
};

/// Exact X-chain of a one-layer binary GSN (a denoising autoencoder):
/// K(x'|x) = sum over x~ of C(x~|x) P(x'|x~), with salt-and-pepper C and the
/// factorized Bernoulli reconstruction of the deterministic hidden code.
ChainOperator dae_exact_operator(const GsnModel& model, const StateSpace& space);

struct ErgodicityReport {
  bool irreducible = false;
  Index period = 0;  // period of the class containing state 0
  bool ergodic = false;
};

ErgodicityReport ergodicity_check(const ChainOperator& op);

/// Orientation and norm used for ||pi - pi~||_1 <= ||Z||_inf ||K - K~||_inf.
///  RowStochastic: pi K = pi, Z = (I - K + 1 pi^T)^-1, ||.||_inf is the max
///    absolute row sum of the row-stochastic matrices. This is the form
///    that holds in general.
///  ColumnInfinity: P = K^T so that P pi = pi, Z = (I - P + pi 1^T)^-1 (every
///    column of the rank-one term is pi), ||.||_inf is the max absolute row
///    sum of the column-stochastic matrices. It does not bound the change in
///    general and is kept only for comparison.
enum class NormConvention { RowStochastic, ColumnInfinity };

struct SchweitzerResult {
  double lhs = 0.0;  // ||pi - pi~||_1
  double rhs = 0.0;  // ||Z||_inf ||K - K~||_inf
  double z_norm = 0.0;
  double perturbation_norm = 0.0;
  bool holds = false;  // lhs <= rhs + 1e-9
};

SchweitzerResult schweitzer_bound(const ChainOperator& k, const ChainOperator& k_tilde,
                                  NormConvention convention = NormConvention::RowStochastic,
                                  const StationaryOptions& opts = {.tol = 1e-13, .dense_fallback = true});

enum class ScanMode { RandomScan, OrderedWithIndex };

/// Binary dependency network. conditionals[i] has 2^(d-1) rows, one per
/// context x_{-i} (the remaining bits packed in order, see context_index),
/// and two columns P_i(x_i = 0 | ctx), P_i(x_i = 1 | ctx).
struct DepNetSpec {
  Index variables = 0;
  std::vector<Matrix> conditionals;
  ScanMode scan = ScanMode::RandomScan;

  void validate() const;
};

/// Packs the bits of `state` other than `var` into a context index.
Index context_index(Index state, Index var);

/// The exact conditionals of a joint over 2^d states.
DepNetSpec conditionals_from_joint(const RowVector& joint, Index variables, ScanMode scan = ScanMode::RandomScan);

/// Random-scan: K = (1/d) sum_i K_i over the 2^d states. Ordered scan with
/// the next index in the state: state s = x + 2^d * i, x_i is resampled and
/// i advances to (i + 1) mod d.
ChainOperator depnet_operator(const DepNetSpec& spec, Index cap = StateSpace::kDefaultCap);

/// Tiny discrete GSN over binary x (x_bits) and binary h (h_bits) given as
/// explicit tables. f has (2^x_bits * 2^h_bits) rows indexed x * 2^h_bits + h'
/// and 2^h_bits columns: f(h | h', x). g has 2^h_bits rows and 2^x_bits
/// columns: g(x | h).
struct TableGsn {
  Index x_bits = 0;
  Index h_bits = 0;
  Matrix f;
  Matrix g;

  Index nx() const { return Index{1} << x_bits; }
  Index nh() const { return Index{1} << h_bits; }
  void validate() const;
};

struct JointChain {
  ChainOperator op;        // over states s = x + 2^x_bits * h
  RowVector stationary;    // over the same states
  RowVector x_marginal;
};

/// K((x,h) -> (x',h')) = f(h'|h,x) g(x'|h'), its stationary distribution and
/// that distribution's marginal over x.
JointChain joint_chain_operator(const TableGsn& gsn, Index cap = StateSpace::kDefaultCap,
                                const StationaryOptions& opts = {.tol = 1e-13});

/// Random tables meeting the hypotheses of the GSN stationarity result for
/// the target P(X0) = `px`: a strictly positive random f, P(H0|X0=x) set to
/// the stationary law r_x of h' -> f(.|h', x) (so that H0 and H1 agree given
/// X0), and g(x|h) = P(X0 = x | H1 = h) by Bayes' rule.
TableGsn construct_consistent_gsn(const RowVector& px, Index h_bits, Rng& rng);

/// Random strictly positive row-stochastic matrix.
Matrix random_stochastic(Index n, Rng& rng, double concentration = 1.0);

}  // namespace gsn
