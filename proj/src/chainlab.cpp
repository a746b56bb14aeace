#include "gsn/chainlab.hpp"

#include "support_graph.hpp"

#include <bit>
#include <cmath>
#include <deque>
#include <numeric>

namespace gsn {

StateSpace::StateSpace(Index bits, Index cap) : bits_(bits) {
  if (bits < 1 || bits > 30) throw SizeError("state space needs 1..30 bits, got " + std::to_string(bits));
  if (size() > cap) throw SizeError("state space of " + std::to_string(size()) + " states exceeds cap " + std::to_string(cap));
}

Matrix StateSpace::state(Index s) const {
  Matrix x(bits_, 1);
  for (Index i = 0; i < bits_; ++i) x(i, 0) = static_cast<double>((s >> i) & 1);
  return x;
}

Index StateSpace::index_of(const Matrix& x) const {
  if (x.rows() != bits_ || x.cols() != 1) throw ShapeError("index_of: expected " + std::to_string(bits_) + "x1");
  Index s = 0;
  for (Index i = 0; i < bits_; ++i)
    if (x(i, 0) > 0.5) s |= Index{1} << i;
  return s;
}

void ChainOperator::validate(double tol) const {
  if (k.rows() != k.cols()) throw ShapeError("chain operator must be square, got " + shape_string(k));
  if ((k.array() < 0.0).any()) throw NumericalError(label + ": negative transition probability");
  const double worst = (k.rowwise().sum().array() - 1.0).abs().maxCoeff();
  if (worst > tol) throw NumericalError(label + ": row sums deviate from 1 by " + std::to_string(worst));
}

ChainOperator dae_exact_operator(const GsnModel& model, const StateSpace& space) {
  const auto& cfg = model.config();
  if (cfg.depth() != 1) throw ParameterError("dae_exact_operator: model must have exactly one hidden layer");
  if (cfg.visible_kind != VisibleKind::Binary) throw ParameterError("dae_exact_operator: binary visibles required");
  if (cfg.visible_size != space.bits()) throw ShapeError("dae_exact_operator: visible size does not match state space");
  const Index n = space.size();
  const Index d = space.bits();
  const double p = cfg.input_corruption_p;

  Matrix all(d, n);
  for (Index s = 0; s < n; ++s) all.col(s) = space.state(s);

  // C(x~ | x) factorizes: a bit keeps its value w.p. 1 - p/2.
  Matrix corruption(n, n);
  for (Index from = 0; from < n; ++from)
    for (Index to = 0; to < n; ++to) {
      const auto flips = std::popcount(static_cast<std::uint64_t>(from ^ to));
      corruption(from, to) = std::pow(p / 2.0, flips) * std::pow(1.0 - p / 2.0, static_cast<double>(d - flips));
    }

  GsnState state = initial_state(model, all);
  Rng unused(0);
  const Matrix h1 = layer_update(model, state, 1, unused);
  const Matrix q = reconstruct(model, h1);  // d x n, column = corrupted state

  Matrix recon(n, n);
  for (Index from = 0; from < n; ++from)
    for (Index to = 0; to < n; ++to) {
      double prob = 1.0;
      for (Index i = 0; i < d; ++i) prob *= ((to >> i) & 1) ? q(i, from) : 1.0 - q(i, from);
      recon(from, to) = prob;
    }

  ChainOperator op{corruption * recon, "dae-exact"};
  op.validate();
  return op;
}

ErgodicityReport ergodicity_check(const ChainOperator& op) {
  const auto adj = detail::support_graph(op.k);
  Index count = 0;
  const auto comp = detail::strongly_connected_components(adj, count);
  ErgodicityReport report;
  report.irreducible = count == 1;

  // BFS levels from state 0 within its class; the period is the gcd of
  // level(u) + 1 - level(v) over every edge u -> v inside the class.
  const Index n = op.size();
  std::vector<Index> level(static_cast<std::size_t>(n), -1);
  std::deque<Index> queue{0};
  level[0] = 0;
  Index g = 0;
  while (!queue.empty()) {
    const Index u = queue.front();
    queue.pop_front();
    for (Index v : adj[static_cast<std::size_t>(u)]) {
      if (comp[static_cast<std::size_t>(v)] != comp[0]) continue;
      auto& lv = level[static_cast<std::size_t>(v)];
      if (lv < 0) {
        lv = level[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      } else {
        g = std::gcd(g, std::abs(level[static_cast<std::size_t>(u)] + 1 - lv));
      }
    }
  }
  report.period = g;
  report.ergodic = report.irreducible && report.period == 1;
  return report;
}

SchweitzerResult schweitzer_bound(const ChainOperator& k, const ChainOperator& k_tilde, NormConvention convention,
                                  const StationaryOptions& opts) {
  if (k.size() != k_tilde.size()) throw ShapeError("schweitzer_bound: operators differ in size");
  const Index n = k.size();
  const RowVector pi = stationary_distribution(k.k, opts);
  const RowVector pi_tilde = stationary_distribution(k_tilde.k, opts);

  Matrix fundamental;
  Matrix perturbation;
  if (convention == NormConvention::RowStochastic) {
    fundamental = Matrix::Identity(n, n) - k.k + Vector::Ones(n) * pi;
    perturbation = k.k - k_tilde.k;
  } else {
    fundamental = Matrix::Identity(n, n) - k.k.transpose() + pi.transpose() * RowVector::Ones(n);
    perturbation = k.k.transpose() - k_tilde.k.transpose();
  }
  Eigen::FullPivLU<Matrix> lu(fundamental);
  if (!lu.isInvertible()) throw NumericalError("schweitzer_bound: A + C is singular");
  const Matrix z = lu.inverse();

  SchweitzerResult r;
  r.lhs = (pi - pi_tilde).lpNorm<1>();
  r.z_norm = inf_norm(z);
  r.perturbation_norm = inf_norm(perturbation);
  r.rhs = r.z_norm * r.perturbation_norm;
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

Index context_index(Index state, Index var) {
  const Index low = state & ((Index{1} << var) - 1);
  const Index high = state >> (var + 1);
  return low | (high << var);
}

void DepNetSpec::validate() const {
  if (variables < 1) throw ParameterError("dependency network needs at least one variable");
  if (static_cast<Index>(conditionals.size()) != variables)
    throw ParameterError("dependency network needs one conditional table per variable");
  const Index contexts = Index{1} << (variables - 1);
  for (const auto& table : conditionals) {
    if (table.rows() != contexts || table.cols() != 2)
      throw ShapeError("conditional table must be " + std::to_string(contexts) + "x2, got " + shape_string(table));
    if ((table.array() < 0.0).any() || (table.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-12)
      throw ParameterError("conditional table rows must be distributions");
  }
}

DepNetSpec conditionals_from_joint(const RowVector& joint, Index variables, ScanMode scan) {
  const Index n = Index{1} << variables;
  if (joint.size() != n) throw ShapeError("joint must have 2^d entries");
  DepNetSpec spec{variables, {}, scan};
  for (Index i = 0; i < variables; ++i) {
    Matrix table(n / 2, 2);
    for (Index s = 0; s < n; ++s) table(context_index(s, i), (s >> i) & 1) = joint(s);
    for (Index r = 0; r < table.rows(); ++r) table.row(r) /= table.row(r).sum();
    spec.conditionals.push_back(std::move(table));
  }
  return spec;
}

ChainOperator depnet_operator(const DepNetSpec& spec, Index cap) {
  spec.validate();
  const Index d = spec.variables;
  const StateSpace space(d, cap);
  const Index n = space.size();

  // K_i: resample coordinate i from its conditional, others unchanged.
  auto resample = [&](Index i, Index from, auto&& emit) {
    const Index ctx = context_index(from, i);
    const Index cleared = from & ~(Index{1} << i);
    emit(cleared, spec.conditionals[static_cast<std::size_t>(i)](ctx, 0));
    emit(cleared | (Index{1} << i), spec.conditionals[static_cast<std::size_t>(i)](ctx, 1));
  };

  ChainOperator op;
  if (spec.scan == ScanMode::RandomScan) {
    op.label = "depnet-random-scan";
    op.k = Matrix::Zero(n, n);
    for (Index from = 0; from < n; ++from)
      for (Index i = 0; i < d; ++i)
        resample(i, from, [&](Index to, double prob) { op.k(from, to) += prob / static_cast<double>(d); });
  } else {
    if (n * d > cap) throw SizeError("ordered-scan state space exceeds cap");
    op.label = "depnet-ordered-scan";
    op.k = Matrix::Zero(n * d, n * d);
    for (Index i = 0; i < d; ++i)
      for (Index from = 0; from < n; ++from)
        resample(i, from, [&](Index to, double prob) { op.k(from + n * i, to + n * ((i + 1) % d)) += prob; });
  }
  op.validate();
  return op;
}

void TableGsn::validate() const {
  if (x_bits < 1 || h_bits < 1) throw ParameterError("table GSN needs at least one x bit and one h bit");
  if (f.rows() != nx() * nh() || f.cols() != nh()) throw ShapeError("f table has shape " + shape_string(f));
  if (g.rows() != nh() || g.cols() != nx()) throw ShapeError("g table has shape " + shape_string(g));
  for (const Matrix* t : {&f, &g})
    if ((t->array() < 0.0).any() || (t->rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-12)
      throw ParameterError("table GSN rows must be distributions");
}

JointChain joint_chain_operator(const TableGsn& gsn, Index cap, const StationaryOptions& opts) {
  gsn.validate();
  const Index nx = gsn.nx();
  const Index nh = gsn.nh();
  if (nx * nh > cap) throw SizeError("joint (x, h) space of " + std::to_string(nx * nh) + " states exceeds cap");
  const Index n = nx * nh;

  JointChain out;
  out.op.label = "table-gsn-joint";
  out.op.k = Matrix::Zero(n, n);
  for (Index x = 0; x < nx; ++x)
    for (Index h = 0; h < nh; ++h)
      for (Index h2 = 0; h2 < nh; ++h2) {
        const double fh = gsn.f(x * nh + h, h2);
        for (Index x2 = 0; x2 < nx; ++x2) out.op.k(x + nx * h, x2 + nx * h2) = fh * gsn.g(h2, x2);
      }
  out.op.validate();
  out.stationary = stationary_distribution(out.op.k, opts);
  out.x_marginal = RowVector::Zero(nx);
  for (Index s = 0; s < n; ++s) out.x_marginal(s % nx) += out.stationary(s);
  return out;
}

Matrix random_stochastic(Index n, Rng& rng, double concentration) {
  Matrix m(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) m(r, c) = std::pow(rng.uniform(), concentration) + 1e-3;
  for (Index r = 0; r < n; ++r) m.row(r) /= m.row(r).sum();
  return m;
}

TableGsn construct_consistent_gsn(const RowVector& px, Index h_bits, Rng& rng) {
  TableGsn t;
  t.x_bits = 0;
  while ((Index{1} << t.x_bits) < px.size()) ++t.x_bits;
  if ((Index{1} << t.x_bits) != px.size() || t.x_bits < 1) throw ShapeError("P(X0) must have 2^k entries, k >= 1");
  t.h_bits = h_bits;
  const Index nx = t.nx();
  const Index nh = t.nh();

  t.f = Matrix(nx * nh, nh);
  Matrix r(nx, nh);  // r(x, .) = P(H0 = . | X0 = x) = P(H1 = . | X0 = x)
  for (Index x = 0; x < nx; ++x) {
    const Matrix fx = random_stochastic(nh, rng);
    t.f.middleRows(x * nh, nh) = fx;
    r.row(x) = stationary_distribution(fx, {.tol = 1e-14});
  }
  t.g = Matrix(nh, nx);
  for (Index h = 0; h < nh; ++h) {
    for (Index x = 0; x < nx; ++x) t.g(h, x) = r(x, h) * px(x);
    t.g.row(h) /= t.g.row(h).sum();
  }
  return t;
}

}  // namespace gsn
