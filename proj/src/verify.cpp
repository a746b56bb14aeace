#include "gsn/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace gsn {

bool BatteryResult::passed() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const TrialRow& r) { return r.holds; });
}

namespace {

RowVector random_distribution(Index n, Rng& rng) {
  RowVector p(n);
  for (Index i = 0; i < n; ++i) p(i) = 0.05 + rng.uniform();
  return p / p.sum();
}

TrialRow row_for(const std::string& battery, Index trial, const ChainOperator& op) {
  const auto e = ergodicity_check(op);
  TrialRow r;
  r.battery = battery;
  r.trial = trial;
  r.period = e.period;
  r.irreducible = e.irreducible;
  return r;
}

// Random ergodic chain: a random support with a positive diagonal and a
// Hamiltonian cycle, weighted by uniform^concentration.
Matrix random_ergodic(Index n, Rng& rng) {
  const double concentration = std::array<double, 3>{1.0, 3.0, 8.0}[rng.below(3)];
  const double density = std::array<double, 3>{1.0, 0.5, 0.2}[rng.below(3)];
  Matrix k = Matrix::Zero(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c)
      if (r == c || c == (r + 1) % n || rng.uniform() < density) k(r, c) = std::pow(rng.uniform(), concentration) + 1e-4;
  for (Index r = 0; r < n; ++r) k.row(r) /= k.row(r).sum();
  return k;
}

}  // namespace

BatteryResult stationarity_battery(Index trials, std::uint64_t seed, double tolerance) {
  BatteryResult result{"stationarity", "x-marginal of the joint chain's stationary law equals P(X0)", {}};
  Rng rng(seed);
  for (Index t = 0; t < trials; ++t) {
    const Index x_bits = 1 + static_cast<Index>(rng.below(3));
    const Index h_bits = 1 + static_cast<Index>(rng.below(3));
    const RowVector px = random_distribution(Index{1} << x_bits, rng);
    const TableGsn gsn = construct_consistent_gsn(px, h_bits, rng);
    const JointChain chain = joint_chain_operator(gsn);
    TrialRow row = row_for(result.name, t, chain.op);
    row.lhs = (chain.x_marginal - px).cwiseAbs().maxCoeff();
    row.rhs = tolerance;
    row.holds = row.lhs <= tolerance;
    result.rows.push_back(row);
  }
  return result;
}

BatteryResult perturbation_battery(Index trials, std::uint64_t seed, Index max_states, NormConvention convention) {
  BatteryResult result{"perturbation", "||pi - pi~||_1 <= ||Z||_inf ||K - K~||_inf + 1e-9", {}};
  Rng rng(seed);
  for (Index t = 0; t < trials; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_states - 1)));
    ChainOperator k{random_ergodic(n, rng), "K"};
    const double scale = std::array<double, 4>{1e-4, 1e-2, 1e-1, 1.0}[rng.below(4)];
    Matrix noisy = k.k;
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) noisy(r, c) += scale * rng.uniform();
    for (Index r = 0; r < n; ++r) noisy.row(r) /= noisy.row(r).sum();
    ChainOperator k_tilde{noisy, "K~"};

    TrialRow row = row_for(result.name, t, k);
    const auto bound = schweitzer_bound(k, k_tilde, convention);
    row.lhs = bound.lhs;
    row.rhs = bound.rhs;
    row.holds = bound.holds && ergodicity_check(k).ergodic && ergodicity_check(k_tilde).ergodic;
    result.rows.push_back(row);
  }
  return result;
}

RowVector reference_joint() {
  RowVector p(4);
  p << 0.1, 0.2, 0.3, 0.4;
  return p;
}

DepNetSpec inconsistent_depnet() {
  DepNetSpec spec{2, {Matrix(2, 2), Matrix(2, 2)}, ScanMode::RandomScan};
  // P_0(x0 | x1): context = x1.
  spec.conditionals[0] << 0.1, 0.9,  //
      0.8, 0.2;
  // P_1(x1 | x0): context = x0.
  spec.conditionals[1] << 0.2, 0.8,  //
      0.3, 0.7;
  return spec;
}

BatteryResult depnet_battery(std::uint64_t seed, Index ordered_variables) {
  BatteryResult result{"depnet", "random scan recovers consistent joints, is ergodic for inconsistent ones; ordered scan has period d", {}};

  {
    const RowVector joint = reference_joint();
    const ChainOperator op = depnet_operator(conditionals_from_joint(joint, 2));
    TrialRow row = row_for(result.name, 0, op);
    row.lhs = (stationary_distribution(op.k, {.tol = 1e-14}) - joint).cwiseAbs().maxCoeff();
    row.rhs = 1e-10;
    row.holds = row.lhs <= row.rhs;
    result.rows.push_back(row);
  }
  {
    const ChainOperator op = depnet_operator(inconsistent_depnet());
    TrialRow row = row_for(result.name, 1, op);
    bool ok = ergodicity_check(op).ergodic;
    try {
      const RowVector pi = stationary_distribution(op.k, {.tol = 1e-14});
      row.lhs = (pi * op.k - pi).lpNorm<1>();
      ok = ok && std::abs(pi.sum() - 1.0) <= 1e-12;
    } catch (const ConvergenceError&) {
      ok = false;
    }
    row.rhs = 1e-10;
    row.holds = ok && row.lhs <= row.rhs;
    result.rows.push_back(row);
  }
  {
    Rng rng(seed);
    const RowVector joint = random_distribution(Index{1} << ordered_variables, rng);
    const ChainOperator op = depnet_operator(conditionals_from_joint(joint, ordered_variables, ScanMode::OrderedWithIndex));
    TrialRow row = row_for(result.name, 2, op);
    row.lhs = static_cast<double>(row.period);
    row.rhs = static_cast<double>(ordered_variables);
    row.holds = row.irreducible && row.period == ordered_variables;
    result.rows.push_back(row);
  }
  return result;
}

BatteryResult ergodicity_battery(bool inject_counterexample) {
  BatteryResult result{"ergodicity", "classifier agrees with labelled chains", {}};
  struct Labelled {
    Matrix k;
    bool ergodic;
  };
  std::vector<Labelled> cases;
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  cases.push_back({swap, false});
  cases.push_back({Matrix::Constant(3, 3, 1.0 / 3.0), true});
  Matrix lazy_cycle = Matrix::Zero(3, 3);
  lazy_cycle << 0.5, 0.5, 0, 0, 0.5, 0.5, 0.5, 0, 0.5;
  cases.push_back({lazy_cycle, true});
  cases.push_back({Matrix::Identity(2, 2), false});
  if (inject_counterexample) cases.push_back({swap, true});

  for (std::size_t i = 0; i < cases.size(); ++i) {
    const ChainOperator op{cases[i].k, "labelled"};
    TrialRow row = row_for(result.name, static_cast<Index>(i), op);
    const bool ergodic = ergodicity_check(op).ergodic;
    row.lhs = ergodic ? 1.0 : 0.0;
    row.rhs = cases[i].ergodic ? 1.0 : 0.0;
    row.holds = ergodic == cases[i].ergodic;
    result.rows.push_back(row);
  }
  return result;
}

void write_rows_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "battery,trial,lhs,rhs,holds,period,irreducible\n";
  out << std::setprecision(17);
  for (const auto& r : rows)
    out << r.battery << ',' << r.trial << ',' << r.lhs << ',' << r.rhs << ',' << (r.holds ? 1 : 0) << ',' << r.period
        << ',' << (r.irreducible ? 1 : 0) << '\n';
}

void write_rows_jsonl(std::ostream& out, const std::vector<TrialRow>& rows) {
  for (const auto& r : rows) {
    nlohmann::json j{{"battery", r.battery}, {"trial", r.trial},   {"lhs", r.lhs},
                     {"rhs", r.rhs},         {"holds", r.holds},   {"period", r.period},
                     {"irreducible", r.irreducible}};
    out << j.dump() << '\n';
  }
}

}  // namespace gsn
