#pragma once

#include "gsn/chainlab.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gsn {

/// One analysed chain. lhs/rhs carry the battery's measured quantity and its
/// threshold; period/irreducible come from ergodicity_check.
struct TrialRow {
  std::string battery;
  Index trial = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  Index period = 0;
  bool irreducible = false;
};

struct BatteryResult {
  std::string name;
  std::string claim;
  std::vector<TrialRow> rows;

  bool passed() const;
};

/// Random table GSNs built to satisfy the hypotheses of the stationarity result;
/// lhs = max |pi_X - P(X0)|, rhs = tolerance.
BatteryResult stationarity_battery(Index trials, std::uint64_t seed, double tolerance = 1e-9);

/// Random ergodic pairs (K, K~) of at most max_states states; lhs/rhs are the
/// two sides of the perturbation bound.
BatteryResult perturbation_battery(Index trials, std::uint64_t seed, Index max_states = 16,
                                   NormConvention convention = NormConvention::RowStochastic);

/// Dependency networks: consistent conditionals of a known 2-bit joint,
/// fixed inconsistent 2-bit conditionals, and the ordered scan with index
/// over `ordered_variables` variables.
BatteryResult depnet_battery(std::uint64_t seed, Index ordered_variables = 3);

/// Ergodicity classifier against labelled chains. With inject_counterexample
/// a period-2 chain labelled ergodic is added, and the battery must fail.
BatteryResult ergodicity_battery(bool inject_counterexample = false);

/// The 2-bit joint [0.1, 0.2, 0.3, 0.4] used by the consistent dependency network.
RowVector reference_joint();
/// The fixed inconsistent 2-bit conditionals.
DepNetSpec inconsistent_depnet();

void write_rows_csv(std::ostream& out, const std::vector<TrialRow>& rows);
void write_rows_jsonl(std::ostream& out, const std::vector<TrialRow>& rows);

}  // namespace gsn
