#pragma once

#include "gsn/model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace gsn {

struct SampleRun {
  Index burn_in = 1000;
  Index num_samples = 0;
  Index thinning = 1;
  /// Visible coordinates held fixed; must come with clamp_values.
  std::optional<std::vector<bool>> clamp_mask;
  std::optional<Matrix> clamp_values;  // visible_size x 1
  /// Record the reconstruction mean instead of the sampled visible.
  bool collect_mean_field = false;
  /// Starting visible; defaults to i.i.d. Bernoulli(0.5) (binary) or zeros.
  std::optional<Matrix> initial_x;
  /// Called with the state after every chain step, burn-in included.
  std::function<void(const GsnState&)> observer;

  void validate(Index visible_size) const;
};

/// Runs the chain for burn_in steps, then collects num_samples visibles
/// (visible_size x 1 each), one every `thinning` steps.
std::vector<Matrix> sample(const GsnModel& model, const SampleRun& run, Rng& rng);

/// As sample(), but clamped coordinates stay at clamp_values every step and
/// only the free ones are resampled from the factorized reconstruction.
/// Free coordinates start i.i.d. Bernoulli(0.5) unless initial_x is given.
std::vector<Matrix> sample_clamped(const GsnModel& model, const SampleRun& run, Rng& rng);

/// Visible half of a clamped step: the reconstruction mean of h1 (exposed
/// for inspection) and the new visible with clamped entries restored.
struct ClampedUpdate {
  Matrix mean;
  Matrix x;
};
ClampedUpdate clamped_visible_update(const GsnModel& model, const Matrix& h1, const std::vector<bool>& mask,
                                     const Matrix& clamp_values, Rng& rng);

/// Stacks visible_size x 1 samples into an N x visible_size matrix.
Matrix stack_rows(const std::vector<Matrix>& samples);

}  // namespace gsn
