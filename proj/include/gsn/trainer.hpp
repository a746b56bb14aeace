#pragma once

#include "gsn/diffgraph.hpp"
#include "gsn/model.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

namespace gsn {

struct TrainConfig {
  double learning_rate = 0.25;
  double momentum = 0.5;
  double lr_decay_per_epoch = 0.99;
  Index epochs = 0;
  Index minibatch_size = 1;
  std::uint64_t seed = 0;

  void validate() const;
  /// lr0 * decay^epoch.
  double learning_rate_at(Index epoch) const;
};

struct EpochRecord {
  Index epoch = 0;
  double mean_nll = 0.0;
  double learning_rate = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double wall_seconds = 0.0;
  std::uint64_t checksum = 0;

  /// Header `epoch,mean_nll,lr`, one row per epoch.
  void write_csv(std::ostream& out) const;
};

/// v <- m v - lr g; theta <- theta + v.
class MomentumSgd {
 public:
  explicit MomentumSgd(double momentum) : momentum_(momentum) {}
  void step(ParameterStore& params, const GradientMap& grads, double learning_rate);
  const GradientMap& velocity() const { return velocity_; }

 private:
  double momentum_;
  GradientMap velocity_;
};

/// Summed loss over a minibatch and the gradient of that sum.
struct BatchResult {
  double loss = 0.0;
  GradientMap gradients;
};

using BatchObjective = std::function<BatchResult(std::span<const Index> batch, Rng& rng)>;

/// Momentum SGD over `num_examples` examples, shuffled each epoch by
/// Fisher-Yates on stream (seed, 1); the objective draws its noise from
/// stream (seed, 2). The step uses the batch-mean gradient. Throws
/// TrainingError naming the epoch and batch on a non-finite loss or gradient.
TrainReport train_objective(ParameterStore& params, Index num_examples, const BatchObjective& objective,
                            const TrainConfig& config);

/// Walkback training of a GSN on `data` (one example per row).
TrainReport train(GsnModel& model, const Matrix& data, const TrainConfig& config);

/// FNV-1a over the little-endian bytes of every owned parameter.
std::uint64_t parameter_checksum(const ParameterStore& params);

}  // namespace gsn
