#pragma once

#include "gsn/core.hpp"
#include "gsn/diffgraph.hpp"
#include "gsn/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gsn {

enum class VisibleKind { Binary, Real };

/// Hyper-parameters of a GSN with D = hidden_sizes.size() hidden layers.
/// D = 1 is the denoising autoencoder.
struct GsnConfig {
  Index visible_size = 0;
  std::vector<Index> hidden_sizes;
  /// Pre- and post-activation noise stds, applied to hidden layers 2..D only;
  /// layer 1 is always noiseless.
  double eta_in = 2.0;
  double eta_out = 2.0;
  double input_corruption_p = 0.4;
  /// Reconstructions produced by the unrolled training graph; 0 means 2 * D.
  Index walkback_steps = 0;
  VisibleKind visible_kind = VisibleKind::Binary;
  std::uint64_t seed = 0;
  /// Corrupt every resampled visible inside the walkback graph, not only x0.
  bool corrupt_every_step = true;
  /// Start each walkback chain from the hidden state its example reached
  /// last time instead of zeros.
  bool persist_h0 = false;

  Index depth() const { return static_cast<Index>(hidden_sizes.size()); }
  Index resolved_walkback() const { return walkback_steps > 0 ? walkback_steps : 2 * depth(); }
  /// Layer sizes with the visible layer at index 0.
  Index layer_size(Index layer) const;
  double noise_in(Index layer) const { return layer >= 2 ? eta_in : 0.0; }
  double noise_out(Index layer) const { return layer >= 2 ? eta_out : 0.0; }
  void validate() const;
};

std::string weight_name(Index layer);
std::string tied_name(Index layer);
std::string bias_name(Index layer);

class GsnModel {
 public:
  /// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] from Rng(seed),
  /// biases zero.
  explicit GsnModel(GsnConfig config);
  /// Adopts an existing parameter set (checkpoint load).
  GsnModel(GsnConfig config, ParameterStore params);

  const GsnConfig& config() const { return config_; }
  const ParameterStore& params() const { return params_; }
  ParameterStore& params() { return params_; }

  const Matrix& weight(Index layer) const { return params_.owned(weight_name(layer)); }
  const Matrix& bias(Index layer) const { return params_.owned(bias_name(layer)); }

 private:
  GsnConfig config_;
  ParameterStore params_;
};

/// Chain state. Every matrix holds one chain per column.
struct GsnState {
  Matrix x;               // visible, uncorrupted
  std::vector<Matrix> h;  // h[l-1] is hidden layer l
  Matrix x_mean;          // reconstruction mean behind the latest x
};

enum class Parity { Odd, Even };

/// x given, hidden layers zero.
GsnState initial_state(const GsnModel& model, const Matrix& x);

struct LayerNoise {
  Matrix eta_in;
  Matrix eta_out;
};

/// eta_out + tanh(eta_in + a) for hidden layer `layer`, where a is
/// W_l * below + b_l plus W_{l+1}^T * above when layer l+1 exists. For
/// layer 1 `below` is state.x exactly as given.
Matrix layer_update(const GsnModel& model, const GsnState& state, Index layer, Rng& rng, LayerNoise* noise = nullptr);

/// Updates all hidden layers of one parity in place (state.x fed as given).
void update_hidden(const GsnModel& model, GsnState& state, Parity parity, Rng& rng);

/// Mean of the reconstruction distribution given h1: sigmoid for binary
/// visibles, identity for real ones.
Matrix reconstruct(const GsnModel& model, const Matrix& h1);

/// Binary: Bernoulli(mean). Real: the mean itself.
Matrix sample_visible(const GsnModel& model, const Matrix& mean, Rng& rng);

Matrix corrupt(const GsnModel& model, const Matrix& x, Rng& rng);

/// Half of a chain step. Odd: corrupt x and update odd hidden layers from
/// it. Even: update even hidden layers, then resample x from h1.
GsnState half_step(const GsnModel& model, const GsnState& state, Parity parity, Rng& rng);

/// One full alternation (odd half then even half). Draw order is fixed and
/// identical to the walkback graph's, so the two agree under a shared seed.
GsnState chain_step(const GsnModel& model, const GsnState& state, Rng& rng);

struct WalkbackGraph {
  Graph graph;
  InputMap inputs;  // x0 and, with persist_h0, the initial hidden layers
  NodeId input;
  NodeId loss;
  std::vector<NodeId> step_losses;
  std::vector<NodeId> reconstructions;  // per-step reconstruction means
  std::vector<NodeId> samples;          // detached resampled visibles
  std::vector<std::vector<NodeId>> hidden;  // hidden[step][l-1]
};

/// Walkback training graph for the minibatch x0 (one example per column):
/// resolved_walkback() chain steps from the corrupted x0 with H0 = zeros (or
/// `h0` when given), loss = sum over steps of the reconstruction NLL of x0.
/// Resampled visibles enter the next step through sample-detach nodes.
WalkbackGraph build_walkback_graph(const GsnModel& model, const Matrix& x0, const std::vector<Matrix>* h0 = nullptr);

}  // namespace gsn
