#include "gsn/model.hpp"

#include "gsn/numeric.hpp"

#include <cmath>

namespace gsn {

Index GsnConfig::layer_size(Index layer) const {
  if (layer == 0) return visible_size;
  if (layer < 0 || layer > depth()) throw ParameterError("layer index " + std::to_string(layer) + " out of range");
  return hidden_sizes[static_cast<std::size_t>(layer - 1)];
}

void GsnConfig::validate() const {
  if (visible_size < 1) throw ParameterError("visible_size must be >= 1");
  if (hidden_sizes.empty()) throw ParameterError("at least one hidden layer is required");
  for (Index s : hidden_sizes)
    if (s < 1) throw ParameterError("hidden layer sizes must be >= 1");
  if (!(eta_in >= 0.0) || !(eta_out >= 0.0)) throw ParameterError("noise stds must be >= 0");
  if (!(input_corruption_p >= 0.0 && input_corruption_p <= 1.0))
    throw ParameterError("input_corruption_p must lie in [0, 1]");
  if (walkback_steps < 0) throw ParameterError("walkback_steps must be >= 1 (or 0 for 2D)");
}

std::string weight_name(Index layer) { return "W" + std::to_string(layer); }
std::string tied_name(Index layer) { return "W" + std::to_string(layer) + "^T"; }
std::string bias_name(Index layer) { return "b" + std::to_string(layer); }

namespace {

void declare_aliases(const GsnConfig& cfg, ParameterStore& store) {
  for (Index l = 1; l <= cfg.depth(); ++l) store.tie_transpose(tied_name(l), weight_name(l));
}

}  // namespace

GsnModel::GsnModel(GsnConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.seed);
  for (Index l = 1; l <= config_.depth(); ++l) {
    const Index fan_in = config_.layer_size(l - 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(config_.layer_size(l), fan_in);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    params_.add(weight_name(l), std::move(w));
  }
  for (Index l = 0; l <= config_.depth(); ++l) params_.add(bias_name(l), Matrix::Zero(config_.layer_size(l), 1));
  declare_aliases(config_, params_);
}

GsnModel::GsnModel(GsnConfig config, ParameterStore params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  for (Index l = 1; l <= config_.depth(); ++l) {
    const Matrix& w = params_.owned(weight_name(l));
    if (w.rows() != config_.layer_size(l) || w.cols() != config_.layer_size(l - 1))
      throw ShapeError(weight_name(l) + " has shape " + shape_string(w));
  }
  for (Index l = 0; l <= config_.depth(); ++l) {
    const Matrix& b = params_.owned(bias_name(l));
    if (b.rows() != config_.layer_size(l) || b.cols() != 1) throw ShapeError(bias_name(l) + " has shape " + shape_string(b));
  }
  if (!params_.contains(tied_name(1))) declare_aliases(config_, params_);
}

GsnState initial_state(const GsnModel& model, const Matrix& x) {
  const auto& cfg = model.config();
  if (x.rows() != cfg.visible_size) throw ShapeError("initial_state: visible has shape " + shape_string(x));
  GsnState s;
  s.x = x;
  s.x_mean = x;
  for (Index l = 1; l <= cfg.depth(); ++l) s.h.push_back(Matrix::Zero(cfg.layer_size(l), x.cols()));
  return s;
}

Matrix layer_update(const GsnModel& model, const GsnState& state, Index layer, Rng& rng, LayerNoise* noise) {
  const auto& cfg = model.config();
  if (layer < 1 || layer > cfg.depth()) throw ParameterError("layer_update: layer index out of range");
  const Matrix& below = layer == 1 ? state.x : state.h[static_cast<std::size_t>(layer - 2)];
  // Same accumulation order as the graph's affine node.
  Matrix a = matmul(model.weight(layer), below);
  if (layer < cfg.depth()) {
    const Matrix wt = model.weight(layer + 1).transpose();
    a += matmul(wt, state.h[static_cast<std::size_t>(layer)]);
  }
  a.colwise() += model.bias(layer).col(0);

  Matrix eta_in = gaussian_noise(rng, a.rows(), a.cols(), cfg.noise_in(layer));
  Matrix out = (a + eta_in).array().tanh().matrix();
  Matrix eta_out = gaussian_noise(rng, a.rows(), a.cols(), cfg.noise_out(layer));
  out += eta_out;
  if (noise) {
    noise->eta_in = std::move(eta_in);
    noise->eta_out = std::move(eta_out);
  }
  return out;
}

void update_hidden(const GsnModel& model, GsnState& state, Parity parity, Rng& rng) {
  const Index first = parity == Parity::Odd ? 1 : 2;
  for (Index l = first; l <= model.config().depth(); l += 2)
    state.h[static_cast<std::size_t>(l - 1)] = layer_update(model, state, l, rng);
}

Matrix reconstruct(const GsnModel& model, const Matrix& h1) {
  const Matrix wt = model.weight(1).transpose();
  Matrix a = matmul(wt, h1);
  a.colwise() += model.bias(0).col(0);
  if (model.config().visible_kind == VisibleKind::Binary) return sigmoid(a);
  return a;
}

Matrix sample_visible(const GsnModel& model, const Matrix& mean, Rng& rng) {
  if (model.config().visible_kind == VisibleKind::Binary) return bernoulli_sample(rng, mean);
  return mean;
}

Matrix corrupt(const GsnModel& model, const Matrix& x, Rng& rng) {
  return salt_and_pepper(rng, x, model.config().input_corruption_p);
}

GsnState half_step(const GsnModel& model, const GsnState& state, Parity parity, Rng& rng) {
  GsnState next = state;
  if (parity == Parity::Odd) {
    next.x = corrupt(model, state.x, rng);
    update_hidden(model, next, Parity::Odd, rng);
    next.x = state.x;
  } else {
    update_hidden(model, next, Parity::Even, rng);
    next.x_mean = reconstruct(model, next.h[0]);
    next.x = sample_visible(model, next.x_mean, rng);
  }
  return next;
}

GsnState chain_step(const GsnModel& model, const GsnState& state, Rng& rng) {
  return half_step(model, half_step(model, state, Parity::Odd, rng), Parity::Even, rng);
}

WalkbackGraph build_walkback_graph(const GsnModel& model, const Matrix& x0, const std::vector<Matrix>* h0) {
  const auto& cfg = model.config();
  if (x0.rows() != cfg.visible_size) throw ShapeError("walkback: x0 has shape " + shape_string(x0));
  const Index depth = cfg.depth();
  const Index batch = x0.cols();

  WalkbackGraph wb{Graph(model.params()), {}, {}, {}, {}, {}, {}, {}};
  Graph& g = wb.graph;
  wb.input = g.input("x0");
  wb.inputs["x0"] = x0;

  std::vector<NodeId> w, wt, b;
  for (Index l = 1; l <= depth; ++l) {
    w.push_back(g.parameter(weight_name(l)));
    wt.push_back(g.parameter(tied_name(l)));
  }
  for (Index l = 0; l <= depth; ++l) b.push_back(g.parameter(bias_name(l)));

  std::vector<NodeId> h;
  for (Index l = 1; l <= depth; ++l) {
    if (h0) {
      const std::string name = "h0_" + std::to_string(l);
      h.push_back(g.input(name));
      wb.inputs[name] = (*h0)[static_cast<std::size_t>(l - 1)];
    } else {
      h.push_back(g.constant(Matrix::Zero(cfg.layer_size(l), batch)));
    }
  }

  auto layer = [&](Index l, NodeId feed) {
    const auto li = static_cast<std::size_t>(l);
    std::vector<AffineTerm> terms{{w[li - 1], l == 1 ? feed : h[li - 2]}};
    if (l < depth) terms.push_back({wt[li], h[li]});
    NodeId a = g.affine(std::move(terms), b[li]);
    if (cfg.noise_in(l) > 0.0) a = g.add_noise(a, cfg.noise_in(l));
    NodeId out = g.tanh(a);
    if (cfg.noise_out(l) > 0.0) out = g.add_noise(out, cfg.noise_out(l));
    h[li - 1] = out;
  };

  NodeId feed = g.salt_and_pepper(wb.input, cfg.input_corruption_p);
  const Index steps = cfg.resolved_walkback();
  for (Index step = 0; step < steps; ++step) {
    for (Index l = 1; l <= depth; l += 2) layer(l, feed);
    for (Index l = 2; l <= depth; l += 2) layer(l, feed);
    wb.hidden.push_back(h);

    NodeId mean = g.affine({{wt[0], h[0]}}, b[0]);
    NodeId loss;
    if (cfg.visible_kind == VisibleKind::Binary) {
      mean = g.sigmoid(mean);
      loss = g.bernoulli_nll(mean, wb.input);
    } else {
      loss = g.gaussian_nll(mean, wb.input, 1.0);
    }
    wb.reconstructions.push_back(mean);
    wb.step_losses.push_back(loss);

    if (step + 1 < steps) {
      NodeId x = cfg.visible_kind == VisibleKind::Binary ? g.sample_bernoulli(mean) : g.detach(mean);
      wb.samples.push_back(x);
      feed = cfg.corrupt_every_step ? g.salt_and_pepper(x, cfg.input_corruption_p) : x;
    }
  }
  wb.loss = g.sum(wb.step_losses);
  return wb;
}

}  // namespace gsn
