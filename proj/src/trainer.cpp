#include "gsn/trainer.hpp"

#include "gsn/checkpoint.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace gsn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must lie in [0, 1)");
  if (!(lr_decay_per_epoch > 0.0 && lr_decay_per_epoch <= 1.0)) throw ParameterError("lr_decay_per_epoch must lie in (0, 1]");
  if (epochs < 0) throw ParameterError("epochs must be >= 0");
  if (minibatch_size < 1) throw ParameterError("minibatch_size must be >= 1");
}

double TrainConfig::learning_rate_at(Index epoch) const {
  return learning_rate * std::pow(lr_decay_per_epoch, static_cast<double>(epoch));
}

void TrainReport::write_csv(std::ostream& out) const {
  out << "epoch,mean_nll,lr\n";
  out.precision(17);
  for (const auto& e : epochs) out << e.epoch << ',' << e.mean_nll << ',' << e.learning_rate << '\n';
}

void MomentumSgd::step(ParameterStore& params, const GradientMap& grads, double learning_rate) {
  for (const auto& [name, g] : grads) {
    auto [it, fresh] = velocity_.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
    Matrix& v = it->second;
    v = momentum_ * v - learning_rate * g;
    params.owned(name) += v;
  }
}

std::uint64_t parameter_checksum(const ParameterStore& params) {
  std::string bytes;
  for (const auto& name : params.names()) {
    const Matrix& m = params.owned(name);
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) {
        const auto bits = std::bit_cast<std::uint64_t>(m(r, c));
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
      }
  }
  return fnv1a64(bytes);
}

TrainReport train_objective(ParameterStore& params, Index num_examples, const BatchObjective& objective,
                            const TrainConfig& config) {
  config.validate();
  if (num_examples < 1 && config.epochs > 0) throw ParameterError("train: dataset is empty");
  const auto start = std::chrono::steady_clock::now();

  Rng shuffle_rng(config.seed, 1);
  Rng noise_rng(config.seed, 2);
  MomentumSgd sgd(config.momentum);
  std::vector<Index> order(static_cast<std::size_t>(num_examples));
  std::iota(order.begin(), order.end(), Index{0});

  TrainReport report;
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    const double lr = config.learning_rate_at(epoch);
    double total = 0.0;
    Index batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(config.minibatch_size), ++batch_index) {
      const std::size_t count = std::min(order.size() - first, static_cast<std::size_t>(config.minibatch_size));
      const std::span<const Index> batch(order.data() + first, count);
      auto where = [&] { return " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index); };

      BatchResult result;
      try {
        result = objective(batch, noise_rng);
      } catch (const NumericalError& e) {
        throw TrainingError(std::string("training diverged") + where() + ": " + e.what());
      }
      if (!std::isfinite(result.loss)) throw TrainingError("non-finite loss" + where());
      for (auto& [name, g] : result.gradients) {
        if (!all_finite(g)) throw TrainingError("non-finite gradient for " + name + where());
        g /= static_cast<double>(count);
      }
      sgd.step(params, result.gradients, lr);
      total += result.loss;
    }
    report.epochs.push_back({epoch, total / static_cast<double>(num_examples), lr});
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.checksum = parameter_checksum(params);
  return report;
}

TrainReport train(GsnModel& model, const Matrix& data, const TrainConfig& config) {
  const auto& cfg = model.config();
  if (data.rows() < 1) throw ParameterError("train: dataset is empty");
  if (data.cols() != cfg.visible_size)
    throw ShapeError("train: dataset has " + std::to_string(data.cols()) + " columns, model expects " +
                     std::to_string(cfg.visible_size));

  // Last H1 reached by each example, used as its H0 when persist_h0 is set.
  std::vector<std::vector<Vector>> persisted;
  if (cfg.persist_h0) persisted.resize(static_cast<std::size_t>(data.rows()));

  auto objective = [&](std::span<const Index> batch, Rng& rng) {
    const auto cols = static_cast<Index>(batch.size());
    Matrix x0(cfg.visible_size, cols);
    for (Index c = 0; c < cols; ++c) x0.col(c) = data.row(batch[static_cast<std::size_t>(c)]).transpose();

    std::vector<Matrix> h0;
    if (cfg.persist_h0) {
      for (Index l = 1; l <= cfg.depth(); ++l) {
        Matrix layer = Matrix::Zero(cfg.layer_size(l), cols);
        for (Index c = 0; c < cols; ++c) {
          const auto& saved = persisted[static_cast<std::size_t>(batch[static_cast<std::size_t>(c)])];
          if (!saved.empty()) layer.col(c) = saved[static_cast<std::size_t>(l - 1)];
        }
        h0.push_back(std::move(layer));
      }
    }

    WalkbackGraph wb = build_walkback_graph(model, x0, cfg.persist_h0 ? &h0 : nullptr);
    wb.graph.forward(wb.inputs, rng);
    BatchResult result;
    result.loss = wb.graph.scalar(wb.loss);
    result.gradients = wb.graph.backward(wb.loss);

    if (cfg.persist_h0) {
      for (Index c = 0; c < cols; ++c) {
        auto& saved = persisted[static_cast<std::size_t>(batch[static_cast<std::size_t>(c)])];
        saved.clear();
        for (NodeId id : wb.hidden.front()) saved.push_back(wb.graph.value(id).col(c));
      }
    }
    return result;
  };

  TrainReport report = train_objective(model.params(), data.rows(), objective, config);
  report.checksum = checksum(model);
  return report;
}

}  // namespace gsn
