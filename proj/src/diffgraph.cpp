#include "gsn/diffgraph.hpp"

#include "gsn/numeric.hpp"

#include <cmath>
#include <numbers>

namespace gsn {

void ParameterStore::add(const std::string& name, Matrix value) {
  if (contains(name)) throw GraphError("parameter '" + name + "' declared twice");
  values_.emplace(name, std::move(value));
  order_.push_back(name);
}

void ParameterStore::tie_transpose(const std::string& alias, const std::string& owner) {
  if (contains(alias)) throw GraphError("parameter '" + alias + "' declared twice");
  if (!values_.count(owner)) throw GraphError("tied alias '" + alias + "' refers to unknown owner '" + owner + "'");
  aliases_.emplace(alias, owner);
}

bool ParameterStore::contains(const std::string& name) const {
  return values_.count(name) > 0 || aliases_.count(name) > 0;
}

const std::string& ParameterStore::owner_of(const std::string& name) const {
  if (auto it = aliases_.find(name); it != aliases_.end()) return it->second;
  if (auto it = values_.find(name); it != values_.end()) return it->first;
  throw GraphError("unknown parameter '" + name + "'");
}

Matrix ParameterStore::value(const std::string& name) const {
  if (auto it = aliases_.find(name); it != aliases_.end()) return values_.at(it->second).transpose();
  return owned(name);
}

const Matrix& ParameterStore::owned(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw GraphError("unknown owned parameter '" + name + "'");
  return it->second;
}

Matrix& ParameterStore::owned(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw GraphError("unknown owned parameter '" + name + "'");
  return it->second;
}

NodeId Graph::push(Node n) {
  for (NodeId p : n.parents)
    if (p.value >= nodes_.size()) throw GraphError("node refers to a parent that does not exist yet");
  nodes_.push_back(std::move(n));
  evaluated_ = false;
  return NodeId{nodes_.size() - 1};
}

const Graph::Node& Graph::node(NodeId id) const {
  if (id.value >= nodes_.size()) throw GraphError("unknown node id " + std::to_string(id.value));
  return nodes_[id.value];
}

NodeId Graph::input(const std::string& name) {
  Node n{OpKind::Input, {}};
  n.name = name;
  return push(std::move(n));
}

NodeId Graph::parameter(const std::string& name) {
  if (!params_->contains(name)) throw GraphError("unknown parameter '" + name + "'");
  Node n{OpKind::Parameter, {}};
  n.name = name;
  return push(std::move(n));
}

NodeId Graph::constant(Matrix value) {
  Node n{OpKind::Constant, {}};
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::affine(std::vector<AffineTerm> terms, std::optional<NodeId> bias) {
  if (terms.empty()) throw GraphError("affine node needs at least one term");
  Node n{OpKind::Affine, {}};
  for (const auto& t : terms) {
    n.parents.push_back(t.weight);
    n.parents.push_back(t.input);
  }
  if (bias) {
    n.parents.push_back(*bias);
    n.has_bias = true;
  }
  return push(std::move(n));
}

NodeId Graph::tanh(NodeId x) { return push(Node{OpKind::Tanh, {x}}); }
NodeId Graph::sigmoid(NodeId x) { return push(Node{OpKind::Sigmoid, {x}}); }

NodeId Graph::add_noise(NodeId x, double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("add_noise: sigma must be >= 0");
  Node n{OpKind::AddNoise, {x}};
  n.param = sigma;
  return push(std::move(n));
}

NodeId Graph::sample_bernoulli(NodeId probabilities) {
  Node n{OpKind::SampleDetach, {probabilities}};
  n.sample = SampleKind::Bernoulli;
  return push(std::move(n));
}

NodeId Graph::salt_and_pepper(NodeId x, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("salt_and_pepper: p must lie in [0, 1]");
  Node n{OpKind::SampleDetach, {x}};
  n.sample = SampleKind::SaltAndPepper;
  n.param = p;
  return push(std::move(n));
}

NodeId Graph::detach(NodeId x) {
  Node n{OpKind::SampleDetach, {x}};
  n.sample = SampleKind::Detach;
  return push(std::move(n));
}

NodeId Graph::bernoulli_nll(NodeId probabilities, NodeId target) {
  Node n{OpKind::Loss, {probabilities, target}};
  n.loss = LossKind::BernoulliNll;
  return push(std::move(n));
}

NodeId Graph::gaussian_nll(NodeId mean, NodeId target, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian_nll: sigma must be > 0");
  Node n{OpKind::Loss, {mean, target}};
  n.loss = LossKind::GaussianNll;
  n.param = sigma;
  return push(std::move(n));
}

NodeId Graph::sum(const std::vector<NodeId>& terms) {
  if (terms.empty()) throw GraphError("sum node needs at least one term");
  Node n{OpKind::Loss, terms};
  n.loss = LossKind::Sum;
  return push(std::move(n));
}

void Graph::forward(const InputMap& inputs, Rng& rng) { run(inputs, &rng); }

void Graph::replay(const InputMap& inputs) {
  for (const auto& n : nodes_)
    if ((n.kind == OpKind::AddNoise || n.kind == OpKind::SampleDetach) && !n.recorded)
      throw StateError("replay requires a prior forward pass");
  run(inputs, nullptr);
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": " + shape_string(a) + " vs " + shape_string(b));
}

double clamp_probability(double p) { return std::min(std::max(p, kLogClamp), 1.0 - kLogClamp); }

}  // namespace

void Graph::run(const InputMap& inputs, Rng* rng) {
  for (auto& n : nodes_) {
    auto parent = [&](std::size_t i) -> const Matrix& { return nodes_[n.parents[i].value].value; };
    switch (n.kind) {
      case OpKind::Input: {
        auto it = inputs.find(n.name);
        if (it == inputs.end()) throw GraphError("input '" + n.name + "' is not bound");
        n.value = it->second;
        break;
      }
      case OpKind::Parameter:
        n.value = params_->value(n.name);
        break;
      case OpKind::Constant:
        break;
      case OpKind::Affine: {
        const std::size_t terms = (n.parents.size() - (n.has_bias ? 1 : 0)) / 2;
        Matrix acc = matmul(parent(0), parent(1));
        for (std::size_t t = 1; t < terms; ++t) {
          Matrix part = matmul(parent(2 * t), parent(2 * t + 1));
          require_same_shape(acc, part, "affine term");
          acc += part;
        }
        if (n.has_bias) {
          const Matrix& b = parent(n.parents.size() - 1);
          if (b.cols() != 1 || b.rows() != acc.rows())
            throw ShapeError("affine bias " + shape_string(b) + " for output " + shape_string(acc));
          acc.colwise() += b.col(0);
        }
        n.value = std::move(acc);
        break;
      }
      case OpKind::Tanh:
        n.value = parent(0).array().tanh().matrix();
        break;
      case OpKind::Sigmoid:
        n.value = gsn::sigmoid(parent(0));
        break;
      case OpKind::AddNoise: {
        const Matrix& x = parent(0);
        if (rng) {
          n.record = gaussian_noise(*rng, x.rows(), x.cols(), n.param);
          n.recorded = true;
        }
        require_same_shape(x, n.record, "recorded noise");
        n.value = x + n.record;
        break;
      }
      case OpKind::SampleDetach: {
        const Matrix& x = parent(0);
        if (rng || !n.recorded) {
          if (n.sample == SampleKind::Detach) {
            n.record = x;
          } else {
            if (!rng) throw StateError("sampling node evaluated without an rng");
            n.record = n.sample == SampleKind::Bernoulli ? bernoulli_sample(*rng, x) : gsn::salt_and_pepper(*rng, x, n.param);
          }
          n.recorded = true;
        }
        n.value = n.record;
        break;
      }
      case OpKind::Loss: {
        double total = 0.0;
        if (n.loss == LossKind::Sum) {
          for (std::size_t i = 0; i < n.parents.size(); ++i) {
            if (parent(i).size() != 1) throw ShapeError("sum node expects scalar terms");
            total += parent(i)(0, 0);
          }
        } else {
          const Matrix& a = parent(0);
          const Matrix& t = parent(1);
          require_same_shape(a, t, n.loss == LossKind::BernoulliNll ? "bernoulli_nll" : "gaussian_nll");
          if (n.loss == LossKind::BernoulliNll) {
            for (Index i = 0; i < a.size(); ++i) {
              const double p = clamp_probability(a.data()[i]);
              const double y = t.data()[i];
              total -= y * std::log(p) + (1.0 - y) * std::log1p(-p);
            }
          } else {
            const double var = n.param * n.param;
            const double log_norm = std::log(n.param) + 0.5 * std::log(2.0 * std::numbers::pi);
            total = (a - t).squaredNorm() / (2.0 * var) + log_norm * static_cast<double>(a.size());
          }
        }
        n.value = Matrix::Constant(1, 1, total);
        break;
      }
    }
    if (!all_finite(n.value)) throw NumericalError("non-finite value produced at node " + std::to_string(&n - nodes_.data()));
  }
  evaluated_ = true;
  differentiated_ = false;
}

GradientMap Graph::backward(NodeId loss) {
  if (!evaluated_) throw StateError("backward called before forward");
  const Node& root = node(loss);
  if (root.value.size() != 1) throw ShapeError("backward: loss node is not scalar");

  for (auto& n : nodes_) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  nodes_[loss.value].grad(0, 0) = 1.0;

  GradientMap grads;
  for (const auto& name : params_->names()) {
    const Matrix& p = params_->owned(name);
    grads[name] = Matrix::Zero(p.rows(), p.cols());
  }

  for (std::size_t i = loss.value + 1; i-- > 0;) {
    Node& n = nodes_[i];
    const Matrix& g = n.grad;
    auto pgrad = [&](std::size_t k) -> Matrix& { return nodes_[n.parents[k].value].grad; };
    auto pval = [&](std::size_t k) -> const Matrix& { return nodes_[n.parents[k].value].value; };
    switch (n.kind) {
      case OpKind::Input:
      case OpKind::Constant:
      case OpKind::SampleDetach:
        break;
      case OpKind::Parameter: {
        const std::string& owner = params_->owner_of(n.name);
        if (params_->is_alias(n.name))
          grads[owner] += g.transpose();
        else
          grads[owner] += g;
        break;
      }
      case OpKind::Affine: {
        const std::size_t terms = (n.parents.size() - (n.has_bias ? 1 : 0)) / 2;
        for (std::size_t t = 0; t < terms; ++t) {
          const Matrix& w = pval(2 * t);
          const Matrix& x = pval(2 * t + 1);
          pgrad(2 * t).noalias() += g * x.transpose();
          pgrad(2 * t + 1).noalias() += w.transpose() * g;
        }
        if (n.has_bias) pgrad(n.parents.size() - 1) += g.rowwise().sum();
        break;
      }
      case OpKind::Tanh:
        pgrad(0).array() += g.array() * (1.0 - n.value.array().square());
        break;
      case OpKind::Sigmoid:
        pgrad(0).array() += g.array() * n.value.array() * (1.0 - n.value.array());
        break;
      case OpKind::AddNoise:
        pgrad(0) += g;
        break;
      case OpKind::Loss: {
        const double upstream = g(0, 0);
        if (n.loss == LossKind::Sum) {
          for (std::size_t k = 0; k < n.parents.size(); ++k) pgrad(k)(0, 0) += upstream;
        } else if (n.loss == LossKind::BernoulliNll) {
          const Matrix& a = pval(0);
          const Matrix& t = pval(1);
          Matrix& ga = pgrad(0);
          Matrix& gt = pgrad(1);
          // Fed by a sigmoid: hand p - t straight to the logits. It equals the
          // chained derivative wherever the clamp is inactive and does not
          // vanish for saturated units.
          Node& src = nodes_[n.parents[0].value];
          Matrix* logits = src.kind == OpKind::Sigmoid ? &nodes_[src.parents[0].value].grad : nullptr;
          for (Index k = 0; k < a.size(); ++k) {
            const double raw = a.data()[k];
            const double p = clamp_probability(raw);
            const double y = t.data()[k];
            if (logits)
              logits->data()[k] += upstream * (raw - y);
            else if (raw > kLogClamp && raw < 1.0 - kLogClamp)
              ga.data()[k] += upstream * (-y / p + (1.0 - y) / (1.0 - p));
            gt.data()[k] += upstream * (std::log1p(-p) - std::log(p));
          }
        } else {
          const Matrix diff = (pval(0) - pval(1)) / (n.param * n.param);
          pgrad(0) += upstream * diff;
          pgrad(1) -= upstream * diff;
        }
        break;
      }
    }
  }
  differentiated_ = true;
  return grads;
}

const Matrix& Graph::value(NodeId id) const {
  if (!evaluated_) throw StateError("value read before forward");
  return node(id).value;
}

const Matrix& Graph::gradient(NodeId id) const {
  if (!differentiated_) throw StateError("gradient read before backward");
  return node(id).grad;
}

const Matrix& Graph::recorded(NodeId id) const {
  const Node& n = node(id);
  if (!n.recorded) throw StateError("node has no recorded draw");
  return n.record;
}

double Graph::scalar(NodeId id) const {
  const Matrix& v = value(id);
  if (v.size() != 1) throw ShapeError("scalar() on a non-scalar node");
  return v(0, 0);
}

}  // namespace gsn
