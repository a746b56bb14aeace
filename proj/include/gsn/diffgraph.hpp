#pragma once

#include "gsn/core.hpp"
#include "gsn/rng.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gsn {

/// Named parameter matrices. An alias declared with tie_transpose owns no
/// storage: it reads as the transpose of its owner and its gradient is
/// accumulated, transposed, into the owner's.
class ParameterStore {
 public:
  void add(const std::string& name, Matrix value);
  void tie_transpose(const std::string& alias, const std::string& owner);

  bool contains(const std::string& name) const;
  bool is_alias(const std::string& name) const { return aliases_.count(name) > 0; }
  const std::string& owner_of(const std::string& name) const;

  /// Resolved value (a transposed copy for aliases).
  Matrix value(const std::string& name) const;
  const Matrix& owned(const std::string& name) const;
  Matrix& owned(const std::string& name);

  /// Owned parameter names in declaration order.
  const std::vector<std::string>& names() const { return order_; }

 private:
  std::map<std::string, Matrix> values_;
  std::map<std::string, std::string> aliases_;
  std::vector<std::string> order_;
};

/// Gradients keyed by owned parameter name.
using GradientMap = std::map<std::string, Matrix>;
using InputMap = std::map<std::string, Matrix>;

struct NodeId {
  std::size_t value = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

enum class OpKind { Input, Parameter, Constant, Affine, Tanh, Sigmoid, AddNoise, SampleDetach, Loss };
enum class SampleKind { Bernoulli, SaltAndPepper, Detach };
enum class LossKind { BernoulliNll, GaussianNll, Sum };

/// One `weight * input` product inside an affine node.
struct AffineTerm {
  NodeId weight;
  NodeId input;
};

/// Clamp applied to probabilities inside bernoulli_nll.
inline constexpr double kLogClamp = 1e-7;

/// Statically built reverse-mode graph over matrices. Nodes are appended in
/// topological order (a node may only reference earlier nodes), so the graph
/// is acyclic by construction.
///
/// Stochastic nodes (additive noise and samplers) draw from the Rng passed to
/// forward() and record their draws; replay() re-evaluates the graph with
/// those draws frozen, which is what finite-difference checks require.
/// During backward the recorded noise is a constant: additive noise passes
/// the gradient straight through, samplers block it.
class Graph {
 public:
  explicit Graph(const ParameterStore& params) : params_(&params) {}

  NodeId input(const std::string& name);
  NodeId parameter(const std::string& name);
  NodeId constant(Matrix value);
  /// sum_k weight_k * input_k + bias (bias is a column broadcast over columns).
  NodeId affine(std::vector<AffineTerm> terms, std::optional<NodeId> bias = std::nullopt);
  NodeId tanh(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId add_noise(NodeId x, double sigma);
  NodeId sample_bernoulli(NodeId probabilities);
  NodeId salt_and_pepper(NodeId x, double p);
  NodeId detach(NodeId x);
  /// -sum[t log p + (1-t) log(1-p)], p clamped to [kLogClamp, 1-kLogClamp].
  /// When p comes from a sigmoid node the backward pass sends p - t to the
  /// sigmoid input directly, so saturated units keep a gradient.
  NodeId bernoulli_nll(NodeId probabilities, NodeId target);
  /// sum[(m-t)^2 / (2 sigma^2) + log(sigma sqrt(2 pi))].
  NodeId gaussian_nll(NodeId mean, NodeId target, double sigma = 1.0);
  NodeId sum(const std::vector<NodeId>& terms);

  void forward(const InputMap& inputs, Rng& rng);
  /// Forward pass reusing the draws recorded by the last forward().
  void replay(const InputMap& inputs);
  /// Gradient of a scalar node with respect to every owned parameter.
  GradientMap backward(NodeId loss);

  const Matrix& value(NodeId id) const;
  /// Gradient of the last backward() loss with respect to a node's value.
  const Matrix& gradient(NodeId id) const;
  /// Draw recorded by a stochastic node during the last forward().
  const Matrix& recorded(NodeId id) const;
  double scalar(NodeId id) const;

  OpKind kind(NodeId id) const { return node(id).kind; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Node(OpKind k, std::vector<NodeId> p = {}) : kind(k), parents(std::move(p)) {}

    OpKind kind;
    std::vector<NodeId> parents;
    std::string name;  // input or parameter name
    double param = 0.0;  // sigma or corruption probability
    SampleKind sample = SampleKind::Detach;
    LossKind loss = LossKind::Sum;
    bool has_bias = false;
    Matrix value;
    Matrix grad;
    Matrix record;
    bool recorded = false;
  };

  NodeId push(Node n);
  const Node& node(NodeId id) const;
  void run(const InputMap& inputs, Rng* rng);

  const ParameterStore* params_;
  std::vector<Node> nodes_;
  bool evaluated_ = false;
  bool differentiated_ = false;
};

}  // namespace gsn
