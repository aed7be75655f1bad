#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lipbound/activation.hpp"
#include "lipbound/affine.hpp"
#include "lipbound/report.hpp"
#include "lipbound/sequential.hpp"
#include "lipbound/spectral.hpp"

namespace lipbound {

enum class NodeKind { Input, Constant, Affine, Activation, Add, Subtract, Scale, Abs, Sin, Product, MaxPool };

std::string_view to_string(NodeKind kind);

/// Non-overlapping 2-D max pooling on [channels, h, w]; window == stride.
struct MaxPoolParams {
  std::size_t channels = 1;
  std::size_t in_h = 1;
  std::size_t in_w = 1;
  std::size_t window = 2;
};

struct GraphNode {
  NodeKind kind = NodeKind::Input;
  std::vector<std::size_t> inputs;
  Eigen::Index input_size = 0;               // Input
  std::optional<Tensor> value;               // Constant
  std::optional<AffineOperator> op;          // Affine
  std::optional<lipbound::Activation> act;   // Activation
  double scale = 1.0;                        // Scale
  MaxPoolParams pool;                        // MaxPool
};

/// DAG of typed nodes theta_0..theta_K. Node ids are indices into nodes();
/// inputs may reference any id, and the constructor checks that the graph
/// is acyclic, has exactly one input node, and that sizes are consistent.
class ComputationGraph {
 public:
  ComputationGraph(std::vector<GraphNode> nodes, std::size_t output);

  /// Builder entry point: a graph holding only its input node (id 0).
  explicit ComputationGraph(Eigen::Index input_size);

  std::size_t add_constant(Tensor value);
  std::size_t add_affine(std::size_t input, AffineOperator op);
  std::size_t add_activation(std::size_t input, lipbound::Activation act);
  std::size_t add_add(std::size_t a, std::size_t b);
  std::size_t add_subtract(std::size_t a, std::size_t b);
  std::size_t add_scale(std::size_t input, double c);
  std::size_t add_abs(std::size_t input);
  std::size_t add_sin(std::size_t input);
  std::size_t add_product(std::size_t a, std::size_t b);
  std::size_t add_maxpool(std::size_t input, MaxPoolParams params);
  void set_output(std::size_t id);

  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  std::size_t input() const noexcept { return input_; }
  std::size_t output() const noexcept { return output_; }
  Eigen::Index input_size() const;
  Eigen::Index node_size(std::size_t id) const { return sizes_.at(id); }
  const std::vector<std::size_t>& topological_order() const noexcept { return order_; }

  /// Values of every node at x (flattened).
  std::vector<Vector> evaluate_all(const Vector& x) const;
  Vector evaluate(const Vector& x) const;

 private:
  std::size_t append(GraphNode node);
  void analyze();

  std::vector<GraphNode> nodes_;
  std::size_t input_ = 0;
  std::size_t output_ = 0;
  std::vector<std::size_t> order_;
  std::vector<Eigen::Index> sizes_;
};

/// True for nodes with no path from the input; those are replaced by their
/// value theta_k(0) when bounding partial derivatives.
std::vector<bool> classify_constants(const ComputationGraph& g);

struct LipBoundTrace {
  std::vector<double> node_bounds;  // L_k per node id
  std::vector<bool> constant;
  double value = 0.0;               // L_K at the output node
};

/// Forward propagation L_k = sum_i max ||d_i g_k|| L_i over all predecessors
/// (the input included, L_0 = 1); constant predecessors contribute nothing.
/// Throws UnboundedPartial for a product of two input-dependent nodes.
LipBoundTrace autolip(const ComputationGraph& g, const PowerConfig& cfg = {});

ComputationGraph to_graph(const SequentialNet& net);

/// Product of layer operator norms times the activation Lipschitz constants.
BoundReport autolip_sequential(const SequentialNet& net, const PowerConfig& cfg = {});

BoundReport autolip_report(const ComputationGraph& g, const PowerConfig& cfg = {});

}  // namespace lipbound
