#include "lipbound/graph.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <queue>

#include "lipbound/error.hpp"

namespace lipbound {
namespace {

std::size_t arity(NodeKind kind) {
  switch (kind) {
    case NodeKind::Input:
    case NodeKind::Constant: return 0;
    case NodeKind::Add:
    case NodeKind::Subtract:
    case NodeKind::Product: return 2;
    default: return 1;
  }
}

Vector maxpool(const Vector& x, const MaxPoolParams& p) {
  const std::size_t oh = p.in_h / p.window;
  const std::size_t ow = p.in_w / p.window;
  Vector out(static_cast<Eigen::Index>(p.channels * oh * ow));
  for (std::size_t c = 0; c < p.channels; ++c)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xo = 0; xo < ow; ++xo) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t dy = 0; dy < p.window; ++dy)
          for (std::size_t dx = 0; dx < p.window; ++dx) {
            const auto idx = (c * p.in_h + y * p.window + dy) * p.in_w + xo * p.window + dx;
            best = std::max(best, x[static_cast<Eigen::Index>(idx)]);
          }
        out[static_cast<Eigen::Index>((c * oh + y) * ow + xo)] = best;
      }
  return out;
}

Vector eval_node(const GraphNode& node, const std::vector<Vector>& values, const Vector& x) {
  auto in = [&](std::size_t i) -> const Vector& { return values[node.inputs[i]]; };
  switch (node.kind) {
    case NodeKind::Input: return x;
    case NodeKind::Constant: return node.value->data();
    case NodeKind::Affine: return node.op->affine(in(0));
    case NodeKind::Activation: return node.act->apply(in(0));
    case NodeKind::Add: return in(0) + in(1);
    case NodeKind::Subtract: return in(0) - in(1);
    case NodeKind::Scale: return node.scale * in(0);
    case NodeKind::Abs: return in(0).cwiseAbs();
    case NodeKind::Sin: return in(0).array().sin().matrix();
    case NodeKind::Product: {
      const Vector& a = in(0);
      const Vector& b = in(1);
      if (a.size() == b.size()) return a.cwiseProduct(b);
      if (a.size() == 1) return a[0] * b;
      return b[0] * a;
    }
    case NodeKind::MaxPool: return maxpool(in(0), node.pool);
  }
  return {};
}

// max_z ||d g / d operand|| for a product whose other operand is the constant c.
double product_partial(Eigen::Index operand_size, const Vector& c) {
  if (c.size() == operand_size) return c.cwiseAbs().maxCoeff();
  if (c.size() == 1) return std::abs(c[0]);
  return c.norm();  // scalar operand scaling a constant vector
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Input: return "input";
    case NodeKind::Constant: return "constant";
    case NodeKind::Affine: return "affine";
    case NodeKind::Activation: return "activation";
    case NodeKind::Add: return "add";
    case NodeKind::Subtract: return "subtract";
    case NodeKind::Scale: return "scale";
    case NodeKind::Abs: return "abs";
    case NodeKind::Sin: return "sin";
    case NodeKind::Product: return "product";
    case NodeKind::MaxPool: return "maxpool";
  }
  return "unknown";
}

ComputationGraph::ComputationGraph(std::vector<GraphNode> nodes, std::size_t output)
    : nodes_(std::move(nodes)), output_(output) {
  analyze();
}

ComputationGraph::ComputationGraph(Eigen::Index input_size) {
  GraphNode in;
  in.kind = NodeKind::Input;
  in.input_size = input_size;
  nodes_.push_back(std::move(in));
  analyze();
}

std::size_t ComputationGraph::append(GraphNode node) {
  nodes_.push_back(std::move(node));
  const std::size_t id = nodes_.size() - 1;
  try {
    analyze();
  } catch (...) {
    nodes_.pop_back();
    analyze();
    throw;
  }
  output_ = id;
  return id;
}

std::size_t ComputationGraph::add_constant(Tensor value) {
  GraphNode n;
  n.kind = NodeKind::Constant;
  n.value = std::move(value);
  const auto prev = output_;
  const auto id = append(std::move(n));
  output_ = prev;  // a constant is rarely the intended output
  return id;
}

std::size_t ComputationGraph::add_affine(std::size_t input, AffineOperator op) {
  GraphNode n;
  n.kind = NodeKind::Affine;
  n.inputs = {input};
  n.op = std::move(op);
  return append(std::move(n));
}

std::size_t ComputationGraph::add_activation(std::size_t input, lipbound::Activation act) {
  GraphNode n;
  n.kind = NodeKind::Activation;
  n.inputs = {input};
  n.act = act;
  return append(std::move(n));
}

std::size_t ComputationGraph::add_add(std::size_t a, std::size_t b) {
  GraphNode n;
  n.kind = NodeKind::Add;
  n.inputs = {a, b};
  return append(std::move(n));
}

std::size_t ComputationGraph::add_subtract(std::size_t a, std::size_t b) {
  GraphNode n;
  n.kind = NodeKind::Subtract;
  n.inputs = {a, b};
  return append(std::move(n));
}

std::size_t ComputationGraph::add_scale(std::size_t input, double c) {
  GraphNode n;
  n.kind = NodeKind::Scale;
  n.inputs = {input};
  n.scale = c;
  return append(std::move(n));
}

std::size_t ComputationGraph::add_abs(std::size_t input) {
  GraphNode n;
  n.kind = NodeKind::Abs;
  n.inputs = {input};
  return append(std::move(n));
}

std::size_t ComputationGraph::add_sin(std::size_t input) {
  GraphNode n;
  n.kind = NodeKind::Sin;
  n.inputs = {input};
  return append(std::move(n));
}

std::size_t ComputationGraph::add_product(std::size_t a, std::size_t b) {
  GraphNode n;
  n.kind = NodeKind::Product;
  n.inputs = {a, b};
  return append(std::move(n));
}

std::size_t ComputationGraph::add_maxpool(std::size_t input, MaxPoolParams params) {
  GraphNode n;
  n.kind = NodeKind::MaxPool;
  n.inputs = {input};
  n.pool = params;
  return append(std::move(n));
}

void ComputationGraph::set_output(std::size_t id) {
  if (id >= nodes_.size()) throw Error(ErrorCode::InvalidArgument, "output id out of range");
  output_ = id;
}

Eigen::Index ComputationGraph::input_size() const { return nodes_[input_].input_size; }

void ComputationGraph::analyze() {
  const std::size_t n = nodes_.size();
  if (output_ >= n) throw Error(ErrorCode::InvalidArgument, "output id out of range");

  std::size_t inputs = 0;
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> users(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& node = nodes_[k];
    if (node.kind == NodeKind::Input) {
      ++inputs;
      input_ = k;
    }
    if (node.inputs.size() != arity(node.kind)) {
      throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(k) + " (" + std::string(to_string(node.kind)) +
                                                  ") expects " + std::to_string(arity(node.kind)) + " inputs");
    }
    for (auto i : node.inputs) {
      if (i >= n) throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(k) + " references missing node");
      ++indegree[k];
      users[i].push_back(k);
    }
    if (node.kind == NodeKind::Constant && !node.value)
      throw Error(ErrorCode::InvalidArgument, "constant node without value");
    if (node.kind == NodeKind::Affine && !node.op)
      throw Error(ErrorCode::InvalidArgument, "affine node without operator");
    if (node.kind == NodeKind::Activation && !node.act)
      throw Error(ErrorCode::InvalidArgument, "activation node without activation");
  }
  if (inputs != 1) throw Error(ErrorCode::InvalidArgument, "a graph needs exactly one input node");

  // Kahn's algorithm, smallest id first for a deterministic order.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t k = 0; k < n; ++k)
    if (indegree[k] == 0) ready.push(k);
  order_.clear();
  while (!ready.empty()) {
    const auto k = ready.top();
    ready.pop();
    order_.push_back(k);
    for (auto u : users[k])
      if (--indegree[u] == 0) ready.push(u);
  }
  if (order_.size() != n) throw Error(ErrorCode::CyclicGraph, "computation graph contains a cycle");

  sizes_.assign(n, 0);
  for (auto k : order_) {
    const auto& node = nodes_[k];
    auto in = [&](std::size_t i) { return sizes_[node.inputs[i]]; };
    Eigen::Index size = 0;
    switch (node.kind) {
      case NodeKind::Input:
        if (node.input_size < 1) throw Error(ErrorCode::ShapeMismatch, "input node needs a positive size");
        size = node.input_size;
        break;
      case NodeKind::Constant: size = static_cast<Eigen::Index>(node.value->size()); break;
      case NodeKind::Affine:
        if (in(0) != node.op->in_dim())
          throw Error(ErrorCode::ShapeMismatch, "affine node " + std::to_string(k) + " input size mismatch");
        size = node.op->out_dim();
        break;
      case NodeKind::Add:
      case NodeKind::Subtract:
        if (in(0) != in(1))
          throw Error(ErrorCode::ShapeMismatch, "node " + std::to_string(k) + " combines different sizes");
        size = in(0);
        break;
      case NodeKind::Product:
        if (in(0) != in(1) && in(0) != 1 && in(1) != 1)
          throw Error(ErrorCode::ShapeMismatch, "product node " + std::to_string(k) + " size mismatch");
        size = std::max(in(0), in(1));
        break;
      case NodeKind::MaxPool: {
        const auto& p = node.pool;
        if (p.window < 1 || p.in_h < p.window || p.in_w < p.window ||
            in(0) != static_cast<Eigen::Index>(p.channels * p.in_h * p.in_w))
          throw Error(ErrorCode::ShapeMismatch, "maxpool node " + std::to_string(k) + " geometry mismatch");
        size = static_cast<Eigen::Index>(p.channels * (p.in_h / p.window) * (p.in_w / p.window));
        break;
      }
      default: size = in(0);
    }
    sizes_[k] = size;
  }
}

std::vector<Vector> ComputationGraph::evaluate_all(const Vector& x) const {
  if (x.size() != input_size()) throw Error(ErrorCode::ShapeMismatch, "graph input has the wrong size");
  std::vector<Vector> values(nodes_.size());
  for (auto k : order_) values[k] = eval_node(nodes_[k], values, x);
  return values;
}

Vector ComputationGraph::evaluate(const Vector& x) const { return evaluate_all(x)[output_]; }

std::vector<bool> classify_constants(const ComputationGraph& g) {
  const auto& nodes = g.nodes();
  std::vector<bool> depends(nodes.size(), false);
  for (auto k : g.topological_order()) {
    if (nodes[k].kind == NodeKind::Input) {
      depends[k] = true;
      continue;
    }
    for (auto i : nodes[k].inputs) depends[k] = depends[k] || depends[i];
  }
  std::vector<bool> constant(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) constant[k] = !depends[k];
  return constant;
}

LipBoundTrace autolip(const ComputationGraph& g, const PowerConfig& cfg) {
  const auto& nodes = g.nodes();
  LipBoundTrace trace;
  trace.constant = classify_constants(g);
  trace.node_bounds.assign(nodes.size(), 0.0);

  // theta_k(0) for the constant nodes; they never read the input.
  std::vector<Vector> const_values(nodes.size());
  const Vector zero = Vector::Zero(g.input_size());
  for (auto k : g.topological_order()) {
    if (trace.constant[k]) const_values[k] = eval_node(nodes[k], const_values, zero);
  }

  for (auto k : g.topological_order()) {
    const auto& node = nodes[k];
    if (trace.constant[k]) continue;
    if (node.kind == NodeKind::Input) {
      trace.node_bounds[k] = 1.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t slot = 0; slot < node.inputs.size(); ++slot) {
      const auto i = node.inputs[slot];
      if (trace.constant[i]) continue;
      double partial = 1.0;
      switch (node.kind) {
        case NodeKind::Affine: partial = spectral_norm(node.op->linear_map(), cfg); break;
        case NodeKind::Activation: partial = node.act->lipschitz_constant(); break;
        case NodeKind::Scale: partial = std::abs(node.scale); break;
        case NodeKind::Product: {
          const auto other = node.inputs[1 - slot];
          if (!trace.constant[other]) {
            throw Error(ErrorCode::UnboundedPartial,
                        "product node " + std::to_string(k) + " multiplies two input-dependent values");
          }
          partial = product_partial(g.node_size(i), const_values[other]);
          break;
        }
        default: partial = 1.0;  // add, subtract, abs, sin, maxpool
      }
      total += partial * trace.node_bounds[i];
    }
    trace.node_bounds[k] = total;
  }
  trace.value = trace.node_bounds[g.output()];
  return trace;
}

ComputationGraph to_graph(const SequentialNet& net) {
  ComputationGraph g(net.in_dim());
  std::size_t last = g.input();
  for (const auto& layer : net.layers()) {
    if (const auto* op = std::get_if<AffineOperator>(&layer)) {
      last = g.add_affine(last, *op);
    } else {
      last = g.add_activation(last, std::get<Activation>(layer));
    }
  }
  g.set_output(last);
  return g;
}

BoundReport autolip_sequential(const SequentialNet& net, const PowerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  BoundReport report;
  report.method = "autolip";
  report.direction = BoundDirection::Upper;
  nlohmann::json iterations = nlohmann::json::array();
  nlohmann::json converged = nlohmann::json::array();
  double value = 1.0;
  for (const auto& op : net.affine_layers()) {
    const auto r = power_method(op.linear_map(), cfg);
    report.breakdown.push_back(r.triplet.s);
    iterations.push_back(r.iterations);
    converged.push_back(r.converged);
    value *= r.triplet.s;
  }
  nlohmann::json act_constants = nlohmann::json::array();
  for (const auto& a : net.activations()) {
    act_constants.push_back(a.lipschitz_constant());
    value *= a.lipschitz_constant();
  }
  report.value = value;
  report.config = {{"power", cfg.to_json()},
                   {"iterations", iterations},
                   {"converged", converged},
                   {"activation_lipschitz", act_constants}};
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

BoundReport autolip_report(const ComputationGraph& g, const PowerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto trace = autolip(g, cfg);
  BoundReport report;
  report.method = "autolip-graph";
  report.direction = BoundDirection::Upper;
  report.value = trace.value;
  report.breakdown = trace.node_bounds;
  nlohmann::json constant = nlohmann::json::array();
  for (bool c : trace.constant) constant.push_back(c);
  report.config = {{"power", cfg.to_json()}, {"constant", constant}, {"output", g.output()}};
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace lipbound
