#pragma once

#include <variant>
#include <vector>

#include "lipbound/activation.hpp"
#include "lipbound/affine.hpp"

namespace lipbound {

using Layer = std::variant<AffineOperator, Activation>;

/// T_K o rho_{K-1} o ... o rho_1 o T_1: affine layers strictly alternating
/// with elementwise activations, starting and ending with an affine layer.
/// Adjacent affine layers compose on flattened sizes, so a dense layer may
/// follow a convolution.
class SequentialNet {
 public:
  explicit SequentialNet(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const std::vector<AffineOperator>& affine_layers() const noexcept { return affine_; }
  const std::vector<Activation>& activations() const noexcept { return activations_; }
  /// Number of affine layers K.
  std::size_t depth() const noexcept { return affine_.size(); }

  const Shape& input_shape() const { return affine_.front().input_shape(); }
  const Shape& output_shape() const { return affine_.back().output_shape(); }
  Eigen::Index in_dim() const { return affine_.front().in_dim(); }
  Eigen::Index out_dim() const { return affine_.back().out_dim(); }

  Vector forward(const Vector& x) const;
  Tensor forward(const Tensor& x) const;

 private:
  std::vector<Layer> layers_;
  std::vector<AffineOperator> affine_;
  std::vector<Activation> activations_;
};

/// J_x f frozen at one input: the activation derivatives at the recorded
/// pre-activations act as fixed diagonal gates between the linear parts.
class JacobianAt {
 public:
  JacobianAt(const SequentialNet& net, const Vector& x);

  Vector apply(const Vector& v) const;
  Vector apply_adjoint(const Vector& w) const;
  LinearMap linear_map() const;

  const std::vector<Vector>& gates() const noexcept { return gates_; }

 private:
  std::vector<AffineOperator> affine_;
  std::vector<Vector> gates_;
};

enum class JacobianDirection { Forward, Adjoint };

/// Forward: J_x f v. Adjoint: (J_x f)^T v.
Tensor jacobian_apply_at(const SequentialNet& net, const Tensor& x, const Tensor& v, JacobianDirection direction);

}  // namespace lipbound
