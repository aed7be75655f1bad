#include "lipbound/sequential.hpp"

#include <memory>

#include "lipbound/error.hpp"

namespace lipbound {

SequentialNet::SequentialNet(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorCode::ShapeMismatch, "a sequential net needs at least one affine layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool want_affine = (i % 2 == 0);
    if (want_affine != std::holds_alternative<AffineOperator>(layers_[i])) {
      throw Error(ErrorCode::ShapeMismatch, "layers must alternate affine/activation starting with affine (layer " +
                                                std::to_string(i) + ")");
    }
    if (want_affine) {
      affine_.push_back(std::get<AffineOperator>(layers_[i]));
    } else {
      activations_.push_back(std::get<Activation>(layers_[i]));
    }
  }
  if (!std::holds_alternative<AffineOperator>(layers_.back())) {
    throw Error(ErrorCode::ShapeMismatch, "a sequential net must end with an affine layer");
  }
  for (std::size_t k = 1; k < affine_.size(); ++k) {
    if (affine_[k - 1].out_dim() != affine_[k].in_dim()) {
      throw Error(ErrorCode::ShapeMismatch, "affine layer " + std::to_string(k) + " expects " +
                                                std::to_string(affine_[k].in_dim()) + " inputs but layer " +
                                                std::to_string(k - 1) + " produces " +
                                                std::to_string(affine_[k - 1].out_dim()));
    }
  }
}

Vector SequentialNet::forward(const Vector& x) const {
  Vector h = affine_[0].affine(x);
  for (std::size_t k = 1; k < affine_.size(); ++k) h = affine_[k].affine(activations_[k - 1].apply(h));
  return h;
}

Tensor SequentialNet::forward(const Tensor& x) const {
  if (x.shape() != input_shape() && x.size() != static_cast<std::size_t>(in_dim())) {
    throw Error(ErrorCode::ShapeMismatch, "net input expects shape " + shape_string(input_shape()));
  }
  return Tensor(output_shape(), forward(x.data()));
}

JacobianAt::JacobianAt(const SequentialNet& net, const Vector& x) : affine_(net.affine_layers()) {
  if (x.size() != net.in_dim()) throw Error(ErrorCode::ShapeMismatch, "jacobian point has the wrong dimension");
  const auto& acts = net.activations();
  gates_.reserve(acts.size());
  Vector h = affine_[0].affine(x);
  for (std::size_t k = 0; k < acts.size(); ++k) {
    gates_.push_back(acts[k].derivative(h));
    h = affine_[k + 1].affine(acts[k].apply(h));
  }
}

Vector JacobianAt::apply(const Vector& v) const {
  Vector h = affine_[0].linear(v);
  for (std::size_t k = 0; k < gates_.size(); ++k) h = affine_[k + 1].linear(gates_[k].cwiseProduct(h));
  return h;
}

Vector JacobianAt::apply_adjoint(const Vector& w) const {
  Vector h = w;
  for (std::size_t k = gates_.size(); k-- > 0;) h = gates_[k].cwiseProduct(affine_[k + 1].adjoint(h));
  return affine_[0].adjoint(h);
}

LinearMap JacobianAt::linear_map() const {
  auto self = std::make_shared<const JacobianAt>(*this);
  return LinearMap(
      affine_.front().in_dim(), affine_.back().out_dim(), [self](const Vector& v) { return self->apply(v); },
      [self](const Vector& w) { return self->apply_adjoint(w); });
}

Tensor jacobian_apply_at(const SequentialNet& net, const Tensor& x, const Tensor& v, JacobianDirection direction) {
  if (x.shape() != net.input_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "jacobian point expects shape " + shape_string(net.input_shape()));
  }
  const JacobianAt jac(net, x.data());
  if (direction == JacobianDirection::Forward) {
    if (v.shape() != net.input_shape()) {
      throw Error(ErrorCode::ShapeMismatch, "tangent vector must live in the input space");
    }
    return Tensor(net.output_shape(), jac.apply(v.data()));
  }
  if (v.shape() != net.output_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "cotangent vector must live in the output space");
  }
  return Tensor(net.input_shape(), jac.apply_adjoint(v.data()));
}

}  // namespace lipbound
