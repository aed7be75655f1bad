#pragma once

#include <string>
#include <string_view>

#include "lipbound/tensor.hpp"

namespace lipbound {

enum class ActivationKind { Relu, LeakyRelu, Tanh, Sigmoid, Softplus, Arctan, Softsign, Identity };

/// Closed interval containing every value the derivative can take.
struct DerivativeRange {
  double lo;
  double hi;
};

/// Elementwise activation with the metadata the bounds need. The Lipschitz
/// constant is max(|lo|, |hi|) of the derivative range; gates are binary when
/// the derivative only takes the two endpoint values (ReLU, leaky ReLU).
class Activation {
 public:
  explicit Activation(ActivationKind kind, double alpha = 0.0);

  static Activation relu() { return Activation(ActivationKind::Relu); }
  static Activation leaky_relu(double alpha) { return Activation(ActivationKind::LeakyRelu, alpha); }
  static Activation tanh() { return Activation(ActivationKind::Tanh); }
  static Activation identity() { return Activation(ActivationKind::Identity); }

  /// Parses "relu", "leaky_relu", "tanh", "sigmoid", "softplus", "arctan",
  /// "softsign" or "identity".
  static Activation from_name(std::string_view name, double alpha = 0.0);

  ActivationKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  std::string name() const;

  DerivativeRange derivative_range() const noexcept;
  double lipschitz_constant() const noexcept;
  bool binary_gates() const noexcept;

  double value(double x) const noexcept;
  /// ReLU-type kinks take the lower derivative (0 for ReLU, alpha for leaky).
  double derivative(double x) const noexcept;

  Vector apply(const Vector& x) const;
  Vector derivative(const Vector& x) const;

 private:
  ActivationKind kind_;
  double alpha_;
};

Tensor activation_apply(const Activation& a, const Tensor& x);
Tensor activation_derivative(const Activation& a, const Tensor& x);

}  // namespace lipbound
