#include "lipbound/activation.hpp"

#include <algorithm>
#include <cmath>

#include "lipbound/error.hpp"

namespace lipbound {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

Activation::Activation(ActivationKind kind, double alpha) : kind_(kind), alpha_(alpha) {
  if (kind_ == ActivationKind::LeakyRelu && !(alpha_ >= 0.0 && alpha_ <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "leaky_relu slope must lie in [0, 1]");
  }
  if (kind_ != ActivationKind::LeakyRelu) alpha_ = 0.0;
}

Activation Activation::from_name(std::string_view name, double alpha) {
  if (name == "relu") return Activation(ActivationKind::Relu);
  if (name == "leaky_relu") return Activation(ActivationKind::LeakyRelu, alpha);
  if (name == "tanh") return Activation(ActivationKind::Tanh);
  if (name == "sigmoid") return Activation(ActivationKind::Sigmoid);
  if (name == "softplus") return Activation(ActivationKind::Softplus);
  if (name == "arctan") return Activation(ActivationKind::Arctan);
  if (name == "softsign") return Activation(ActivationKind::Softsign);
  if (name == "identity") return Activation(ActivationKind::Identity);
  throw Error(ErrorCode::InvalidArgument, "unknown activation '" + std::string(name) + "'");
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::Relu: return "relu";
    case ActivationKind::LeakyRelu: return "leaky_relu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Softplus: return "softplus";
    case ActivationKind::Arctan: return "arctan";
    case ActivationKind::Softsign: return "softsign";
    case ActivationKind::Identity: return "identity";
  }
  return "unknown";
}

DerivativeRange Activation::derivative_range() const noexcept {
  switch (kind_) {
    case ActivationKind::LeakyRelu: return {alpha_, 1.0};
    case ActivationKind::Sigmoid: return {0.0, 0.25};
    case ActivationKind::Identity: return {1.0, 1.0};
    default: return {0.0, 1.0};
  }
}

double Activation::lipschitz_constant() const noexcept {
  const auto r = derivative_range();
  return std::max(std::abs(r.lo), std::abs(r.hi));
}

bool Activation::binary_gates() const noexcept {
  return kind_ == ActivationKind::Relu || kind_ == ActivationKind::LeakyRelu || kind_ == ActivationKind::Identity;
}

double Activation::value(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::Relu: return x > 0.0 ? x : 0.0;
    case ActivationKind::LeakyRelu: return x > 0.0 ? x : alpha_ * x;
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::Sigmoid: return sigmoid(x);
    case ActivationKind::Softplus: return softplus(x);
    case ActivationKind::Arctan: return std::atan(x);
    case ActivationKind::Softsign: return x / (1.0 + std::abs(x));
    case ActivationKind::Identity: return x;
  }
  return x;
}

double Activation::derivative(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::Relu: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::LeakyRelu: return x > 0.0 ? 1.0 : alpha_;
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case ActivationKind::Softplus: return sigmoid(x);
    case ActivationKind::Arctan: return 1.0 / (1.0 + x * x);
    case ActivationKind::Softsign: {
      const double d = 1.0 + std::abs(x);
      return 1.0 / (d * d);
    }
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

Vector Activation::apply(const Vector& x) const {
  return x.unaryExpr([this](double v) { return value(v); });
}

Vector Activation::derivative(const Vector& x) const {
  return x.unaryExpr([this](double v) { return derivative(v); });
}

Tensor activation_apply(const Activation& a, const Tensor& x) { return Tensor(x.shape(), a.apply(x.data())); }

Tensor activation_derivative(const Activation& a, const Tensor& x) {
  return Tensor(x.shape(), a.derivative(x.data()));
}

}  // namespace lipbound
