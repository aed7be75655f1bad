#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "lipbound/linear_map.hpp"
#include "lipbound/tensor.hpp"

namespace lipbound {

enum class AffineKind { Dense, Conv2d };

/// Geometry of a zero-padded, strided 2-D cross-correlation on NCHW data
/// (batch of one, so tensors are [channels, height, width]).
struct Conv2dGeometry {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;
  std::size_t in_h = 1;
  std::size_t in_w = 1;

  std::size_t out_h() const { return (in_h + 2 * pad_h - kernel_h) / stride_h + 1; }
  std::size_t out_w() const { return (in_w + 2 * pad_w - kernel_w) / stride_w + 1; }
  /// Throws ShapeMismatch when the kernel does not fit the padded input.
  void validate() const;
};

/// x -> M x + b for a dense matrix or a 2-D convolution. The linear part is
/// available forward and adjoint without materializing M.
class AffineOperator {
 public:
  static AffineOperator dense(Matrix weight, std::optional<Vector> bias = std::nullopt);
  /// kernel is [out_channels, in_channels, kernel_h, kernel_w], row-major.
  static AffineOperator conv2d(const Conv2dGeometry& geometry, Tensor kernel,
                               std::optional<Vector> bias = std::nullopt);

  AffineKind kind() const noexcept { return impl_->kind; }
  const Shape& input_shape() const noexcept { return impl_->input_shape; }
  const Shape& output_shape() const noexcept { return impl_->output_shape; }
  Eigen::Index in_dim() const noexcept { return impl_->in_dim; }
  Eigen::Index out_dim() const noexcept { return impl_->out_dim; }

  /// Dense weight matrix (m x n). Throws for convolutions.
  const Matrix& weight() const;
  /// Weight as stored: [m, n] for dense, [d, c, kh, kw] for conv2d.
  Tensor weight_tensor() const;
  const std::optional<Vector>& bias() const noexcept { return impl_->bias; }
  /// Throws for dense operators.
  const Conv2dGeometry& geometry() const;

  Tensor apply(const Tensor& x) const;
  Tensor apply_adjoint(const Tensor& y) const;

  /// Flat-vector forms. linear() excludes the bias, affine() includes it.
  Vector linear(const Vector& x) const;
  Vector adjoint(const Vector& y) const;
  Vector affine(const Vector& x) const;

  LinearMap linear_map() const;
  /// Explicit matrix of the linear part; throws TooLarge past 1e7 entries.
  Matrix materialize() const;
  /// Exact Frobenius norm of the linear part (conv: every kernel tap that
  /// lands inside the input counts once per output position).
  double frobenius_norm() const;

 private:
  struct Impl {
    AffineKind kind;
    Shape input_shape;
    Shape output_shape;
    Eigen::Index in_dim;
    Eigen::Index out_dim;
    Matrix weight;
    Vector kernel;
    Conv2dGeometry geometry;
    std::optional<Vector> bias;
  };
  explicit AffineOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  Vector conv_forward(const Vector& x) const;
  Vector conv_adjoint(const Vector& y) const;

  std::shared_ptr<const Impl> impl_;
};

Tensor apply(const AffineOperator& op, const Tensor& x);
Tensor apply_adjoint(const AffineOperator& op, const Tensor& y);
Matrix materialize(const AffineOperator& op);

}  // namespace lipbound
