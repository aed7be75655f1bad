#include "lipbound/affine.hpp"

#include <cmath>

#include "lipbound/error.hpp"

namespace lipbound {
namespace {

constexpr double kMaterializeLimit = 1e7;

void check_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + " expects shape " + shape_string(expected) + ", got " + shape_string(t.shape()));
  }
}

void check_size(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " expects " + std::to_string(expected) +
                                              " entries, got " + std::to_string(v.size()));
  }
}

// Range of output indices o with 0 <= o * stride - pad + k < extent.
struct ValidRange {
  std::size_t begin;
  std::size_t end;
};

ValidRange valid_outputs(std::size_t k, std::size_t stride, std::size_t pad, std::size_t extent, std::size_t out) {
  // o * stride + k >= pad  and  o * stride + k < pad + extent
  std::size_t begin = 0;
  if (k < pad) begin = (pad - k + stride - 1) / stride;
  std::size_t end = 0;
  if (pad + extent > k) end = std::min(out, (pad + extent - k + stride - 1) / stride);
  if (end < begin) end = begin;
  return {begin, end};
}

}  // namespace

void Conv2dGeometry::validate() const {
  if (in_channels == 0 || out_channels == 0 || kernel_h == 0 || kernel_w == 0 || stride_h == 0 || stride_w == 0 ||
      in_h == 0 || in_w == 0) {
    throw Error(ErrorCode::ShapeMismatch, "conv2d dimensions, kernel and stride must be positive");
  }
  if (kernel_h > in_h + 2 * pad_h || kernel_w > in_w + 2 * pad_w) {
    throw Error(ErrorCode::ShapeMismatch, "conv2d kernel larger than padded input");
  }
}

AffineOperator AffineOperator::dense(Matrix weight, std::optional<Vector> bias) {
  if (weight.rows() < 1 || weight.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "dense weight must be non-empty");
  require_finite(weight, "dense weight");
  if (bias) {
    check_size(*bias, weight.rows(), "dense bias");
    require_finite(*bias, "dense bias");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = AffineKind::Dense;
  impl->in_dim = weight.cols();
  impl->out_dim = weight.rows();
  impl->input_shape = {static_cast<std::size_t>(weight.cols())};
  impl->output_shape = {static_cast<std::size_t>(weight.rows())};
  impl->weight = std::move(weight);
  impl->bias = std::move(bias);
  return AffineOperator(std::move(impl));
}

AffineOperator AffineOperator::conv2d(const Conv2dGeometry& g, Tensor kernel, std::optional<Vector> bias) {
  g.validate();
  const Shape expected{g.out_channels, g.in_channels, g.kernel_h, g.kernel_w};
  check_shape(kernel, expected, "conv2d kernel");
  if (bias) {
    check_size(*bias, static_cast<Eigen::Index>(g.out_channels), "conv2d bias");
    require_finite(*bias, "conv2d bias");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = AffineKind::Conv2d;
  impl->geometry = g;
  impl->input_shape = {g.in_channels, g.in_h, g.in_w};
  impl->output_shape = {g.out_channels, g.out_h(), g.out_w()};
  impl->in_dim = static_cast<Eigen::Index>(shape_size(impl->input_shape));
  impl->out_dim = static_cast<Eigen::Index>(shape_size(impl->output_shape));
  impl->kernel = kernel.data();
  impl->bias = std::move(bias);
  return AffineOperator(std::move(impl));
}

const Matrix& AffineOperator::weight() const {
  if (impl_->kind != AffineKind::Dense) throw Error(ErrorCode::InvalidArgument, "weight() is only defined for dense");
  return impl_->weight;
}

Tensor AffineOperator::weight_tensor() const {
  if (impl_->kind == AffineKind::Dense) return Tensor::from_matrix(impl_->weight);
  const auto& g = impl_->geometry;
  return Tensor({g.out_channels, g.in_channels, g.kernel_h, g.kernel_w}, impl_->kernel);
}

const Conv2dGeometry& AffineOperator::geometry() const {
  if (impl_->kind != AffineKind::Conv2d) throw Error(ErrorCode::InvalidArgument, "geometry() is only defined for conv2d");
  return impl_->geometry;
}

Vector AffineOperator::conv_forward(const Vector& x) const {
  const auto& g = impl_->geometry;
  const std::size_t oh = g.out_h();
  const std::size_t ow = g.out_w();
  Vector out = Vector::Zero(impl_->out_dim);
  const double* in = x.data();
  double* dst = out.data();
  const double* k = impl_->kernel.data();
  for (std::size_t o = 0; o < g.out_channels; ++o) {
    double* out_plane = dst + o * oh * ow;
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      const double* in_plane = in + c * g.in_h * g.in_w;
      for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
        const auto ry = valid_outputs(ky, g.stride_h, g.pad_h, g.in_h, oh);
        for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
          const double w = k[((o * g.in_channels + c) * g.kernel_h + ky) * g.kernel_w + kx];
          if (w == 0.0) continue;
          const auto rx = valid_outputs(kx, g.stride_w, g.pad_w, g.in_w, ow);
          for (std::size_t oy = ry.begin; oy < ry.end; ++oy) {
            const double* in_row = in_plane + (oy * g.stride_h + ky - g.pad_h) * g.in_w;
            double* out_row = out_plane + oy * ow;
            for (std::size_t ox = rx.begin; ox < rx.end; ++ox) {
              out_row[ox] += w * in_row[ox * g.stride_w + kx - g.pad_w];
            }
          }
        }
      }
    }
  }
  return out;
}

Vector AffineOperator::conv_adjoint(const Vector& y) const {
  const auto& g = impl_->geometry;
  const std::size_t oh = g.out_h();
  const std::size_t ow = g.out_w();
  Vector out = Vector::Zero(impl_->in_dim);
  const double* src = y.data();
  double* dst = out.data();
  const double* k = impl_->kernel.data();
  for (std::size_t o = 0; o < g.out_channels; ++o) {
    const double* y_plane = src + o * oh * ow;
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      double* in_plane = dst + c * g.in_h * g.in_w;
      for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
        const auto ry = valid_outputs(ky, g.stride_h, g.pad_h, g.in_h, oh);
        for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
          const double w = k[((o * g.in_channels + c) * g.kernel_h + ky) * g.kernel_w + kx];
          if (w == 0.0) continue;
          const auto rx = valid_outputs(kx, g.stride_w, g.pad_w, g.in_w, ow);
          for (std::size_t oy = ry.begin; oy < ry.end; ++oy) {
            double* in_row = in_plane + (oy * g.stride_h + ky - g.pad_h) * g.in_w;
            const double* y_row = y_plane + oy * ow;
            for (std::size_t ox = rx.begin; ox < rx.end; ++ox) {
              in_row[ox * g.stride_w + kx - g.pad_w] += w * y_row[ox];
            }
          }
        }
      }
    }
  }
  return out;
}

Vector AffineOperator::linear(const Vector& x) const {
  check_size(x, impl_->in_dim, "affine operator");
  if (impl_->kind == AffineKind::Dense) return impl_->weight * x;
  return conv_forward(x);
}

Vector AffineOperator::adjoint(const Vector& y) const {
  check_size(y, impl_->out_dim, "affine operator adjoint");
  if (impl_->kind == AffineKind::Dense) return impl_->weight.transpose() * y;
  return conv_adjoint(y);
}

Vector AffineOperator::affine(const Vector& x) const {
  Vector out = linear(x);
  if (!impl_->bias) return out;
  if (impl_->kind == AffineKind::Dense) return out + *impl_->bias;
  const auto plane = static_cast<Eigen::Index>(impl_->geometry.out_h() * impl_->geometry.out_w());
  for (Eigen::Index o = 0; o < impl_->bias->size(); ++o) out.segment(o * plane, plane).array() += (*impl_->bias)[o];
  return out;
}

Tensor AffineOperator::apply(const Tensor& x) const {
  check_shape(x, impl_->input_shape, "apply");
  return Tensor(impl_->output_shape, affine(x.data()));
}

Tensor AffineOperator::apply_adjoint(const Tensor& y) const {
  check_shape(y, impl_->output_shape, "apply_adjoint");
  return Tensor(impl_->input_shape, adjoint(y.data()));
}

LinearMap AffineOperator::linear_map() const {
  AffineOperator self = *this;
  return LinearMap(
      in_dim(), out_dim(), [self](const Vector& x) { return self.linear(x); },
      [self](const Vector& y) { return self.adjoint(y); });
}

Matrix AffineOperator::materialize() const {
  if (static_cast<double>(impl_->in_dim) * static_cast<double>(impl_->out_dim) > kMaterializeLimit) {
    throw Error(ErrorCode::TooLarge, "operator has more than 1e7 matrix entries");
  }
  if (impl_->kind == AffineKind::Dense) return impl_->weight;
  Matrix m(impl_->out_dim, impl_->in_dim);
  for (Eigen::Index j = 0; j < impl_->in_dim; ++j) m.col(j) = conv_forward(Vector::Unit(impl_->in_dim, j));
  return m;
}

double AffineOperator::frobenius_norm() const {
  if (impl_->kind == AffineKind::Dense) return impl_->weight.norm();
  const auto& g = impl_->geometry;
  double total = 0.0;
  for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
    const auto ry = valid_outputs(ky, g.stride_h, g.pad_h, g.in_h, g.out_h());
    for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
      const auto rx = valid_outputs(kx, g.stride_w, g.pad_w, g.in_w, g.out_w());
      double tap = 0.0;
      for (std::size_t o = 0; o < g.out_channels; ++o)
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          const double w = impl_->kernel[static_cast<Eigen::Index>(((o * g.in_channels + c) * g.kernel_h + ky) *
                                                                       g.kernel_w +
                                                                   kx)];
          tap += w * w;
        }
      total += tap * static_cast<double>((ry.end - ry.begin) * (rx.end - rx.begin));
    }
  }
  return std::sqrt(total);
}

Tensor apply(const AffineOperator& op, const Tensor& x) { return op.apply(x); }
Tensor apply_adjoint(const AffineOperator& op, const Tensor& y) { return op.apply_adjoint(y); }
Matrix materialize(const AffineOperator& op) { return op.materialize(); }

}  // namespace lipbound
