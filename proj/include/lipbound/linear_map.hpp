#pragma once

#include <functional>
#include <utility>

#include "lipbound/tensor.hpp"

namespace lipbound {

/// Type-erased linear map on flat vectors with its adjoint. Everything the
/// spectral routines iterate on (affine layers, network Jacobians, deflated
/// operators, gated SeqLip factors) is presented through this.
class LinearMap {
 public:
  using Apply = std::function<Vector(const Vector&)>;

  LinearMap(Eigen::Index in_dim, Eigen::Index out_dim, Apply forward, Apply adjoint)
      : in_dim_(in_dim), out_dim_(out_dim), forward_(std::move(forward)), adjoint_(std::move(adjoint)) {}

  static LinearMap from_matrix(Matrix m);

  Eigen::Index in_dim() const noexcept { return in_dim_; }
  Eigen::Index out_dim() const noexcept { return out_dim_; }

  Vector apply(const Vector& x) const;
  Vector apply_adjoint(const Vector& y) const;

 private:
  Eigen::Index in_dim_;
  Eigen::Index out_dim_;
  Apply forward_;
  Apply adjoint_;
};

}  // namespace lipbound
