#include "lipbound/linear_map.hpp"

#include <memory>

#include "lipbound/error.hpp"

namespace lipbound {

LinearMap LinearMap::from_matrix(Matrix m) {
  auto shared = std::make_shared<const Matrix>(std::move(m));
  return LinearMap(
      shared->cols(), shared->rows(), [shared](const Vector& x) -> Vector { return *shared * x; },
      [shared](const Vector& y) -> Vector { return shared->transpose() * y; });
}

Vector LinearMap::apply(const Vector& x) const {
  if (x.size() != in_dim_) {
    throw Error(ErrorCode::ShapeMismatch,
                "linear map expects input of size " + std::to_string(in_dim_) + ", got " + std::to_string(x.size()));
  }
  return forward_(x);
}

Vector LinearMap::apply_adjoint(const Vector& y) const {
  if (y.size() != out_dim_) {
    throw Error(ErrorCode::ShapeMismatch,
                "adjoint expects input of size " + std::to_string(out_dim_) + ", got " + std::to_string(y.size()));
  }
  return adjoint_(y);
}

}  // namespace lipbound
