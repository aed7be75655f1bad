#include "lipbound/tensor.hpp"

#include <cmath>
#include <sstream>

#include "lipbound/error.hpp"

namespace lipbound {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
}

Tensor::Tensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw Error(ErrorCode::ShapeMismatch, "tensor shape must have at least one dimension");
  for (auto d : shape_) {
    if (d == 0) throw Error(ErrorCode::ShapeMismatch, "tensor dimensions must be positive");
  }
  if (shape_size(shape_) != static_cast<std::size_t>(data_.size())) {
    throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                              " does not match shape " + shape_string(shape_));
  }
  require_finite(data_, "tensor");
}

Tensor::Tensor(Shape shape, std::initializer_list<double> values)
    : Tensor(std::move(shape), Eigen::Map<const Vector>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

Tensor Tensor::zeros(Shape shape) {
  const auto n = static_cast<Eigen::Index>(shape_size(shape));
  return Tensor(std::move(shape), Vector::Zero(n));
}

Tensor Tensor::from_matrix(const Matrix& m) {
  Vector flat(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat[r * m.cols() + c] = m(r, c);
  return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(flat));
}

Matrix Tensor::as_matrix() const {
  if (rank() != 2) throw Error(ErrorCode::ShapeMismatch, "expected a rank-2 tensor, got " + shape_string(shape_));
  const auto rows = static_cast<Eigen::Index>(shape_[0]);
  const auto cols = static_cast<Eigen::Index>(shape_[1]);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data_.data(), rows,
                                                                                                   cols);
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

}  // namespace lipbound
