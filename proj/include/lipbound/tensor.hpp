#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lipbound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of finite doubles. Construction rejects NaN/Inf and
/// zero-sized dimensions, so every live Tensor satisfies its invariants.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, Vector data);
  Tensor(Shape shape, std::initializer_list<double> values);

  static Tensor zeros(Shape shape);
  static Tensor vector(const Vector& v) { return Tensor({static_cast<std::size_t>(v.size())}, v); }
  static Tensor from_matrix(const Matrix& m);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.size()); }
  const Vector& data() const noexcept { return data_; }
  std::span<const double> values() const noexcept { return {data_.data(), size()}; }

  double operator[](std::size_t i) const { return data_[static_cast<Eigen::Index>(i)]; }

  /// Interprets a rank-2 tensor as a matrix.
  Matrix as_matrix() const;
  Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  Vector data_;
};

/// Throws NonFinite if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& m, const char* what);

}  // namespace lipbound
