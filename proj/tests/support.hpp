#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <lipbound/linalg.hpp>
#include <lipbound/sequential.hpp>

namespace testing_support {

using lipbound::Matrix;
using lipbound::Vector;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  auto rng = lipbound::make_rng(seed, {0x7e57});
  return lipbound::gaussian_matrix(rng, rows, cols);
}

inline Vector random_vector(Eigen::Index n, std::uint64_t seed) {
  auto rng = lipbound::make_rng(seed, {0x7e58});
  return lipbound::gaussian_vector(rng, n);
}

inline double relative(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

/// Dense net from explicit matrices with one activation kind between layers.
inline lipbound::SequentialNet dense_net(const std::vector<Matrix>& ms,
                                         const lipbound::Activation& act = lipbound::Activation::relu()) {
  std::vector<lipbound::Layer> layers;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (i > 0) layers.emplace_back(act);
    layers.emplace_back(lipbound::AffineOperator::dense(ms[i]));
  }
  return lipbound::SequentialNet(std::move(layers));
}

/// Largest singular value by a route that shares no code with the library.
inline double eigen_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Largest sampled difference quotient ||f(x) - f(y)|| / ||x - y|| over the cube.
inline double sampled_quotient(const lipbound::SequentialNet& net, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = 0.0;
  const auto d = net.in_dim();
  for (int p = 0; p < pairs; ++p) {
    Vector x(d), dir(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      x[i] = unif(rng);
      dir[i] = normal(rng);
    }
    // mix long and short separations so both global and local slopes show up
    const double scale = std::pow(10.0, -4.0 * unif(rng) * unif(rng) - 0.5);
    const Vector y = x + scale * dir / dir.norm();
    const double q = (net.forward(x) - net.forward(y)).norm() / (x - y).norm();
    best = std::max(best, q);
  }
  return best;
}

}  // namespace testing_support
