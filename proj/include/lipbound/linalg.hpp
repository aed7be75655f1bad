#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "lipbound/tensor.hpp"

namespace lipbound {

/// Thin SVD A = U diag(S) V^T with S descending. For an m x n input, U is
/// m x k and V is n x k with k = min(m, n).
struct SvdResult {
  Matrix U;
  Vector S;
  Matrix V;
};

/// One-sided (Hestenes) Jacobi SVD. Slow but accurate; this is the reference
/// oracle the iterative code is checked against. The largest-magnitude entry
/// of every U column is made non-negative, with V adjusted to match.
SvdResult svd_dense(const Matrix& a);

/// Largest singular value via svd_dense.
double spectral_norm_dense(const Matrix& a);

/// Deterministic generator for a stream keyed by a seed plus optional
/// sub-stream indices (factor, restart, ...). Independent of scheduling.
std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

Vector gaussian_vector(std::mt19937_64& rng, Eigen::Index n);
Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols);

/// Orthonormalized seeded Gaussian matrix (QR with the sign of diag(R)
/// folded into Q, which gives the Haar distribution).
Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed);

/// Normalized Gaussian sample, uniform on the unit sphere.
Vector random_unit_vector(Eigen::Index n, std::uint64_t seed);

}  // namespace lipbound
