#pragma once

#include <cstdint>
#include <vector>

#include "lipbound/linear_map.hpp"
#include "lipbound/report.hpp"
#include "lipbound/sequential.hpp"

namespace lipbound {

struct PowerConfig {
  int max_iters = 500;
  /// Relative change of the norm estimate; must hold for two consecutive
  /// iterations before the iteration stops.
  double tol = 1e-9;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct SingularTriplet {
  double s = 0.0;
  Vector u;  // output space
  Vector v;  // input space
};

struct PowerResult {
  SingularTriplet triplet;
  int iterations = 0;
  bool converged = false;
  /// A v was zero for the seeded start and for one re-randomized restart.
  bool zero_operator = false;
  /// ||A^T u - s v||, the part of the triplet equations not exact by construction.
  double residual = 0.0;
  /// ||A v_k|| after every iteration, starting with the initial vector.
  std::vector<double> history;
};

/// Power iteration on A^T A from a seeded random unit vector, returning
/// s = ||A v|| (never above s_1) and u = A v / s. Iterates are kept
/// orthogonal to `orthogonal_to` when given (used by deflation).
PowerResult power_method(const LinearMap& op, const PowerConfig& cfg);
PowerResult power_method(const LinearMap& op, const PowerConfig& cfg, const Vector& start,
                         const std::vector<Vector>& orthogonal_to = {});

/// Convenience: the power-method estimate of ||A||_2.
double spectral_norm(const LinearMap& op, const PowerConfig& cfg = {});

/// k largest singular triplets by deflation: triplet j is the power method
/// on x -> A x - sum_{i<j} s_i u_i <v_i, x>. Descending order.
std::vector<SingularTriplet> top_k_singular(const LinearMap& op, int k, const PowerConfig& cfg = {});

/// prod_k ||M_k||_F times the activation Lipschitz constants.
BoundReport frobenius_upper_bound(const SequentialNet& net);

/// Top-k singular values of one affine layer of a net, as a report.
BoundReport layer_spectrum(const SequentialNet& net, std::size_t layer, int k, const PowerConfig& cfg = {});

}  // namespace lipbound
