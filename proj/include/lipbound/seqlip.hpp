#pragma once

#include <cstdint>
#include <vector>

#include "lipbound/activation.hpp"
#include "lipbound/report.hpp"
#include "lipbound/sequential.hpp"
#include "lipbound/spectral.hpp"

namespace lipbound {

struct SeqLipOptions {
  /// Truncation rank E: singular triplets kept per layer (clamped to rank).
  int rank = 200;
  /// Largest gate dimension seqlip_exact will enumerate.
  int width_limit = 20;
  int restarts = 8;
  int steps = 200;
  std::uint64_t seed = 0;
  PowerConfig power;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Leading singular triplets of one affine layer (columns of U, V).
struct LayerSvd {
  Matrix U;
  Vector S;
  Matrix V;
  Eigen::Index full_rank = 0;
  bool truncated() const { return S.size() < full_rank; }
};

LayerSvd layer_svd(const AffineOperator& op, int rank, const PowerConfig& cfg = {});

/// One activation layer's share of the SeqLip product:
/// left * diag(sigma) * right with left = S~_{i+1} V_{i+1}^T and
/// right = U_i S~_i, where S~ is the singular values of the layer for the
/// first and last layer and their square roots in between.
struct SeqLipFactor {
  std::size_t index = 0;
  Matrix left;   // r_{i+1} x n_i
  Matrix right;  // n_i x r_i
  Eigen::Index gate_dim = 0;
  DerivativeRange gate_range{0.0, 1.0};
  bool binary_gates = true;
  bool left_sqrt = false;
  bool right_sqrt = false;
  bool truncated = false;

  Matrix gated(const Vector& sigma) const;
};

std::vector<SeqLipFactor> decompose(const SequentialNet& net, int rank, const PowerConfig& cfg = {});

/// ||left diag(sigma) right||_2.
double factor_norm(const SeqLipFactor& factor, const Vector& sigma);

struct SigmaGradient {
  double value = 0.0;
  Vector gradient;
  /// s_1 - s_2 < 1e-8 s_1 (or a zero factor): the gradient is one subgradient.
  bool degenerate = false;
};

/// d s_1 / d sigma_j = (left^T u_1)_j (right v_1)_j.
SigmaGradient sigma_gradient(const SeqLipFactor& factor, const Vector& sigma);

struct FactorOptimum {
  double value = 0.0;
  Vector sigma;
};

/// Exact maximum over gate vertices {lo, hi}^n. The factor norm is convex in
/// sigma, so the maximum over the box is attained at a vertex. Ties go to
/// the lexicographically smallest sigma.
FactorOptimum exact_factor_max(const SeqLipFactor& factor);

/// Projected gradient ascent over the gate box with restarts.
FactorOptimum greedy_factor_max(const SeqLipFactor& factor, const SeqLipOptions& opts);

BoundReport seqlip_exact(const SequentialNet& net, const SeqLipOptions& opts = {});
BoundReport seqlip_greedy(const SequentialNet& net, const SeqLipOptions& opts = {});

/// max over sigma in {0,1}^n of ||M2 diag(sigma) M1||_2 by plain enumeration.
double exact_lipschitz_two_layer(const Matrix& m1, const Matrix& m2);

/// max over sigma in [0,1]^n of |<sigma . u, v>| = max(sum (u_i v_i)^+, sum (u_i v_i)^-).
double alignment_factor(const Vector& u, const Vector& v);

/// L_AL * prod_k sqrt((1 - r_k - r_{k+1}) a_k^2 + r_k + r_{k+1} + r_k r_{k+1})
/// with r_k = s_{k,2} / s_{k,1} and a_k = alignment_factor(v_{k+1}, u_k).
BoundReport theorem3_bound(const SequentialNet& net, const PowerConfig& cfg = {});

/// Dense layers M_i = U_i diag(1, r, ..., r) V_i^T with Haar U_i, V_i and
/// ReLU in between; every layer has spectral norm exactly 1.
SequentialNet ideal_net(int layers, int width, double ratio, std::uint64_t seed);

}  // namespace lipbound
