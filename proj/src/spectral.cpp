#include "lipbound/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lipbound/error.hpp"
#include "lipbound/linalg.hpp"

namespace lipbound {
namespace {

constexpr std::uint64_t kRestartStream = 0x9e3779b97f4a7c15ULL;

void project_out(Vector& x, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) x -= b.dot(x) * b;
  }
}

Vector unit_start(Eigen::Index n, std::uint64_t seed, const std::vector<Vector>& basis) {
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    Vector v = random_unit_vector(n, seed + attempt * kRestartStream);
    project_out(v, basis);
    const double len = v.norm();
    if (len > 1e-8) return v / len;
  }
  throw Error(ErrorCode::InvalidArgument, "no start vector outside the deflated subspace");
}

}  // namespace

void PowerConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "power method needs max_iters >= 1");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "power method needs tol > 0");
}

nlohmann::json PowerConfig::to_json() const {
  return {{"max_iters", max_iters}, {"tol", tol}, {"seed", seed}, {"start", "gaussian-unit"}};
}

PowerResult power_method(const LinearMap& op, const PowerConfig& cfg) {
  cfg.validate();
  if (op.in_dim() < 1) throw Error(ErrorCode::ShapeMismatch, "power method needs input dimension >= 1");
  return power_method(op, cfg, random_unit_vector(op.in_dim(), cfg.seed));
}

PowerResult power_method(const LinearMap& op, const PowerConfig& cfg, const Vector& start,
                         const std::vector<Vector>& orthogonal_to) {
  cfg.validate();
  PowerResult result;
  Vector v = start;
  project_out(v, orthogonal_to);
  if (v.norm() <= 1e-12) {
    v = unit_start(op.in_dim(), cfg.seed, orthogonal_to);
  } else {
    v /= v.norm();
  }

  Vector w = op.apply(v);
  double s = w.norm();
  if (s == 0.0) {
    v = unit_start(op.in_dim(), cfg.seed + kRestartStream, orthogonal_to);
    w = op.apply(v);
    s = w.norm();
  }
  if (s == 0.0) {
    result.zero_operator = true;
    result.converged = true;
    result.triplet.s = 0.0;
    result.triplet.v = v;
    result.triplet.u = Vector::Unit(op.out_dim(), 0);
    result.history.push_back(0.0);
    return result;
  }
  result.history.push_back(s);

  int stable = 0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    Vector z = op.apply_adjoint(w);
    project_out(z, orthogonal_to);
    const double nz = z.norm();
    if (nz == 0.0) break;
    v = z / nz;
    w = op.apply(v);
    const double s_new = w.norm();
    result.history.push_back(s_new);
    result.iterations = it;
    const double rel = std::abs(s_new - s) / s_new;
    s = s_new;
    if (rel < cfg.tol) {
      if (++stable >= 2) {
        result.converged = true;
        break;
      }
    } else {
      stable = 0;
    }
  }

  result.triplet.s = s;
  result.triplet.v = v;
  result.triplet.u = w / s;
  Vector back = op.apply_adjoint(result.triplet.u);
  project_out(back, orthogonal_to);
  result.residual = (back - s * v).norm();
  return result;
}

double spectral_norm(const LinearMap& op, const PowerConfig& cfg) { return power_method(op, cfg).triplet.s; }

std::vector<SingularTriplet> top_k_singular(const LinearMap& op, int k, const PowerConfig& cfg) {
  cfg.validate();
  if (k < 1 || k > std::min(op.in_dim(), op.out_dim())) {
    throw Error(ErrorCode::InvalidArgument, "top_k_singular needs 1 <= k <= min(input, output) dimension");
  }
  std::vector<SingularTriplet> found;
  std::vector<Vector> right;
  found.reserve(static_cast<std::size_t>(k));

  for (int j = 0; j < k; ++j) {
    // Captures a snapshot of the triplets found so far.
    const std::vector<SingularTriplet> prior = found;
    const LinearMap deflated(
        op.in_dim(), op.out_dim(),
        [&op, prior](const Vector& x) {
          Vector y = op.apply(x);
          for (const auto& t : prior) y -= (t.s * t.v.dot(x)) * t.u;
          return y;
        },
        [&op, prior](const Vector& y) {
          Vector x = op.apply_adjoint(y);
          for (const auto& t : prior) x -= (t.s * t.u.dot(y)) * t.v;
          return x;
        });
    PowerConfig sub = cfg;
    sub.seed = cfg.seed + static_cast<std::uint64_t>(j) * kRestartStream;
    PowerResult r = power_method(deflated, sub, random_unit_vector(op.in_dim(), sub.seed), right);
    if (r.zero_operator) {
      // Remaining spectrum is exactly zero: any orthonormal completion is valid.
      std::vector<Vector> left;
      for (const auto& t : found) left.push_back(t.u);
      Vector u = Vector::Zero(op.out_dim());
      for (Eigen::Index e = 0; e < op.out_dim(); ++e) {
        Vector cand = Vector::Unit(op.out_dim(), e);
        project_out(cand, left);
        if (cand.norm() > 1e-8) {
          u = cand / cand.norm();
          break;
        }
      }
      r.triplet.u = u;
    }
    right.push_back(r.triplet.v);
    found.push_back(std::move(r.triplet));
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.s > b.s; });
  return found;
}

BoundReport frobenius_upper_bound(const SequentialNet& net) {
  const auto t0 = std::chrono::steady_clock::now();
  BoundReport report;
  report.method = "frobenius";
  report.direction = BoundDirection::Upper;
  double value = 1.0;
  for (const auto& op : net.affine_layers()) {
    const double f = op.frobenius_norm();
    report.breakdown.push_back(f);
    value *= f;
  }
  for (const auto& a : net.activations()) value *= a.lipschitz_constant();
  report.value = value;
  report.config = {{"layers", net.depth()}};
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

BoundReport layer_spectrum(const SequentialNet& net, std::size_t layer, int k, const PowerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (layer >= net.depth()) {
    throw Error(ErrorCode::InvalidArgument, "layer index " + std::to_string(layer) + " out of range (net has " +
                                                std::to_string(net.depth()) + " affine layers)");
  }
  const auto& op = net.affine_layers()[layer];
  const auto triplets = top_k_singular(op.linear_map(), k, cfg);
  BoundReport report;
  report.method = "spectra";
  report.direction = BoundDirection::Estimate;
  report.value = triplets.front().s;
  nlohmann::json residuals = nlohmann::json::array();
  for (const auto& t : triplets) {
    report.breakdown.push_back(t.s);
    residuals.push_back((op.linear(t.v) - t.s * t.u).norm());
  }
  report.config = {{"layer", layer}, {"topk", k}, {"power", cfg.to_json()}, {"residuals", residuals}};
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace lipbound
