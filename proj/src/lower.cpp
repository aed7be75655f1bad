#include "lipbound/lower.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "lipbound/error.hpp"
#include "lipbound/linalg.hpp"
#include "parallel.hpp"

namespace lipbound {
namespace {

constexpr int kMaxGridDim = 6;
constexpr double kMaxGridPoints = 1e7;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

struct PointBest {
  double value = -1.0;
  std::size_t index = 0;
};

// Evaluates every point in parallel; ties keep the lowest index.
PointBest max_over(std::size_t count, const std::function<Vector(std::size_t)>& point, const SequentialNet& net,
                   const PowerConfig& cfg) {
  const std::size_t chunks = std::min<std::size_t>(count, 256);
  std::vector<PointBest> best(chunks);
  detail::parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = count * c / chunks;
    const std::size_t end = count * (c + 1) / chunks;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = jacobian_norm_at(net, point(i), cfg);
      if (v > best[c].value) best[c] = {v, i};
    }
  });
  PointBest out;
  for (const auto& b : best)
    if (b.value > out.value) out = b;
  return out;
}

}  // namespace

SearchDomain SearchDomain::cube(Eigen::Index dim, double lo, double hi) {
  return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
}

void SearchDomain::validate() const {
  if (lo.size() != hi.size() || lo.size() < 1) throw Error(ErrorCode::ShapeMismatch, "domain bounds mismatch");
  for (Eigen::Index d = 0; d < lo.size(); ++d) {
    if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || !(lo[d] < hi[d])) {
      throw Error(ErrorCode::InvalidArgument, "domain axis " + std::to_string(d) + " needs finite lo < hi");
    }
  }
}

void AnnealingSchedule::validate() const {
  if (!(decay > 0.0 && decay < 1.0)) throw Error(ErrorCode::InvalidArgument, "annealing decay must lie in (0, 1)");
  if (!(step_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "annealing step scale must be positive");
  if (!(initial_temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "annealing temperature must be positive");
  if (proposals < 0 || decay_every < 1) throw Error(ErrorCode::InvalidArgument, "bad annealing proposal counts");
}

double jacobian_norm_at(const SequentialNet& net, const Vector& x, const PowerConfig& cfg) {
  const JacobianAt jac(net, x);
  return power_method(jac.linear_map(), cfg).triplet.s;
}

double jacobian_norm_at(const SequentialNet& net, const Tensor& x, const PowerConfig& cfg) {
  if (x.shape() != net.input_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "point expects shape " + shape_string(net.input_shape()));
  }
  return jacobian_norm_at(net, x.data(), cfg);
}

BoundReport grid_lower_bound(const SequentialNet& net, const SearchDomain& domain, int resolution,
                             const PowerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  domain.validate();
  const Eigen::Index d = domain.dim();
  if (d != net.in_dim()) throw Error(ErrorCode::ShapeMismatch, "domain dimension differs from the net input");
  if (d > kMaxGridDim) throw Error(ErrorCode::DimensionTooLarge, "grid search supports input dimension <= 6");
  if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "grid resolution must be >= 2");
  if (std::pow(static_cast<double>(resolution), static_cast<double>(d)) > kMaxGridPoints) {
    throw Error(ErrorCode::DimensionTooLarge, "grid would exceed 1e7 points");
  }
  std::size_t count = 1;
  for (Eigen::Index i = 0; i < d; ++i) count *= static_cast<std::size_t>(resolution);

  auto point = [&](std::size_t idx) {
    Vector x(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto k = static_cast<double>(idx % static_cast<std::size_t>(resolution));
      idx /= static_cast<std::size_t>(resolution);
      x[i] = domain.lo[i] + (domain.hi[i] - domain.lo[i]) * k / (resolution - 1);
    }
    return x;
  };
  const auto best = max_over(count, point, net, cfg);

  BoundReport report;
  report.method = "grid";
  report.direction = BoundDirection::Lower;
  report.value = best.value;
  report.config = {{"resolution", resolution},
                   {"points", count},
                   {"domain_lo", to_std(domain.lo)},
                   {"domain_hi", to_std(domain.hi)},
                   {"argmax", to_std(point(best.index))},
                   {"power", cfg.to_json()}};
  report.wall_clock_seconds = seconds_since(t0);
  return report;
}

BoundReport annealing_lower_bound(const SequentialNet& net, const SearchDomain& domain,
                                  const AnnealingSchedule& schedule, const PowerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  domain.validate();
  schedule.validate();
  const Eigen::Index d = domain.dim();
  if (d != net.in_dim()) throw Error(ErrorCode::ShapeMismatch, "domain dimension differs from the net input");

  auto rng = make_rng(schedule.seed, {0x616e6e65ULL});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector width = domain.hi - domain.lo;

  Vector x = schedule.start ? *schedule.start : Vector(0.5 * (domain.lo + domain.hi));
  if (x.size() != d) throw Error(ErrorCode::ShapeMismatch, "annealing start point has the wrong dimension");
  x = x.cwiseMax(domain.lo).cwiseMin(domain.hi);
  double fx = jacobian_norm_at(net, x, cfg);
  double best = fx;
  Vector best_x = x;
  double temperature = schedule.initial_temperature;
  int accepted = 0;

  for (int p = 1; p <= schedule.proposals; ++p) {
    Vector y(d);
    for (Eigen::Index i = 0; i < d; ++i) y[i] = x[i] + schedule.step_scale * width[i] * normal(rng);
    y = y.cwiseMax(domain.lo).cwiseMin(domain.hi);
    const double fy = jacobian_norm_at(net, y, cfg);
    // Objective differences are measured relative to the running best.
    const double scale = best > 0.0 ? best : 1.0;
    const double u = unif(rng);
    if (fy >= fx || u < std::exp((fy - fx) / (temperature * scale))) {
      x = std::move(y);
      fx = fy;
      ++accepted;
      if (fx > best) {
        best = fx;
        best_x = x;
      }
    }
    if (p % schedule.decay_every == 0) temperature *= schedule.decay;
  }

  BoundReport report;
  report.method = "annealing";
  report.direction = BoundDirection::Lower;
  report.value = best;
  report.config = {{"proposals", schedule.proposals},
                   {"initial_temperature", schedule.initial_temperature},
                   {"decay", schedule.decay},
                   {"decay_every", schedule.decay_every},
                   {"step_scale", schedule.step_scale},
                   {"seed", schedule.seed},
                   {"accepted", accepted},
                   {"argmax", to_std(best_x)},
                   {"domain_lo", to_std(domain.lo)},
                   {"domain_hi", to_std(domain.hi)},
                   {"power", cfg.to_json()}};
  report.wall_clock_seconds = seconds_since(t0);
  return report;
}

BoundReport dataset_lower_bound(const SequentialNet& net, const std::vector<Vector>& points, const PowerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (points.empty()) throw Error(ErrorCode::EmptyDataset, "dataset lower bound needs at least one point");
  for (const auto& p : points) {
    if (p.size() != net.in_dim()) throw Error(ErrorCode::ShapeMismatch, "dataset point has the wrong dimension");
    require_finite(p, "dataset point");
  }
  const auto best = max_over(points.size(), [&](std::size_t i) { return points[i]; }, net, cfg);

  BoundReport report;
  report.method = "dataset/jacobian-at-point";
  report.direction = BoundDirection::Lower;
  report.value = best.value;
  report.config = {{"points", points.size()}, {"argmax_index", best.index}, {"power", cfg.to_json()}};
  report.wall_clock_seconds = seconds_since(t0);
  return report;
}

}  // namespace lipbound
