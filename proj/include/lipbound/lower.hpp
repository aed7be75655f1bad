#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lipbound/report.hpp"
#include "lipbound/sequential.hpp"
#include "lipbound/spectral.hpp"

namespace lipbound {

/// Axis-aligned box of closed intervals [lo_d, hi_d].
struct SearchDomain {
  Vector lo;
  Vector hi;

  /// [-1, 1]^dim.
  static SearchDomain cube(Eigen::Index dim, double lo = -1.0, double hi = 1.0);
  Eigen::Index dim() const { return lo.size(); }
  void validate() const;
};

struct AnnealingSchedule {
  double initial_temperature = 1.0;
  /// Geometric decay factor applied every `decay_every` proposals.
  double decay = 0.95;
  int decay_every = 100;
  /// Proposal standard deviation as a fraction of each coordinate's width.
  double step_scale = 0.1;
  int proposals = 10000;
  std::uint64_t seed = 0;
  /// Starting point; the domain centre when unset.
  std::optional<Vector> start;

  void validate() const;
};

/// ||J_x f||_2 by the power method on the frozen-gate Jacobian. Any value
/// returned is a lower bound on L(f).
double jacobian_norm_at(const SequentialNet& net, const Vector& x, const PowerConfig& cfg = {});
double jacobian_norm_at(const SequentialNet& net, const Tensor& x, const PowerConfig& cfg = {});

/// Max of jacobian_norm_at over a regular grid with `resolution` points per
/// axis (endpoints included). Needs d <= 6 and resolution^d <= 1e7.
BoundReport grid_lower_bound(const SequentialNet& net, const SearchDomain& domain, int resolution,
                             const PowerConfig& cfg = {});

/// Metropolis walk maximizing jacobian_norm_at; returns the best value seen.
BoundReport annealing_lower_bound(const SequentialNet& net, const SearchDomain& domain,
                                  const AnnealingSchedule& schedule, const PowerConfig& cfg = {});

/// Max of jacobian_norm_at over the given points.
BoundReport dataset_lower_bound(const SequentialNet& net, const std::vector<Vector>& points,
                                const PowerConfig& cfg = {});

}  // namespace lipbound
