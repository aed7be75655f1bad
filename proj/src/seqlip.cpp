#include "lipbound/seqlip.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <string>

#include "lipbound/error.hpp"
#include "lipbound/linalg.hpp"
#include "parallel.hpp"

namespace lipbound {
namespace {

// Below this size the gated factor goes through svd_dense, above it through
// the power method.
constexpr Eigen::Index kDenseFactorLimit = 32;
constexpr int kMaxExactBits = 62;
constexpr int kPrefixBits = 4;
constexpr std::uint64_t kRefreshPeriod = 4096;
constexpr Eigen::Index kExhaustiveFlipLimit = 64;

struct TopTriplet {
  double s1 = 0.0;
  double s2 = 0.0;
  bool have_s2 = false;
  Vector u;
  Vector v;
};

TopTriplet top_triplet(const Matrix& f) {
  TopTriplet t;
  if (std::min(f.rows(), f.cols()) <= kDenseFactorLimit) {
    const auto svd = svd_dense(f);
    t.s1 = svd.S[0];
    t.have_s2 = true;
    t.s2 = svd.S.size() > 1 ? svd.S[1] : 0.0;
    t.u = svd.U.col(0);
    t.v = svd.V.col(0);
    return t;
  }
  PowerConfig cfg;
  cfg.max_iters = 5000;
  cfg.tol = 1e-13;
  const auto r = power_method(LinearMap::from_matrix(f), cfg);
  t.s1 = r.triplet.s;
  t.u = r.triplet.u;
  t.v = r.triplet.v;
  return t;
}

Vector sigma_from_mask(std::uint64_t mask, Eigen::Index n, DerivativeRange range) {
  Vector s(n);
  for (Eigen::Index j = 0; j < n; ++j) s[j] = ((mask >> j) & 1U) ? range.hi : range.lo;
  return s;
}

bool lex_less(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t d = a ^ b;
  if (d == 0) return false;
  return ((a >> std::countr_zero(d)) & 1U) == 0;
}

struct MaskBest {
  double lambda = -1.0;  // squared norm
  std::uint64_t mask = 0;

  void offer(double l, std::uint64_t m) {
    if (l > lambda || (l == lambda && lex_less(m, mask))) {
      lambda = l;
      mask = m;
    }
  }
};

class SquaredNorm {
 public:
  double operator()(const Matrix& f) {
    if (f.rows() == 1 || f.cols() == 1) return f.squaredNorm();
    if (f.cols() <= f.rows()) {
      gram_.noalias() = f.transpose() * f;
    } else {
      gram_.noalias() = f * f.transpose();
    }
    solver_.compute(gram_, Eigen::EigenvaluesOnly);
    return std::max(0.0, solver_.eigenvalues().maxCoeff());
  }

 private:
  Matrix gram_;
  Eigen::SelfAdjointEigenSolver<Matrix> solver_;
};

Vector clamp(const Vector& x, DerivativeRange r) { return x.cwiseMax(r.lo).cwiseMin(r.hi); }

// Local search over gate vertices. The norm is convex in sigma, so a flip
// whose first-order gain is positive always improves; when none is left,
// moderate widths also get an exhaustive single-flip pass.
FactorOptimum polish_vertex(const SeqLipFactor& f, Vector sigma) {
  const auto range = f.gate_range;
  const Eigen::Index n = f.gate_dim;
  auto flipped = [&](const Vector& s, Eigen::Index j) {
    Vector t = s;
    t[j] = (s[j] == range.hi) ? range.lo : range.hi;
    return t;
  };
  auto current = sigma_gradient(f, sigma);
  for (Eigen::Index iter = 0; iter < 4 * n + 4; ++iter) {
    Eigen::Index pick = -1;
    double gain = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dj = (sigma[j] == range.hi ? range.lo - range.hi : range.hi - range.lo) * current.gradient[j];
      if (dj > gain) gain = dj, pick = j;
    }
    if (pick >= 0) {
      const Vector trial = flipped(sigma, pick);
      auto next = sigma_gradient(f, trial);
      if (next.value > current.value) {
        sigma = trial;
        current = std::move(next);
        continue;
      }
    }
    if (n > kExhaustiveFlipLimit) break;
    double best_value = current.value;
    Eigen::Index best_j = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = factor_norm(f, flipped(sigma, j));
      if (v > best_value) best_value = v, best_j = j;
    }
    if (best_j < 0) break;
    sigma = flipped(sigma, best_j);
    current = sigma_gradient(f, sigma);
  }
  return {current.value, sigma};
}

FactorOptimum greedy_restart(const SeqLipFactor& f, const SeqLipOptions& opts, int restart) {
  const auto range = f.gate_range;
  const double width = range.hi - range.lo;
  const Eigen::Index n = f.gate_dim;

  Vector sigma;
  if (restart == 0) {
    sigma = Vector::Constant(n, range.hi);
  } else if (restart == 1) {
    sigma = Vector::Constant(n, 0.5 * (range.lo + range.hi));
  } else {
    auto rng = make_rng(opts.seed, {static_cast<std::uint64_t>(f.index), static_cast<std::uint64_t>(restart)});
    std::uniform_real_distribution<double> unif(range.lo, range.hi);
    sigma.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) sigma[j] = unif(rng);
  }

  auto current = sigma_gradient(f, sigma);
  double step = 0.1;
  int stagnant = 0;
  for (int t = 0; t < opts.steps && width > 0.0; ++t) {
    const double gmax = current.gradient.cwiseAbs().maxCoeff();
    if (!(gmax > 0.0)) break;
    const Vector trial = clamp(sigma + (step * width / gmax) * current.gradient, range);
    if (trial == sigma) break;  // projected gradient is stationary
    auto next = sigma_gradient(f, trial);
    if (next.value > current.value * (1.0 + 1e-12) || (current.value == 0.0 && next.value > 0.0)) {
      sigma = trial;
      current = std::move(next);
      stagnant = 0;
    } else {
      step *= 0.5;
      if (++stagnant >= 20) break;
    }
  }

  FactorOptimum best{current.value, sigma};
  if (width == 0.0) return best;
  Vector rounded(n);
  for (Eigen::Index j = 0; j < n; ++j) rounded[j] = (sigma[j] - range.lo >= 0.5 * width) ? range.hi : range.lo;
  auto polished = polish_vertex(f, rounded);
  if (polished.value > best.value) best = std::move(polished);
  return best;
}

std::string sigma_string(const Vector& sigma, DerivativeRange range) {
  std::string s;
  s.reserve(static_cast<std::size_t>(sigma.size()));
  for (Eigen::Index j = 0; j < sigma.size(); ++j) {
    if (sigma[j] == range.hi) {
      s.push_back('1');
    } else if (sigma[j] == range.lo) {
      s.push_back('0');
    } else {
      s.push_back('~');
    }
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_seqlip_net(const SequentialNet& net) {
  if (net.depth() < 2) throw Error(ErrorCode::InvalidArgument, "SeqLip needs at least two affine layers");
}

nlohmann::json factor_meta(const std::vector<SeqLipFactor>& factors) {
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& f : factors) {
    meta.push_back({{"index", f.index},
                    {"gate_dim", f.gate_dim},
                    {"rank_left", f.left.rows()},
                    {"rank_right", f.right.cols()},
                    {"sqrt_left", f.left_sqrt},
                    {"sqrt_right", f.right_sqrt},
                    {"truncated", f.truncated}});
  }
  return meta;
}

}  // namespace

void SeqLipOptions::validate() const {
  if (rank < 1) throw Error(ErrorCode::InvalidArgument, "truncation rank E must be >= 1");
  if (width_limit < 1 || width_limit > kMaxExactBits) {
    throw Error(ErrorCode::InvalidArgument, "width limit must lie in [1, 62]");
  }
  if (restarts < 1) throw Error(ErrorCode::InvalidArgument, "greedy SeqLip needs at least one restart");
  if (steps < 0) throw Error(ErrorCode::InvalidArgument, "greedy SeqLip steps must be non-negative");
  power.validate();
}

nlohmann::json SeqLipOptions::to_json() const {
  return {{"rank", rank},     {"width_limit", width_limit}, {"restarts", restarts},
          {"steps", steps},   {"seed", seed},               {"power", power.to_json()},
          {"step_size", 0.1}, {"step_rule", "halve-on-no-improvement"},
          {"vertex_polish", "gradient-flips+single-flip"}};
}

LayerSvd layer_svd(const AffineOperator& op, int rank, const PowerConfig& cfg) {
  if (rank < 1) throw Error(ErrorCode::InvalidArgument, "truncation rank E must be >= 1");
  LayerSvd out;
  out.full_rank = std::min(op.in_dim(), op.out_dim());
  const Eigen::Index keep = std::min<Eigen::Index>(rank, out.full_rank);
  if (op.kind() == AffineKind::Dense) {
    auto svd = svd_dense(op.weight());
    out.U = svd.U.leftCols(keep);
    out.S = svd.S.head(keep);
    out.V = svd.V.leftCols(keep);
    return out;
  }
  const auto triplets = top_k_singular(op.linear_map(), static_cast<int>(keep), cfg);
  out.U.resize(op.out_dim(), keep);
  out.V.resize(op.in_dim(), keep);
  out.S.resize(keep);
  for (Eigen::Index k = 0; k < keep; ++k) {
    const auto& t = triplets[static_cast<std::size_t>(k)];
    out.U.col(k) = t.u;
    out.V.col(k) = t.v;
    out.S[k] = t.s;
  }
  return out;
}

Matrix SeqLipFactor::gated(const Vector& sigma) const {
  if (sigma.size() != gate_dim) {
    throw Error(ErrorCode::ShapeMismatch, "gate vector has " + std::to_string(sigma.size()) + " entries, factor needs " +
                                              std::to_string(gate_dim));
  }
  return left * sigma.asDiagonal() * right;
}

std::vector<SeqLipFactor> decompose(const SequentialNet& net, int rank, const PowerConfig& cfg) {
  check_seqlip_net(net);
  const std::size_t depth = net.depth();
  std::vector<LayerSvd> svds(depth);
  detail::parallel_for(depth, [&](std::size_t k) { svds[k] = layer_svd(net.affine_layers()[k], rank, cfg); });

  auto tilde = [&](std::size_t k) -> Vector {
    if (k == 0 || k + 1 == depth) return svds[k].S;
    return svds[k].S.cwiseSqrt();
  };

  std::vector<SeqLipFactor> factors;
  factors.reserve(depth - 1);
  for (std::size_t i = 0; i + 1 < depth; ++i) {
    SeqLipFactor f;
    f.index = i;
    f.gate_dim = net.affine_layers()[i].out_dim();
    f.left = tilde(i + 1).asDiagonal() * svds[i + 1].V.transpose();
    f.right = svds[i].U * tilde(i).asDiagonal();
    const auto& act = net.activations()[i];
    f.gate_range = act.derivative_range();
    f.binary_gates = act.binary_gates();
    f.left_sqrt = (i + 1 != depth - 1);
    f.right_sqrt = (i != 0);
    f.truncated = svds[i].truncated() || svds[i + 1].truncated();
    factors.push_back(std::move(f));
  }
  return factors;
}

double factor_norm(const SeqLipFactor& factor, const Vector& sigma) {
  const Matrix g = factor.gated(sigma);
  if (g.isZero(0.0)) return 0.0;
  return top_triplet(g).s1;
}

SigmaGradient sigma_gradient(const SeqLipFactor& factor, const Vector& sigma) {
  const Matrix g = factor.gated(sigma);
  SigmaGradient out;
  out.gradient = Vector::Zero(factor.gate_dim);
  if (g.isZero(0.0)) {
    out.degenerate = true;
    return out;
  }
  const auto top = top_triplet(g);
  out.value = top.s1;
  out.degenerate = top.have_s2 && (top.s1 - top.s2 < 1e-8 * top.s1);
  out.gradient = (factor.left.transpose() * top.u).cwiseProduct(factor.right * top.v);
  return out;
}

FactorOptimum exact_factor_max(const SeqLipFactor& factor) {
  const Eigen::Index n = factor.gate_dim;
  const auto range = factor.gate_range;
  if (range.lo == range.hi) {
    const Vector sigma = Vector::Constant(n, range.lo);
    return {factor_norm(factor, sigma), sigma};
  }
  if (n > kMaxExactBits) throw Error(ErrorCode::WidthExceeded, "gate dimension too large to enumerate");

  const int prefix_bits = static_cast<int>(std::min<Eigen::Index>(n, kPrefixBits));
  const int free_bits = static_cast<int>(n) - prefix_bits;
  const std::uint64_t blocks = std::uint64_t{1} << prefix_bits;
  const double delta = range.hi - range.lo;
  const Matrix& l = factor.left;
  const Matrix& r = factor.right;

  auto build = [&](std::uint64_t mask) {
    return factor.gated(sigma_from_mask(mask, n, range));
  };

  std::vector<MaskBest> results(blocks);
  detail::parallel_for(blocks, [&](std::size_t b) {
    SquaredNorm sq;
    MaskBest best;
    std::uint64_t mask = static_cast<std::uint64_t>(b) << free_bits;
    Matrix f = build(mask);
    auto consider = [&] {
      if (f.squaredNorm() < best.lambda) return;  // Frobenius bounds the spectral norm
      best.offer(sq(f), mask);
    };
    consider();
    const std::uint64_t steps = std::uint64_t{1} << free_bits;
    for (std::uint64_t s = 1; s < steps; ++s) {
      const int j = std::countr_zero(s);
      mask ^= std::uint64_t{1} << j;
      if (s % kRefreshPeriod == 0) {
        f = build(mask);
      } else {
        const double sign = ((mask >> j) & 1U) ? delta : -delta;
        f.noalias() += (sign * l.col(j)) * r.row(j);
      }
      consider();
    }
    results[b] = best;
  });

  MaskBest best;
  for (const auto& r_b : results) best.offer(r_b.lambda, r_b.mask);
  return {std::sqrt(best.lambda), sigma_from_mask(best.mask, n, range)};
}

FactorOptimum greedy_factor_max(const SeqLipFactor& factor, const SeqLipOptions& opts) {
  opts.validate();
  FactorOptimum best{-1.0, {}};
  for (int r = 0; r < opts.restarts; ++r) {
    auto cand = greedy_restart(factor, opts, r);
    if (cand.value > best.value) best = std::move(cand);
  }
  return best;
}

BoundReport seqlip_exact(const SequentialNet& net, const SeqLipOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  opts.validate();
  check_seqlip_net(net);
  for (std::size_t i = 0; i + 1 < net.depth(); ++i) {
    const auto n = net.affine_layers()[i].out_dim();
    if (n > opts.width_limit) {
      throw Error(ErrorCode::WidthExceeded, "activation layer " + std::to_string(i) + " has " + std::to_string(n) +
                                                " gates, above the width limit " +
                                                std::to_string(opts.width_limit) + "; use greedy SeqLip");
    }
  }
  const auto factors = decompose(net, opts.rank, opts.power);

  BoundReport report;
  report.method = "seqlip-exact";
  report.direction = BoundDirection::Upper;
  nlohmann::json argmax = nlohmann::json::array();
  double value = 1.0;
  bool truncated = false;
  for (const auto& f : factors) {
    const auto opt = exact_factor_max(f);
    report.breakdown.push_back(opt.value);
    argmax.push_back(sigma_string(opt.sigma, f.gate_range));
    value *= opt.value;
    truncated = truncated || f.truncated;
  }
  report.value = value;
  report.config = opts.to_json();
  report.config.erase("restarts");
  report.config.erase("steps");
  report.config.erase("step_size");
  report.config.erase("step_rule");
  report.config.erase("vertex_polish");
  report.config["factors"] = factor_meta(factors);
  report.config["argmax_sigma"] = argmax;
  if (truncated) {
    report.direction = BoundDirection::Estimate;
    report.notes.push_back("rank truncation E below full rank; value may underestimate the untruncated bound");
  }
  report.wall_clock_seconds = seconds_since(t0);
  return report;
}

BoundReport seqlip_greedy(const SequentialNet& net, const SeqLipOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  opts.validate();
  check_seqlip_net(net);
  const auto factors = decompose(net, opts.rank, opts.power);
  const auto restarts = static_cast<std::size_t>(opts.restarts);

  std::vector<FactorOptimum> runs(factors.size() * restarts);
  detail::parallel_for(runs.size(), [&](std::size_t t) {
    runs[t] = greedy_restart(factors[t / restarts], opts, static_cast<int>(t % restarts));
  });

  BoundReport report;
  report.method = "seqlip-greedy";
  report.direction = BoundDirection::Estimate;
  nlohmann::json argmax = nlohmann::json::array();
  nlohmann::json per_restart = nlohmann::json::array();
  double value = 1.0;
  bool truncated = false;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    std::size_t best = i * restarts;
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t r = 0; r < restarts; ++r) {
      const auto t = i * restarts + r;
      values.push_back(runs[t].value);
      if (runs[t].value > runs[best].value) best = t;
    }
    per_restart.push_back(values);
    report.breakdown.push_back(runs[best].value);
    argmax.push_back(sigma_string(runs[best].sigma, factors[i].gate_range));
    value *= runs[best].value;
    truncated = truncated || factors[i].truncated;
  }
  report.value = value;
  report.config = opts.to_json();
  report.config.erase("width_limit");
  report.config["factors"] = factor_meta(factors);
  report.config["argmax_sigma"] = argmax;
  report.config["restart_values"] = per_restart;
  if (truncated) report.notes.push_back("rank truncation E below full rank");
  report.wall_clock_seconds = seconds_since(t0);
  return report;
}

double exact_lipschitz_two_layer(const Matrix& m1, const Matrix& m2) {
  if (m1.rows() != m2.cols()) throw Error(ErrorCode::ShapeMismatch, "M2 * M1 does not compose");
  const Eigen::Index n = m1.rows();
  if (n > 22) throw Error(ErrorCode::TooWide, "inner dimension above 22 is too wide to enumerate");
  const std::uint64_t patterns = std::uint64_t{1} << n;
  const std::uint64_t blocks = std::min<std::uint64_t>(patterns, 64);
  std::vector<double> best(blocks, 0.0);
  detail::parallel_for(blocks, [&](std::size_t b) {
    for (std::uint64_t mask = b; mask < patterns; mask += blocks) {
      Vector sigma(n);
      for (Eigen::Index j = 0; j < n; ++j) sigma[j] = static_cast<double>((mask >> j) & 1U);
      const Matrix prod = m2 * sigma.asDiagonal() * m1;
      if (prod.isZero(0.0)) continue;
      best[b] = std::max(best[b], svd_dense(prod).S[0]);
    }
  });
  return *std::max_element(best.begin(), best.end());
}

double alignment_factor(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw Error(ErrorCode::ShapeMismatch, "alignment factor needs equal dimensions");
  double pos = 0.0;
  double neg = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double p = u[i] * v[i];
    if (p > 0.0) {
      pos += p;
    } else {
      neg -= p;
    }
  }
  return std::max(pos, neg);
}

BoundReport theorem3_bound(const SequentialNet& net, const PowerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  check_seqlip_net(net);
  const std::size_t depth = net.depth();
  std::vector<LayerSvd> svds(depth);
  detail::parallel_for(depth, [&](std::size_t k) { svds[k] = layer_svd(net.affine_layers()[k], 2, cfg); });

  std::vector<double> ratio(depth);
  double autolip = 1.0;
  for (std::size_t k = 0; k < depth; ++k) {
    const double s1 = svds[k].S[0];
    if (!(s1 > 0.0)) throw Error(ErrorCode::RatioUndefined, "layer " + std::to_string(k) + " has s_1 = 0");
    ratio[k] = svds[k].S.size() > 1 ? svds[k].S[1] / s1 : 0.0;
    autolip *= s1;
  }

  BoundReport report;
  report.method = "theorem3";
  report.direction = BoundDirection::Upper;
  nlohmann::json align = nlohmann::json::array();
  double value = autolip;
  for (std::size_t k = 0; k + 1 < depth; ++k) {
    const double a = alignment_factor(svds[k + 1].V.col(0), svds[k].U.col(0));
    const double rk = ratio[k];
    const double rn = ratio[k + 1];
    const double term = std::sqrt(std::max(0.0, (1.0 - rk - rn) * a * a + rk + rn + rk * rn));
    align.push_back(a);
    report.breakdown.push_back(term);
    value *= term;
  }
  report.value = value;
  report.config = {{"autolip", autolip}, {"ratios", ratio}, {"alignment", align}, {"power", cfg.to_json()}};
  report.wall_clock_seconds = seconds_since(t0);
  return report;
}

SequentialNet ideal_net(int layers, int width, double ratio, std::uint64_t seed) {
  if (layers < 2) throw Error(ErrorCode::InvalidArgument, "ideal net needs K >= 2");
  if (width < 2) throw Error(ErrorCode::InvalidArgument, "ideal net needs width >= 2");
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw Error(ErrorCode::InvalidArgument, "eigenvalue ratio must lie in [0, 1]");
  Vector lambda = Vector::Constant(width, ratio);
  lambda[0] = 1.0;
  std::vector<Layer> stack;
  for (int i = 0; i < layers; ++i) {
    const auto key = static_cast<std::uint64_t>(i);
    const Matrix u = random_orthogonal(width, make_rng(seed, {key, 0})());
    const Matrix v = random_orthogonal(width, make_rng(seed, {key, 1})());
    if (i > 0) stack.emplace_back(Activation::relu());
    stack.emplace_back(AffineOperator::dense(u * lambda.asDiagonal() * v.transpose()));
  }
  return SequentialNet(std::move(stack));
}

}  // namespace lipbound
