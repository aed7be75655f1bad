#include "lipbound/linalg.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <vector>

#include "lipbound/error.hpp"

namespace lipbound {
namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOrthTol = 1e-15;

// Requires a.rows() >= a.cols().
SvdResult jacobi_tall(const Matrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::Identity(n, n);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms[j] = w.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return norms[x] > norms[y]; });

  SvdResult out{Matrix::Zero(m, n), Vector::Zero(n), Matrix::Zero(n, n)};
  std::vector<Eigen::Index> missing;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto j = order[static_cast<std::size_t>(k)];
    out.S[k] = norms[j];
    out.V.col(k) = v.col(j);
    if (norms[j] > std::numeric_limits<double>::min()) {
      out.U.col(k) = w.col(j) / norms[j];
    } else {
      out.S[k] = 0.0;
      missing.push_back(k);
    }
  }

  // Exactly-zero singular values leave U columns undetermined; complete them
  // to an orthonormal set by Gram-Schmidt over the standard basis.
  Eigen::Index basis = 0;
  for (auto k : missing) {
    while (basis < m) {
      Vector e = Vector::Unit(m, basis++);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (j == k || out.U.col(j).squaredNorm() == 0.0) continue;
          e -= out.U.col(j).dot(e) * out.U.col(j);
        }
      }
      const double len = e.norm();
      if (len > 1e-8) {
        out.U.col(k) = e / len;
        break;
      }
    }
  }

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index imax = 0;
    out.U.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.U(imax, k) < 0.0) {
      out.U.col(k) *= -1.0;
      out.V.col(k) *= -1.0;
    }
  }
  return out;
}

}  // namespace

SvdResult svd_dense(const Matrix& a) {
  if (a.rows() < 1 || a.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "svd_dense needs a non-empty matrix");
  require_finite(a, "svd_dense input");
  if (a.rows() >= a.cols()) return jacobi_tall(a);

  SvdResult t = jacobi_tall(a.transpose());
  SvdResult out{std::move(t.V), std::move(t.S), std::move(t.U)};
  for (Eigen::Index k = 0; k < out.U.cols(); ++k) {
    Eigen::Index imax = 0;
    out.U.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.U(imax, k) < 0.0) {
      out.U.col(k) *= -1.0;
      out.V.col(k) *= -1.0;
    }
  }
  return out;
}

double spectral_norm_dense(const Matrix& a) { return svd_dense(a).S[0]; }

std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (stream.size() + 1));
  auto push = [&](std::uint64_t x) {
    words.push_back(static_cast<std::uint32_t>(x & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(x >> 32));
  };
  push(seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

Vector gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  return m;
}

Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "random_orthogonal needs n >= 1");
  auto rng = make_rng(seed, {0x6f727468ULL});
  const Matrix g = gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Vector random_unit_vector(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "random_unit_vector needs n >= 1");
  auto rng = make_rng(seed, {0x756e6974ULL});
  Vector v = gaussian_vector(rng, n);
  double len = v.norm();
  while (len == 0.0) {
    v = gaussian_vector(rng, n);
    len = v.norm();
  }
  return v / len;
}

}  // namespace lipbound
