#pragma once

// Symmetric tridiagonal eigensolver: Sturm-count bisection for eigenvalues,
// LU-based inverse iteration for eigenvectors.  Deterministic by
// construction (fixed bracketing, fixed iteration pattern, no randomized
// pivoting), which the experiment drivers rely on for byte-identical reruns.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace hspectra {

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

namespace eig_detail {

// LAPACK-style pivot floor: keeps the Sturm recurrence from dividing by a
// denormal or exact zero.
template <typename Scalar>
Scalar pivot_floor(const VectorX<Scalar>& off) {
  Scalar m = Scalar(1);
  for (Eigen::Index i = 0; i < off.size(); ++i) m = std::max(m, off[i] * off[i]);
  return std::numeric_limits<Scalar>::min() * m;
}

// Number of eigenvalues strictly below x.
template <typename Scalar>
Eigen::Index count_below(const VectorX<Scalar>& d, const VectorX<Scalar>& e, Scalar x,
                         Scalar pivmin) {
  Eigen::Index count = 0;
  Scalar q = d[0] - x;
  if (q < Scalar(0)) ++count;
  for (Eigen::Index i = 1; i < d.size(); ++i) {
    if (std::abs(q) < pivmin) q = -pivmin;
    q = d[i] - x - e[i - 1] * (e[i - 1] / q);
    if (q < Scalar(0)) ++count;
  }
  return count;
}

inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace eig_detail

/// Interval [lo, hi] certain to contain the whole spectrum (Gershgorin discs
/// widened by a few ulps).
template <typename Scalar>
std::pair<Scalar, Scalar> gershgorin_interval(const VectorX<Scalar>& d,
                                              const VectorX<Scalar>& e) {
  const Eigen::Index n = d.size();
  Scalar lo = d[0], hi = d[0];
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar r = Scalar(0);
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < n) r += std::abs(e[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  Scalar norm = std::max({Scalar(1), std::abs(lo), std::abs(hi)});
  Scalar fudge = Scalar(8) * std::numeric_limits<Scalar>::epsilon() * norm * Scalar(n);
  return {lo - fudge, hi + fudge};
}

inline constexpr int kBisectionIterationCap = 128;

/// Eigenvalues with ascending indices in [j_begin, j_end), each within
/// rel_tol * max(1, |lambda|) of the exact value.  Throws std::runtime_error
/// naming the index if an interval fails to shrink within the iteration cap.
template <typename Scalar>
VectorX<Scalar> tridiagonal_eigenvalues_range(const VectorX<Scalar>& d,
                                              const VectorX<Scalar>& e,
                                              Eigen::Index j_begin, Eigen::Index j_end,
                                              Scalar rel_tol) {
  const Eigen::Index n = d.size();
  if (n < 1) throw std::invalid_argument("eigensolver: dimension must be >= 1");
  if (e.size() != n - 1) throw std::invalid_argument("eigensolver: off-diagonal size mismatch");
  if (j_begin < 0 || j_end > n || j_begin > j_end)
    throw std::invalid_argument("eigensolver: bad index range");
  if (!(rel_tol > Scalar(0))) throw std::invalid_argument("eigensolver: tolerance must be > 0");

  VectorX<Scalar> out(j_end - j_begin);
  if (n == 1) {
    if (j_end > j_begin) out[0] = d[0];
    return out;
  }

  const Scalar pivmin = eig_detail::pivot_floor(e);
  auto [glo, ghi] = gershgorin_interval(d, e);

  for (Eigen::Index j = j_begin; j < j_end; ++j) {
    Scalar lo = glo, hi = ghi;
    int iter = 0;
    while (true) {
      Scalar mid = (lo + hi) / Scalar(2);
      Scalar width = hi - lo;
      if (width <= rel_tol * std::max(Scalar(1), std::abs(mid))) break;
      if (mid <= lo || mid >= hi) break;  // interval at ulp granularity
      if (++iter > kBisectionIterationCap) {
        std::ostringstream os;
        os << "eigensolver: eigenvalue " << j << " did not converge within "
           << kBisectionIterationCap << " bisection steps";
        throw std::runtime_error(os.str());
      }
      if (eig_detail::count_below(d, e, mid, pivmin) <= j)
        lo = mid;
      else
        hi = mid;
    }
    out[j - j_begin] = (lo + hi) / Scalar(2);
  }
  return out;
}

template <typename Scalar>
VectorX<Scalar> tridiagonal_eigenvalues(const VectorX<Scalar>& d, const VectorX<Scalar>& e,
                                        Scalar rel_tol) {
  return tridiagonal_eigenvalues_range(d, e, 0, d.size(), rel_tol);
}

/// Inverse-iteration eigenvector for one eigenvalue estimate.  The chain
/// Hamiltonians here have nonzero couplings throughout, so the spectrum is
/// simple and per-eigenvalue iteration is well conditioned; callers handle
/// near-degenerate pairs by re-orthogonalization.
template <typename Scalar>
VectorX<Scalar> tridiagonal_eigenvector(const VectorX<Scalar>& d, const VectorX<Scalar>& e,
                                        Scalar lambda, std::uint64_t seed) {
  const Eigen::Index n = d.size();
  if (n == 1) {
    VectorX<Scalar> v(1);
    v[0] = Scalar(1);
    return v;
  }

  // LU factorization of (T - lambda I) with partial pivoting of adjacent rows.
  VectorX<Scalar> dl = e, dd = d, du = e, du2 = VectorX<Scalar>::Zero(std::max<Eigen::Index>(n - 2, 0));
  dd.array() -= lambda;
  std::vector<bool> swapped(static_cast<std::size_t>(n - 1), false);
  Scalar anorm = dd.cwiseAbs().maxCoeff() + e.cwiseAbs().maxCoeff();
  const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * std::max(anorm, Scalar(1));
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i])) {
      if (std::abs(dd[i]) < tiny) dd[i] = (dd[i] < Scalar(0) ? -tiny : tiny);
      Scalar m = dl[i] / dd[i];
      dl[i] = m;  // multiplier
      dd[i + 1] -= m * du[i];
    } else {
      swapped[static_cast<std::size_t>(i)] = true;
      Scalar m = dd[i] / dl[i];
      dd[i] = dl[i];
      dl[i] = m;
      Scalar tmp = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = tmp - m * dd[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -m * du[i + 1];
      }
    }
  }
  if (std::abs(dd[n - 1]) < tiny) dd[n - 1] = (dd[n - 1] < Scalar(0) ? -tiny : tiny);

  auto solve = [&](VectorX<Scalar>& x) {
    for (Eigen::Index i = 0; i < n - 1; ++i) {
      if (swapped[static_cast<std::size_t>(i)]) std::swap(x[i], x[i + 1]);
      x[i + 1] -= dl[i] * x[i];
    }
    x[n - 1] /= dd[n - 1];
    x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2];
    for (Eigen::Index i = n - 3; i >= 0; --i)
      x[i] = (x[i] - du[i] * x[i + 1] -
              (swapped[static_cast<std::size_t>(i)] ? du2[i] * x[i + 2] : Scalar(0))) /
             dd[i];
  };

  VectorX<Scalar> v(n);
  std::uint64_t s = seed;
  for (Eigen::Index i = 0; i < n; ++i) {
    s = eig_detail::mix_seed(s);
    v[i] = Scalar(0.5) - Scalar(static_cast<double>(s >> 11) * 0x1.0p-53);
  }
  v.normalize();
  for (int pass = 0; pass < 3; ++pass) {
    solve(v);
    v.normalize();
  }
  return v;
}

}  // namespace hspectra
