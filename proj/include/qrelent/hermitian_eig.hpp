#ifndef QRELENT_HERMITIAN_EIG_HPP
#define QRELENT_HERMITIAN_EIG_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qrelent/complex_matrix.hpp"
#include "qrelent/errors.hpp"
#include "qrelent/tolerances.hpp"

namespace qrelent {

// Eigenvalues in non-increasing order; column i of `vectors` belongs to
// eigenvalues[i].  The basis is fully deterministic: within each nearly
// degenerate cluster the vectors are re-derived from the coordinate basis
// (see reselect_cluster below), which also pins the phases.
struct EigenSystem {
  std::vector<double> eigenvalues;
  ComplexMatrix vectors;

  int dim() const { return vectors.rows(); }

  ComplexMatrix reconstruct() const {
    const int d = dim();
    ComplexMatrix scaled(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) scaled(i, j) = eigenvalues[j] * vectors(i, j);
    return scaled * vectors.adjoint();
  }
};

namespace detail {

// One complex Givens rotation zeroing A(p,q); A <- R^+ A R, V <- V R.
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, int p, int q) {
  const cplx apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag == 0.0) return;
  const double alpha = a(p, p).real();
  const double beta = a(q, q).real();
  const cplx u = apq / mag;
  const double tau = (beta - alpha) / (2.0 * mag);
  const double sign = tau >= 0.0 ? 1.0 : -1.0;
  const double t = -sign / (std::abs(tau) + std::sqrt(tau * tau + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const cplx sigma = s * std::conj(u);
  const cplx sigma_c = std::conj(sigma);

  const int d = a.rows();
  for (int i = 0; i < d; ++i) {  // columns p,q
    const cplx aip = a(i, p), aiq = a(i, q);
    a(i, p) = c * aip + sigma * aiq;
    a(i, q) = c * aiq - sigma_c * aip;
  }
  for (int j = 0; j < d; ++j) {  // rows p,q
    const cplx apj = a(p, j), aqj = a(q, j);
    a(p, j) = c * apj + sigma_c * aqj;
    a(q, j) = c * aqj - sigma * apj;
  }
  for (int i = 0; i < d; ++i) {
    const cplx vip = v(i, p), viq = v(i, q);
    v(i, p) = c * vip + sigma * viq;
    v(i, q) = c * viq - sigma_c * vip;
  }
}

inline double off_diagonal_frobenius(const ComplexMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Replaces the columns [begin, end) of `vectors` (an orthonormal basis of one
// eigenspace) by the canonical basis obtained from the coordinate vectors:
// project e_0, e_1, ... into the remaining subspace, take the first projection
// with norm above tie_break_tol, normalize, remove its direction, repeat.
inline void reselect_cluster(ComplexMatrix& vectors, int begin, int end, double tie_break_tol) {
  const int d = vectors.rows();
  const int k = end - begin;
  if (k <= 0) return;

  // basis[r] = current orthonormal basis column r (coefficients over the
  // original cluster columns are tracked implicitly by rebuilding vectors).
  std::vector<std::vector<cplx>> basis(k, std::vector<cplx>(d));
  for (int r = 0; r < k; ++r)
    for (int i = 0; i < d; ++i) basis[r][i] = vectors(i, begin + r);

  std::vector<std::vector<cplx>> chosen;
  chosen.reserve(k);

  int remaining = k;
  while (remaining > 0) {
    int pick = -1;
    std::vector<cplx> coeff(remaining);
    for (int j = 0; j < d && pick < 0; ++j) {
      // y = B^+ e_j over the remaining basis columns.
      double norm_sq = 0.0;
      for (int r = 0; r < remaining; ++r) {
        coeff[r] = std::conj(basis[r][j]);
        norm_sq += std::norm(coeff[r]);
      }
      if (std::sqrt(norm_sq) > tie_break_tol) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (int r = 0; r < remaining; ++r) coeff[r] *= inv;
        pick = j;
      }
    }
    if (pick < 0) throw NoConvergence("degenerate-cluster ordering: no usable coordinate projection");

    std::vector<cplx> psi(d, cplx{});
    for (int r = 0; r < remaining; ++r)
      for (int i = 0; i < d; ++i) psi[i] += coeff[r] * basis[r][i];
    chosen.push_back(psi);

    // Deflate: orthonormal basis of the complement of `coeff` inside the
    // span of the remaining columns, drawn from coordinate directions.
    std::vector<std::vector<cplx>> next;
    next.reserve(remaining - 1);
    for (int cand = 0; cand < remaining && static_cast<int>(next.size()) < remaining - 1; ++cand) {
      std::vector<cplx> w(remaining, cplx{});
      w[cand] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        cplx ip{};
        for (int r = 0; r < remaining; ++r) ip += std::conj(coeff[r]) * w[r];
        for (int r = 0; r < remaining; ++r) w[r] -= ip * coeff[r];
        for (const auto& z : next) {
          cplx zi{};
          for (int r = 0; r < remaining; ++r) zi += std::conj(z[r]) * w[r];
          for (int r = 0; r < remaining; ++r) w[r] -= zi * z[r];
        }
      }
      double nw = 0.0;
      for (const cplx& x : w) nw += std::norm(x);
      nw = std::sqrt(nw);
      if (nw > 1e-6) {
        for (cplx& x : w) x /= nw;
        next.push_back(std::move(w));
      }
    }
    if (static_cast<int>(next.size()) != remaining - 1)
      throw NoConvergence("degenerate-cluster ordering: deflation failed");

    // Rotate the ambient-space basis columns to the deflated coordinates.
    std::vector<std::vector<cplx>> new_basis(remaining - 1, std::vector<cplx>(d, cplx{}));
    for (int t = 0; t < remaining - 1; ++t)
      for (int r = 0; r < remaining; ++r)
        for (int i = 0; i < d; ++i) new_basis[t][i] += next[t][r] * basis[r][i];
    basis = std::move(new_basis);
    --remaining;
  }

  for (int r = 0; r < k; ++r)
    for (int i = 0; i < d; ++i) vectors(i, begin + r) = chosen[r][i];
}

inline bool exactly_diagonal(const ComplexMatrix& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) != cplx{}) return false;
  return true;
}

// Exactly diagonal input short-circuits the sweeps; the result is bitwise the
// one the general path produces (no rotations fire, and reselect_cluster on
// coordinate columns returns coordinate columns in ascending index order).
inline EigenSystem diagonal_eig(const ComplexMatrix& a, const Tolerances& tol) {
  const int d = a.rows();
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });

  EigenSystem out;
  out.eigenvalues.resize(d);
  out.vectors = ComplexMatrix(d, d);
  for (int j = 0; j < d; ++j) out.eigenvalues[j] = a(order[j], order[j]).real();

  double scale = 0.0;
  for (double lam : out.eigenvalues) scale = std::max(scale, std::abs(lam));
  const double gap_floor = tol.degeneracy_tol * scale;
  int begin = 0;
  for (int i = 0; i < d; ++i) {
    if (i + 1 < d && out.eigenvalues[i] - out.eigenvalues[i + 1] <= gap_floor) continue;
    std::sort(order.begin() + begin, order.begin() + i + 1);  // canonical cluster basis
    for (int j = begin; j <= i; ++j) out.vectors(order[j], j) = 1.0;
    begin = i + 1;
  }
  return out;
}

}  // namespace detail

// Full eigendecomposition of a hermitian matrix by cyclic complex Jacobi
// sweeps.  Stops once the off-diagonal Frobenius norm falls below
// off_diag_factor * ||A||_F; throws NoConvergence after max_sweeps.
inline EigenSystem hermitian_eig(const ComplexMatrix& a, const Tolerances& tol = {}) {
  if (!a.is_square()) throw DimensionMismatch("hermitian_eig: matrix not square");
  if (!a.all_finite()) throw NotFinite("hermitian_eig: non-finite entries");
  if (!a.is_hermitian(tol.hermitian_tol)) throw NonHermitian("hermitian_eig: matrix not hermitian");
  if (detail::exactly_diagonal(a)) return detail::diagonal_eig(a, tol);

  const int d = a.rows();
  ComplexMatrix w = hermitize(a);
  ComplexMatrix v = ComplexMatrix::identity(d);

  const double target = tol.off_diag_factor * w.frobenius();
  bool converged = detail::off_diagonal_frobenius(w) <= target;
  for (int sweep = 0; sweep < tol.max_sweeps && !converged; ++sweep) {
    for (int p = 0; p + 1 < d; ++p)
      for (int q = p + 1; q < d; ++q) detail::jacobi_rotate(w, v, p, q);
    converged = detail::off_diagonal_frobenius(w) <= target;
  }
  if (!converged) throw NoConvergence("hermitian_eig: Jacobi sweeps did not converge");

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return w(i, i).real() > w(j, j).real(); });

  EigenSystem out;
  out.eigenvalues.resize(d);
  out.vectors = ComplexMatrix(d, d);
  for (int j = 0; j < d; ++j) {
    out.eigenvalues[j] = w(order[j], order[j]).real();
    for (int i = 0; i < d; ++i) out.vectors(i, j) = v(i, order[j]);
  }

  // Canonicalize nearly degenerate clusters (relative gap rule).
  double scale = 0.0;
  for (double lam : out.eigenvalues) scale = std::max(scale, std::abs(lam));
  const double gap_floor = tol.degeneracy_tol * scale;
  int begin = 0;
  for (int i = 0; i < d; ++i) {
    const bool last = (i + 1 == d);
    if (last || out.eigenvalues[i] - out.eigenvalues[i + 1] > gap_floor) {
      detail::reselect_cluster(out.vectors, begin, i + 1, tol.tie_break_tol);
      begin = i + 1;
    }
  }
  return out;
}

// Number of eigenvalues above rank_rel_tol * lambda_max; 0 when the top
// eigenvalue is not positive.
inline int numerical_rank(const EigenSystem& es, const Tolerances& tol = {}) {
  if (es.eigenvalues.empty() || es.eigenvalues[0] <= 0.0) return 0;
  const double cut = tol.rank_rel_tol * es.eigenvalues[0];
  int r = 0;
  for (double lam : es.eigenvalues)
    if (lam > cut) ++r;
  return r;
}

}  // namespace qrelent

#endif  // QRELENT_HERMITIAN_EIG_HPP
