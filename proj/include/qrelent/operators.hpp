#ifndef QRELENT_OPERATORS_HPP
#define QRELENT_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "qrelent/complex_matrix.hpp"
#include "qrelent/hermitian_eig.hpp"

namespace qrelent {

// Positive semidefinite operator.  Construction validates hermiticity and
// scrubs the antihermitian dust; positivity is an invariant of the producers
// (use check_psd at trust boundaries such as file readers).
class PsdOperator {
 public:
  explicit PsdOperator(const ComplexMatrix& m, const Tolerances& tol = {}) {
    if (!m.is_square()) throw DimensionMismatch("PsdOperator: matrix not square");
    if (!m.all_finite()) throw NotFinite("PsdOperator: non-finite entries");
    if (!m.is_hermitian(tol.hermitian_tol)) throw NonHermitian("PsdOperator: matrix not hermitian");
    m_ = hermitize(m);
  }

  static PsdOperator zero(int d) { return PsdOperator(ComplexMatrix::zero(d, d)); }

  int dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  double trace() const { return m_.trace_real(); }

  // Trace doubles as the l1 mass for psd operators.
  bool is_zero(const Tolerances& tol = {}) const { return trace() <= tol.zero_trace_tol; }

 private:
  ComplexMatrix m_;
};

inline void check_psd(const PsdOperator& a, const Tolerances& tol = {}) {
  const EigenSystem es = hermitian_eig(a.matrix(), tol);
  if (!es.eigenvalues.empty() && es.eigenvalues.back() < -tol.psd_slack)
    throw NotPositive("operator has an eigenvalue below -psd_slack");
}

// Orthogonal projector; rank is recovered from the trace.
class Projector {
 public:
  explicit Projector(const ComplexMatrix& m, const Tolerances& tol = {}) {
    if (!m.is_square()) throw DimensionMismatch("Projector: matrix not square");
    if (!m.all_finite()) throw NotFinite("Projector: non-finite entries");
    if (!m.is_hermitian(tol.hermitian_tol)) throw NonHermitian("Projector: matrix not hermitian");
    m_ = hermitize(m);
    if ((m_ * m_ - m_).max_abs() > tol.idem_tol * (1.0 + m_.max_abs()))
      throw NotAProjector("Projector: idempotency defect too large");
    const double tr = m_.trace_real();
    rank_ = static_cast<int>(std::llround(tr));
    if (std::abs(tr - rank_) > 1e-6) throw NotAProjector("Projector: trace is not near an integer");
  }

  static Projector identity(int d) { return Projector(ComplexMatrix::identity(d)); }
  static Projector zero(int d) { return Projector(ComplexMatrix::zero(d, d)); }

  // P = V V^+ from orthonormal columns [0, k) of `cols`.
  static Projector from_columns(const ComplexMatrix& cols, int k, const Tolerances& tol = {}) {
    const int d = cols.rows();
    if (k < 0 || k > cols.cols()) throw DimensionMismatch("Projector::from_columns: bad column count");
    if (k == d) return identity(d);
    ComplexMatrix v(d, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < d; ++i) v(i, j) = cols(i, j);
    return Projector(v * v.adjoint(), tol);
  }

  int dim() const { return m_.rows(); }
  int rank() const { return rank_; }
  const ComplexMatrix& matrix() const { return m_; }

  Projector complement() const {
    return Projector(ComplexMatrix::identity(dim()) - m_);
  }

 private:
  ComplexMatrix m_;
  int rank_;
};

// W with W^+W and WW^+ both projectors.
class PartialIsometry {
 public:
  explicit PartialIsometry(const ComplexMatrix& w, const Tolerances& tol = {}) : m_(w) {
    if (!w.all_finite()) throw NotFinite("PartialIsometry: non-finite entries");
    const ComplexMatrix g = w.adjoint() * w;
    const ComplexMatrix h = w * w.adjoint();
    const double scale = 1.0 + w.max_abs();
    if ((g * g - g).max_abs() > tol.idem_tol * scale || (h * h - h).max_abs() > tol.idem_tol * scale)
      throw NotAPartialIsometry("PartialIsometry: W^+W or WW^+ is not a projector");
  }

  const ComplexMatrix& matrix() const { return m_; }
  int rows() const { return m_.rows(); }
  int cols() const { return m_.cols(); }

  Projector initial_projector(const Tolerances& tol = {}) const {
    return Projector(m_.adjoint() * m_, tol);
  }
  Projector final_projector(const Tolerances& tol = {}) const {
    return Projector(m_ * m_.adjoint(), tol);
  }

 private:
  ComplexMatrix m_;
};

inline EigenSystem ordered_eig(const PsdOperator& a, const Tolerances& tol = {}) {
  return hermitian_eig(a.matrix(), tol);
}

// Projector onto the span of the top min(m, numerical rank) eigenvectors of
// an already computed decomposition.
inline Projector projector_from_top_eigenvectors(const EigenSystem& es, int m,
                                                 const Tolerances& tol = {}) {
  if (m < 0) throw NegativeInput("projector_from_top_eigenvectors: m must be >= 0");
  const int k = std::min(m, numerical_rank(es, tol));
  if (k == 0) return Projector::zero(es.dim());
  return Projector::from_columns(es.vectors, k, tol);
}

inline Projector spectral_projector_top(const PsdOperator& a, int m, const Tolerances& tol = {}) {
  return projector_from_top_eigenvectors(ordered_eig(a, tol), m, tol);
}

inline Projector support_projector(const PsdOperator& a, const Tolerances& tol = {}) {
  return spectral_projector_top(a, a.dim(), tol);
}

// Hermitian trace norm / operator norm via the eigenvalues.
inline std::pair<double, double> hermitian_norms(const ComplexMatrix& a, const Tolerances& tol = {}) {
  const EigenSystem es = hermitian_eig(a, tol);
  double tn = 0.0, on = 0.0;
  for (double lam : es.eigenvalues) {
    tn += std::abs(lam);
    on = std::max(on, std::abs(lam));
  }
  return {tn, on};
}

// Singular values of a general matrix, non-increasing, via the hermitian
// eigenvalues of the smaller Gram matrix.
inline std::vector<double> singular_values(const ComplexMatrix& a, const Tolerances& tol = {}) {
  const bool tall = a.rows() >= a.cols();
  const ComplexMatrix gram = tall ? hermitize(a.adjoint() * a) : hermitize(a * a.adjoint());
  const EigenSystem es = hermitian_eig(gram, tol);
  std::vector<double> s(es.eigenvalues.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max(es.eigenvalues[i], 0.0));
  return s;
}

// (trace norm, operator norm).  Hermitian inputs take the exact eigenvalue
// path; everything else goes through singular values.
inline std::pair<double, double> norms(const ComplexMatrix& a, const Tolerances& tol = {}) {
  if (a.is_square() && a.is_hermitian(tol.hermitian_tol)) return hermitian_norms(a, tol);
  const std::vector<double> s = singular_values(a, tol);
  double tn = 0.0;
  for (double v : s) tn += v;
  return {tn, s.empty() ? 0.0 : s[0]};
}

inline double trace_norm(const ComplexMatrix& a, const Tolerances& tol = {}) {
  return norms(a, tol).first;
}

inline double operator_norm(const ComplexMatrix& a, const Tolerances& tol = {}) {
  return norms(a, tol).second;
}

// True when supp(rho) fits inside supp(sigma): the mass of rho compressed
// onto ker(sigma) must stay below containment_tol * max(Tr rho, floor).
inline bool support_contained(const PsdOperator& rho, const PsdOperator& sigma,
                              const Tolerances& tol = {}) {
  if (rho.is_zero(tol)) return true;
  const Projector q = support_projector(sigma, tol);
  const ComplexMatrix qc = q.complement().matrix();
  const ComplexMatrix leak = hermitize(qc * rho.matrix() * qc);
  const double leak_mass = hermitian_norms(leak, tol).first;
  return leak_mass <= tol.containment_tol * std::max(rho.trace(), tol.containment_floor);
}

// log(sigma) on its support, zero on the kernel.
inline ComplexMatrix log_on_support(const PsdOperator& sigma, const Tolerances& tol = {}) {
  const EigenSystem es = ordered_eig(sigma, tol);
  const int r = numerical_rank(es, tol);
  if (r == 0) throw ZeroOperator("log_on_support: operator is numerically zero");
  const int d = sigma.dim();
  ComplexMatrix scaled(d, r);
  ComplexMatrix v(d, r);
  for (int j = 0; j < r; ++j) {
    const double w = std::log(es.eigenvalues[j]);
    for (int i = 0; i < d; ++i) {
      v(i, j) = es.vectors(i, j);
      scaled(i, j) = w * es.vectors(i, j);
    }
  }
  return hermitize(scaled * v.adjoint());
}

// Spectral square root of a hermitian matrix with negative dust clipped to 0.
inline ComplexMatrix sqrt_psd(const ComplexMatrix& h, const Tolerances& tol = {}) {
  const EigenSystem es = hermitian_eig(h, tol);
  const int d = h.rows();
  ComplexMatrix scaled(d, d);
  for (int j = 0; j < d; ++j) {
    const double w = std::sqrt(std::max(es.eigenvalues[j], 0.0));
    for (int i = 0; i < d; ++i) scaled(i, j) = w * es.vectors(i, j);
  }
  return hermitize(scaled * es.vectors.adjoint());
}

// exp(i t H) for hermitian H.
inline ComplexMatrix unitary_exp_i(const ComplexMatrix& h, double t, const Tolerances& tol = {}) {
  const EigenSystem es = hermitian_eig(h, tol);
  const int d = h.rows();
  ComplexMatrix scaled(d, d);
  for (int j = 0; j < d; ++j) {
    const cplx w = std::exp(cplx(0.0, t * es.eigenvalues[j]));
    for (int i = 0; i < d; ++i) scaled(i, j) = w * es.vectors(i, j);
  }
  return scaled * es.vectors.adjoint();
}

// Partial-isometry factor W of the polar decomposition PQ = W sqrt(QPQ).
// When ||P - Q|| < 1 the factor aligns the two subspaces: WW^+ = P and
// W^+W = Q.  With require_alignment set, a numerically zero product PQ
// between two nonzero projectors is an error instead of the zero isometry.
inline PartialIsometry polar_partial_isometry(const Projector& p, const Projector& q,
                                              const Tolerances& tol = {},
                                              bool require_alignment = false) {
  if (p.dim() != q.dim()) throw DimensionMismatch("polar_partial_isometry: dimensions differ");
  const int d = p.dim();
  const ComplexMatrix a = p.matrix() * q.matrix();
  const ComplexMatrix gram = hermitize(a.adjoint() * a);  // QPQ
  const EigenSystem es = hermitian_eig(gram, tol);
  const int r = numerical_rank(es, tol);
  const double s_max = es.eigenvalues.empty() ? 0.0 : std::sqrt(std::max(es.eigenvalues[0], 0.0));

  if (r == 0 || s_max <= 1e-12) {
    if (require_alignment && p.rank() > 0 && q.rank() > 0)
      throw DegeneratePolar("polar_partial_isometry: PQ is numerically zero");
    return PartialIsometry(ComplexMatrix::zero(d, d), tol);
  }

  // u_i = A v_i / s_i, re-orthonormalized to kill the noise amplification of
  // the small singular values.
  ComplexMatrix u(d, r), v(d, r);
  for (int j = 0; j < r; ++j) {
    const double s = std::sqrt(std::max(es.eigenvalues[j], 0.0));
    for (int i = 0; i < d; ++i) {
      cplx acc{};
      for (int k = 0; k < d; ++k) acc += a(i, k) * es.vectors(k, j);
      u(i, j) = acc / s;
      v(i, j) = es.vectors(i, j);
    }
  }
  for (int j = 0; j < r; ++j) {  // two-pass modified Gram-Schmidt on u columns
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < j; ++k) {
        cplx ip{};
        for (int i = 0; i < d; ++i) ip += std::conj(u(i, k)) * u(i, j);
        for (int i = 0; i < d; ++i) u(i, j) -= ip * u(i, k);
      }
    }
    double nn = 0.0;
    for (int i = 0; i < d; ++i) nn += std::norm(u(i, j));
    nn = std::sqrt(nn);
    if (nn <= 1e-8) throw DegeneratePolar("polar_partial_isometry: left factor collapsed");
    for (int i = 0; i < d; ++i) u(i, j) /= nn;
  }
  return PartialIsometry(u * v.adjoint(), tol);
}

// P rho P as a psd operator.
inline PsdOperator compress(const PsdOperator& rho, const Projector& p, const Tolerances& tol = {}) {
  return PsdOperator(p.matrix() * rho.matrix() * p.matrix(), tol);
}

}  // namespace qrelent

#endif  // QRELENT_OPERATORS_HPP
