#ifndef QRELENT_COMPLEX_MATRIX_HPP
#define QRELENT_COMPLEX_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "qrelent/errors.hpp"

namespace qrelent {

using cplx = std::complex<double>;

// Dense row-major complex matrix.  All entries are kept finite; the heavy
// structure (hermiticity, positivity) is validated by the wrapper types.
class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}

  ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(check_dims(rows, cols)) {}

  static ComplexMatrix zero(int rows, int cols) { return ComplexMatrix(rows, cols); }

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  cplx& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  const std::vector<cplx>& data() const { return a_; }

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b);
    ComplexMatrix r(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = a.a_[i] + b.a_[i];
    return r;
  }

  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b);
    ComplexMatrix r(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = a.a_[i] - b.a_[i];
    return r;
  }

  friend ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
    ComplexMatrix r(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = s * a.a_[i];
    return r;
  }

  friend ComplexMatrix operator*(double s, const ComplexMatrix& a) { return cplx(s, 0.0) * a; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product: inner dimensions differ");
    ComplexMatrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i) {
      for (int k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    }
    return r;
  }

  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  cplx trace() const {
    if (!is_square()) throw DimensionMismatch("trace of a non-square matrix");
    cplx t{};
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double trace_real() const { return trace().real(); }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (const cplx& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  double hermiticity_defect() const {
    if (!is_square()) throw DimensionMismatch("hermiticity defect of a non-square matrix");
    double m = 0.0;
    for (int i = 0; i < rows_; ++i)
      for (int j = i; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

  bool is_hermitian(double tol) const {
    return is_square() && hermiticity_defect() <= tol * (1.0 + max_abs());
  }

  bool all_finite() const {
    for (const cplx& v : a_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

 private:
  static std::size_t check_dims(int rows, int cols) {
    if (rows < 0 || cols < 0) throw DimensionMismatch("negative matrix dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  static void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw DimensionMismatch("matrix shapes differ");
  }

  int rows_, cols_;
  std::vector<cplx> a_;
};

// (A + A^+)/2.  Used to scrub floating-point dust off operators that are
// hermitian by construction.
inline ComplexMatrix hermitize(const ComplexMatrix& a) {
  ComplexMatrix r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return r;
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

// Re Tr(A B) without forming the product matrix.
inline double trace_of_product_real(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw DimensionMismatch("trace of product: shapes not compatible");
  double t = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t += (a(i, j) * b(j, i)).real();
  return t;
}

}  // namespace qrelent

#endif  // QRELENT_COMPLEX_MATRIX_HPP
