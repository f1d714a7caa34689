#ifndef QRELENT_RANDOM_HPP
#define QRELENT_RANDOM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "qrelent/operators.hpp"

namespace qrelent {

// Seeded source of scalars.  The uniform/gauss transforms are spelled out
// here so a seed pins the exact byte stream independent of library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(g_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(g_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double gauss() {  // Box-Muller
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  cplx cgauss() {
    const double re = gauss();
    const double im = gauss();
    return {re, im};
  }

 private:
  std::mt19937_64 g_;
};

inline ComplexMatrix random_gaussian(int rows, int cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.cgauss();
  return m;
}

// Generic unitary: Gram-Schmidt on gaussian columns (two passes), with a
// deterministic redraw if a column collapses.
inline ComplexMatrix random_unitary(int d, Rng& rng) {
  ComplexMatrix u(d, d);
  for (int j = 0; j < d; ++j) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::vector<cplx> v(d);
      for (int i = 0; i < d; ++i) v[i] = rng.cgauss();
      for (int pass = 0; pass < 2; ++pass) {
        for (int k = 0; k < j; ++k) {
          cplx ip{};
          for (int i = 0; i < d; ++i) ip += std::conj(u(i, k)) * v[i];
          for (int i = 0; i < d; ++i) v[i] -= ip * u(i, k);
        }
      }
      double nn = 0.0;
      for (const cplx& x : v) nn += std::norm(x);
      nn = std::sqrt(nn);
      if (nn > 1e-6) {
        for (int i = 0; i < d; ++i) u(i, j) = v[i] / nn;
        break;
      }
      if (attempt == 63) throw NoConvergence("random_unitary: column redraw failed");
    }
  }
  return u;
}

// Geometrically decaying spectrum with a mild jitter, non-increasing.
inline std::vector<double> decaying_spectrum(int d, Rng& rng, double alpha, double jitter) {
  std::vector<double> lam(d);
  for (int i = 0; i < d; ++i) lam[i] = std::exp(-alpha * i) * (1.0 + jitter * (rng.uniform() - 0.5));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return lam;
}

inline PsdOperator random_psd(int d, Rng& rng, double alpha = 0.5, double jitter = 0.5) {
  const ComplexMatrix u = random_unitary(d, rng);
  const std::vector<double> lam = decaying_spectrum(d, rng, alpha, jitter);
  ComplexMatrix scaled(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) scaled(i, j) = lam[j] * u(i, j);
  return PsdOperator(scaled * u.adjoint());
}

inline PsdOperator random_state(int d, Rng& rng, double alpha = 0.5) {
  const PsdOperator a = random_psd(d, rng, alpha);
  return PsdOperator((1.0 / a.trace()) * a.matrix());
}

inline Projector random_projector(int d, int rank, Rng& rng) {
  return Projector::from_columns(random_unitary(d, rng), rank);
}

inline ComplexMatrix random_hermitian(int d, Rng& rng, double op_norm_bound = 1.0) {
  ComplexMatrix h = hermitize(random_gaussian(d, d, rng));
  const double on = operator_norm(h);
  if (on > 0.0) h = (op_norm_bound / on) * h;
  return h;
}

}  // namespace qrelent

#endif  // QRELENT_RANDOM_HPP
