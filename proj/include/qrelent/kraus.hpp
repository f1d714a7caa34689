#ifndef QRELENT_KRAUS_HPP
#define QRELENT_KRAUS_HPP

#include <utility>
#include <vector>

#include "qrelent/random.hpp"
#include "qrelent/sequences.hpp"

namespace qrelent {

inline constexpr double kKrausSlack = 1e-9;

enum class MapKind { channel, operation, general };

// Completely positive map in Kraus form.  All Kraus operators share the same
// dim_out x dim_in shape; the kind tag is validated on construction.
class KrausMap {
 public:
  KrausMap(std::vector<ComplexMatrix> ops, MapKind kind, const Tolerances& tol = {})
      : ops_(std::move(ops)), kind_(kind) {
    if (ops_.empty()) throw ShapeMismatch("KrausMap: needs at least one Kraus operator");
    dout_ = ops_[0].rows();
    din_ = ops_[0].cols();
    if (dout_ <= 0 || din_ <= 0) throw ShapeMismatch("KrausMap: degenerate shape");
    for (const auto& v : ops_) {
      if (v.rows() != dout_ || v.cols() != din_) throw ShapeMismatch("KrausMap: mixed shapes");
      if (!v.all_finite()) throw NotFinite("KrausMap: non-finite Kraus entries");
    }
    if (kind_ == MapKind::channel) {
      const double defect =
          operator_norm(kraus_sum() - ComplexMatrix::identity(din_), tol);
      if (defect > kKrausSlack) throw NotAChannel("KrausMap: Kraus sum is not the identity");
    } else if (kind_ == MapKind::operation) {
      const EigenSystem es = hermitian_eig(kraus_sum(), tol);
      if (!es.eigenvalues.empty() && es.eigenvalues.front() > 1.0 + kKrausSlack)
        throw NotAnOperation("KrausMap: Kraus sum exceeds the identity");
    }
  }

  static KrausMap identity(int dim) {
    return KrausMap({ComplexMatrix::identity(dim)}, MapKind::channel);
  }

  int dim_in() const { return din_; }
  int dim_out() const { return dout_; }
  MapKind kind() const { return kind_; }
  int size() const { return static_cast<int>(ops_.size()); }
  const ComplexMatrix& op(int k) const { return ops_[static_cast<std::size_t>(k)]; }
  const std::vector<ComplexMatrix>& ops() const { return ops_; }

  // sum_k V_k^+ V_k, accumulated in list order for reproducibility
  ComplexMatrix kraus_sum() const {
    ComplexMatrix s(din_, din_);
    for (const auto& v : ops_) s = s + v.adjoint() * v;
    return hermitize(s);
  }

  PsdOperator apply(const PsdOperator& rho, const Tolerances& tol = {}) const {
    if (rho.dim() != din_) throw DimensionMismatch("KrausMap::apply: dimension mismatch");
    ComplexMatrix out(dout_, dout_);
    for (const auto& v : ops_) out = out + v * rho.matrix() * v.adjoint();
    return PsdOperator(out, tol);
  }

  // dual map on observables: sum_k V_k^+ B V_k
  ComplexMatrix dual_apply(const ComplexMatrix& b) const {
    if (b.rows() != dout_ || b.cols() != dout_)
      throw DimensionMismatch("KrausMap::dual_apply: observable dimension mismatch");
    ComplexMatrix out(din_, din_);
    for (const auto& v : ops_) out = out + v.adjoint() * b * v;
    return out;
  }

 private:
  std::vector<ComplexMatrix> ops_;
  MapKind kind_;
  int din_ = 0, dout_ = 0;
};

// The operation formed by dropping the first j Kraus operators.  j = size
// yields the zero map (a single zero Kraus operator).
inline KrausMap tail_map(const KrausMap& phi, int j, const Tolerances& tol = {}) {
  if (j < 0 || j > phi.size()) throw DimensionMismatch("tail_map: j out of range");
  if (j == 0) return phi;
  if (j == phi.size())
    return KrausMap({ComplexMatrix(phi.dim_out(), phi.dim_in())}, MapKind::operation, tol);
  std::vector<ComplexMatrix> ops(phi.ops().begin() + j, phi.ops().end());
  return KrausMap(std::move(ops), MapKind::operation, tol);
}

// ---------------------------------------------------------------------------
// Bipartite structure and dilations
// ---------------------------------------------------------------------------

// Product space B x E with B-major indexing: composite index = b * dim_e + e.
struct BipartiteShape {
  int dim_b = 1;
  int dim_e = 1;
  int total() const { return dim_b * dim_e; }
};

inline PsdOperator partial_trace_env(const PsdOperator& rho, const BipartiteShape& shape,
                                     const Tolerances& tol = {}) {
  if (shape.dim_b <= 0 || shape.dim_e <= 0 || shape.total() != rho.dim())
    throw ShapeMismatch("partial_trace_env: shape does not factor the dimension");
  const int db = shape.dim_b, de = shape.dim_e;
  ComplexMatrix out(db, db);
  for (int b = 0; b < db; ++b)
    for (int bp = 0; bp < db; ++bp) {
      cplx s = 0.0;
      for (int e = 0; e < de; ++e) s += rho.matrix()(b * de + e, bp * de + e);
      out(b, bp) = s;
    }
  return PsdOperator(out, tol);
}

struct DilatedChannel {
  KrausMap channel;       // acts into the (dim_out + 1)-dimensional space
  Projector b_projector;  // embedding of the original output space
  ComplexMatrix deficit;  // I - dual(I): weight carried by the extra coordinate
};

// Extends a trace-non-increasing map to a channel on one extra output
// coordinate: the appended corner receives the trace deficit Tr(I - dual(I)) rho.
inline DilatedChannel dilate_operation_to_channel(const KrausMap& phi,
                                                  const Tolerances& tol = {}) {
  const int din = phi.dim_in(), dout = phi.dim_out();
  const ComplexMatrix sum = phi.kraus_sum();
  {
    const EigenSystem es = hermitian_eig(sum, tol);
    if (!es.eigenvalues.empty() && es.eigenvalues.front() > 1.0 + kKrausSlack)
      throw NotAnOperation("dilate_operation_to_channel: trace increasing map");
  }

  std::vector<ComplexMatrix> ops;
  ops.reserve(static_cast<std::size_t>(phi.size()) + static_cast<std::size_t>(din));
  for (int k = 0; k < phi.size(); ++k) {
    ComplexMatrix v(dout + 1, din);
    for (int i = 0; i < dout; ++i)
      for (int j = 0; j < din; ++j) v(i, j) = phi.op(k)(i, j);
    ops.push_back(std::move(v));
  }

  const ComplexMatrix deficit = hermitize(ComplexMatrix::identity(din) - sum);
  const EigenSystem es = hermitian_eig(deficit, tol);
  for (int i = 0; i < din; ++i) {
    const double w = es.eigenvalues[static_cast<std::size_t>(i)];
    if (w <= 1e-15) continue;
    ComplexMatrix row(dout + 1, din);
    for (int j = 0; j < din; ++j) row(dout, j) = std::sqrt(w) * std::conj(es.vectors(j, i));
    ops.push_back(std::move(row));
  }

  ComplexMatrix pb(dout + 1, dout + 1);
  for (int i = 0; i < dout; ++i) pb(i, i) = 1.0;
  return DilatedChannel{KrausMap(std::move(ops), MapKind::channel, tol), Projector(pb, tol),
                        deficit};
}

struct StinespringDilation {
  ComplexMatrix isometry;  // (dim_out * K) x dim_in, B-major composite rows
  BipartiteShape shape;    // dim_b = dim_out, dim_e = K
};

// V |phi> = sum_k (V_k |phi>) (x) |k>_E; tracing out E recovers the channel.
inline StinespringDilation stinespring_isometry(const KrausMap& phi,
                                                const Tolerances& tol = {}) {
  const int din = phi.dim_in(), dout = phi.dim_out(), k_ops = phi.size();
  const double defect = operator_norm(phi.kraus_sum() - ComplexMatrix::identity(din), tol);
  if (defect > kKrausSlack) throw NotAChannel("stinespring_isometry: map is not a channel");

  ComplexMatrix v(dout * k_ops, din);
  for (int k = 0; k < k_ops; ++k)
    for (int b = 0; b < dout; ++b)
      for (int a = 0; a < din; ++a) v(b * k_ops + k, a) = phi.op(k)(b, a);
  return StinespringDilation{std::move(v), BipartiteShape{dout, k_ops}};
}

// [V ; sqrt(I - V^+V)]: isometry from the domain into the direct sum whose top
// block is V itself.
inline ComplexMatrix contraction_dilation(const ComplexMatrix& v, const Tolerances& tol = {}) {
  if (operator_norm(v, tol) > 1.0 + 1e-12)
    throw NotAContraction("contraction_dilation: operator norm exceeds one");
  const int din = v.cols(), dout = v.rows();
  const ComplexMatrix gap = hermitize(ComplexMatrix::identity(din) - v.adjoint() * v);
  const ComplexMatrix root = sqrt_psd(gap, tol);
  ComplexMatrix out(dout + din, din);
  for (int i = 0; i < dout; ++i)
    for (int j = 0; j < din; ++j) out(i, j) = v(i, j);
  for (int i = 0; i < din; ++i)
    for (int j = 0; j < din; ++j) out(dout + i, j) = root(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Support alignment (eigenbasis transport)
// ---------------------------------------------------------------------------

namespace detail {

inline Projector column_span_projector(const ComplexMatrix& vectors, int lo, int hi,
                                       const Tolerances& tol) {
  const int d = vectors.rows();
  ComplexMatrix cols(d, hi - lo);
  for (int j = lo; j < hi; ++j)
    for (int i = 0; i < d; ++i) cols(i, j - lo) = vectors(i, j);
  return Projector::from_columns(cols, hi - lo, tol);
}

// Deterministic orthonormal completion: projects coordinate vectors against
// the accepted columns (two passes) and keeps the survivors.
inline void complete_columns(std::vector<std::vector<cplx>>& cols, int dim, int wanted) {
  auto project_out = [&cols, dim](std::vector<cplx>& v) {
    for (const auto& u : cols) {
      cplx overlap = 0.0;
      for (int i = 0; i < dim; ++i) overlap += std::conj(u[static_cast<std::size_t>(i)]) * v[static_cast<std::size_t>(i)];
      for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] -= overlap * u[static_cast<std::size_t>(i)];
    }
  };
  int added = 0;
  for (int cand = 0; cand < dim && added < wanted; ++cand) {
    std::vector<cplx> v(static_cast<std::size_t>(dim), 0.0);
    v[static_cast<std::size_t>(cand)] = 1.0;
    project_out(v);
    project_out(v);
    double norm2 = 0.0;
    for (const auto& z : v) norm2 += std::norm(z);
    if (norm2 < 1e-6) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& z : v) z *= inv;
    cols.push_back(std::move(v));
    ++added;
  }
  if (added < wanted)
    throw NoConvergence("complete_columns: failed to complete an orthonormal system");
}

}  // namespace detail

// Partial isometry W aligning the support of sigma_n with the support of the
// limit: W^+W is the limit support projector, W W^+ covers the support of
// sigma_n, and W^+ sigma_n W carries the ordered spectrum of sigma_n in the
// limit eigenbasis.  Built blockwise over the distinct-eigenvalue clusters of
// the limit; when sigma_n has lower rank the remainder is paired column by
// column against a deterministic completion.
inline PartialIsometry support_alignment_isometry(const OperatorSequence& sigmas, int n,
                                                  const Tolerances& tol = {}) {
  const EigenSystem e0 = ordered_eig(sigmas.limit(), tol);
  const int d = e0.dim();
  const int r0 = numerical_rank(e0, tol);
  if (r0 == 0) throw ZeroLimit("support_alignment_isometry: zero limit operator");

  const EigenSystem en = ordered_eig(sigmas.term(n), tol);
  const int rn = numerical_rank(en, tol);
  if (rn > r0)
    throw RankOverflow("support_alignment_isometry: term rank exceeds the limit rank");

  const std::vector<int> ends = detail::positive_cluster_ends(e0, r0, tol);
  ComplexMatrix w(d, d);
  int covered = 0;
  for (int end : ends) {
    if (end > rn) break;
    const Projector q0 = detail::column_span_projector(e0.vectors, covered, end, tol);
    const Projector qn = detail::column_span_projector(en.vectors, covered, end, tol);
    w = w + polar_partial_isometry(qn, q0, tol, true).matrix();
    covered = end;
  }

  if (covered < r0) {
    std::vector<std::vector<cplx>> targets;
    targets.reserve(static_cast<std::size_t>(rn));
    for (int j = 0; j < rn; ++j) {
      std::vector<cplx> col(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) col[static_cast<std::size_t>(i)] = en.vectors(i, j);
      targets.push_back(std::move(col));
    }
    detail::complete_columns(targets, d, r0 - rn);
    // targets[covered..r0) now lists the remaining support directions of
    // sigma_n followed by the completion, paired against the limit eigenbasis
    for (int j = covered; j < r0; ++j) {
      const auto& t = targets[static_cast<std::size_t>(j)];
      for (int i = 0; i < d; ++i)
        for (int ip = 0; ip < d; ++ip)
          w(i, ip) = w(i, ip) + t[static_cast<std::size_t>(i)] * std::conj(e0.vectors(ip, j));
    }
  }
  return PartialIsometry(w, tol);
}

// ---------------------------------------------------------------------------
// Strong convergence probes
// ---------------------------------------------------------------------------

// Coordinate pure states, the maximally mixed state, and a few seeded random
// states: spanning enough to detect any deviation in finite dimension.
inline std::vector<PsdOperator> default_probe_states(int dim, std::uint64_t seed = 0) {
  std::vector<PsdOperator> probes;
  for (int i = 0; i < dim; ++i) {
    ComplexMatrix e(dim, dim);
    e(i, i) = 1.0;
    probes.emplace_back(e);
  }
  probes.emplace_back((1.0 / dim) * ComplexMatrix::identity(dim));
  Rng rng(seed);
  for (int k = 0; k < 8; ++k) probes.push_back(random_state(dim, rng));
  return probes;
}

struct ConvergenceResiduals {
  std::vector<double> primal;  // max over probes of || Phi_n(rho) - Phi_0(rho) ||_1
  std::vector<double> dual;    // max over probe pairs of |Tr rho (dual_n(B) - dual_0(B))|
};

inline ConvergenceResiduals strong_convergence_residual(const std::vector<KrausMap>& maps,
                                                        const std::vector<PsdOperator>& probes,
                                                        const Tolerances& tol = {}) {
  if (maps.empty()) throw DimensionMismatch("strong_convergence_residual: no maps");
  const int din = maps[0].dim_in(), dout = maps[0].dim_out();
  for (const auto& m : maps)
    if (m.dim_in() != din || m.dim_out() != dout)
      throw DimensionMismatch("strong_convergence_residual: mixed map shapes");
  for (const auto& p : probes)
    if (p.dim() != din) throw DimensionMismatch("strong_convergence_residual: probe dimension");

  std::vector<ComplexMatrix> observables;
  observables.push_back(ComplexMatrix::identity(dout));
  for (int i = 0; i < dout; ++i) {
    ComplexMatrix e(dout, dout);
    e(i, i) = 1.0;
    observables.push_back(std::move(e));
  }

  std::vector<PsdOperator> base_images;
  base_images.reserve(probes.size());
  for (const auto& p : probes) base_images.push_back(maps[0].apply(p, tol));
  std::vector<ComplexMatrix> base_duals;
  base_duals.reserve(observables.size());
  for (const auto& b : observables) base_duals.push_back(maps[0].dual_apply(b));

  ConvergenceResiduals out;
  out.primal.resize(maps.size(), 0.0);
  out.dual.resize(maps.size(), 0.0);
  for (std::size_t n = 0; n < maps.size(); ++n) {
    double worst = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const PsdOperator img = maps[n].apply(probes[i], tol);
      worst = std::max(worst, trace_norm(img.matrix() - base_images[i].matrix(), tol));
    }
    out.primal[n] = worst;

    double worst_dual = 0.0;
    for (std::size_t j = 0; j < observables.size(); ++j) {
      const ComplexMatrix diff = maps[n].dual_apply(observables[j]) - base_duals[j];
      for (const auto& p : probes)
        worst_dual = std::max(worst_dual, std::abs(trace_of_product_real(p.matrix(), diff)));
    }
    out.dual[n] = worst_dual;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

inline KrausMap random_channel(int dim_in, int dim_out, int n_kraus, Rng& rng,
                               const Tolerances& tol = {}) {
  if (dim_in <= 0 || dim_out <= 0 || n_kraus <= 0)
    throw ShapeMismatch("random_channel: degenerate shape");
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<ComplexMatrix> ops;
    ops.reserve(static_cast<std::size_t>(n_kraus));
    for (int k = 0; k < n_kraus; ++k) ops.push_back(random_gaussian(dim_out, dim_in, rng));
    ComplexMatrix s(dim_in, dim_in);
    for (const auto& v : ops) s = s + v.adjoint() * v;
    const EigenSystem es = hermitian_eig(hermitize(s), tol);
    if (es.eigenvalues.back() <= 1e-10 * es.eigenvalues.front()) continue;
    // whiten: right-multiply by s^{-1/2} so the Kraus sum is the identity
    ComplexMatrix root_inv(dim_in, dim_in);
    for (int j = 0; j < dim_in; ++j) {
      const double w = 1.0 / std::sqrt(es.eigenvalues[static_cast<std::size_t>(j)]);
      for (int i = 0; i < dim_in; ++i) root_inv(i, j) = w * es.vectors(i, j);
    }
    const ComplexMatrix whitener = hermitize(root_inv * es.vectors.adjoint());
    for (auto& v : ops) v = v * whitener;
    return KrausMap(std::move(ops), MapKind::channel, tol);
  }
  throw NoConvergence("random_channel: could not draw an invertible Kraus sum");
}

// Channel composed with a strict contraction on the output side: trace
// non-increasing with a generically non-scalar deficit.
inline KrausMap random_operation(int dim_in, int dim_out, int n_kraus, Rng& rng,
                                 const Tolerances& tol = {}) {
  const KrausMap base = random_channel(dim_in, dim_out, n_kraus, rng, tol);
  const PsdOperator a = random_psd(dim_out, rng);
  const double shrink = rng.uniform(0.3, 0.95) / std::max(operator_norm(a.matrix(), tol), 1e-12);
  const ComplexMatrix c = shrink * a.matrix();
  std::vector<ComplexMatrix> ops;
  ops.reserve(static_cast<std::size_t>(base.size()));
  for (int k = 0; k < base.size(); ++k) ops.push_back(c * base.op(k));
  return KrausMap(std::move(ops), MapKind::operation, tol);
}

}  // namespace qrelent

#endif  // QRELENT_KRAUS_HPP
