#ifndef QRELENT_SEQUENCES_HPP
#define QRELENT_SEQUENCES_HPP

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "qrelent/entropy.hpp"
#include "qrelent/reporting.hpp"

namespace qrelent {

// A convergent-by-intent sequence of psd operators; index 0 holds the limit
// and indices 1..n_max() the approximating terms.
class OperatorSequence {
 public:
  explicit OperatorSequence(std::vector<PsdOperator> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw DimensionMismatch("OperatorSequence: needs at least the limit term");
    for (const auto& t : terms_)
      if (t.dim() != terms_[0].dim())
        throw DimensionMismatch("OperatorSequence: mixed dimensions");
  }

  int dim() const { return terms_[0].dim(); }
  int n_max() const { return static_cast<int>(terms_.size()) - 1; }

  const PsdOperator& term(int n) const {
    if (n < 0 || n > n_max()) throw DimensionMismatch("OperatorSequence: index out of range");
    return terms_[static_cast<std::size_t>(n)];
  }

  const PsdOperator& limit() const { return terms_[0]; }

  std::vector<double> distances_to_limit(const Tolerances& tol = {}) const {
    std::vector<double> d(terms_.size());
    for (std::size_t n = 0; n < terms_.size(); ++n)
      d[n] = trace_norm(terms_[n].matrix() - terms_[0].matrix(), tol);
    return d;
  }

  // Soft convergence signal: the later half of the distances should not
  // average above the earlier half.
  bool decreasing_on_average(const Tolerances& tol = {}) const {
    const std::vector<double> d = distances_to_limit(tol);
    if (d.size() <= 2) return true;
    const std::size_t n = d.size() - 1;
    const std::size_t half = n / 2;
    double first = 0.0, second = 0.0;
    for (std::size_t i = 1; i <= half; ++i) first += d[i];
    for (std::size_t i = half + 1; i <= n; ++i) second += d[i];
    return second / static_cast<double>(n - half) <= first / static_cast<double>(half) + 1e-12;
  }

 private:
  std::vector<PsdOperator> terms_;
};

// Lazy two-index family of projectors P(n, m).  Evaluation must be pure; the
// library never mutates shared state through it.
class ProjectorFamily {
 public:
  ProjectorFamily(int dim, int m_min, int m_max, std::function<Projector(int, int)> eval)
      : dim_(dim), m_min_(m_min), m_max_(m_max), eval_(std::move(eval)) {
    if (m_min_ > m_max_) throw DimensionMismatch("ProjectorFamily: empty m range");
  }

  int dim() const { return dim_; }
  int m_min() const { return m_min_; }
  int m_max() const { return m_max_; }

  Projector at(int n, int m) const {
    if (m < m_min_ || m > m_max_) throw DimensionMismatch("ProjectorFamily: m out of range");
    return eval_(n, m);
  }

 private:
  int dim_, m_min_, m_max_;
  std::function<Projector(int, int)> eval_;
};

// P(n, m) = top-m spectral projector of sigma_n (capped at the numerical
// rank).  Eigendecompositions are shared across calls, so the family is cheap
// to probe on a grid.
inline ProjectorFamily build_strongly_consistent(const OperatorSequence& sigmas,
                                                 const Tolerances& tol = {}) {
  auto eigs = std::make_shared<std::vector<EigenSystem>>();
  eigs->reserve(sigmas.n_max() + 1);
  for (int n = 0; n <= sigmas.n_max(); ++n) eigs->push_back(ordered_eig(sigmas.term(n), tol));
  const int d = sigmas.dim();
  return ProjectorFamily(d, 0, d, [eigs, tol](int n, int m) {
    if (n < 0 || n >= static_cast<int>(eigs->size()))
      throw DimensionMismatch("projector family: n out of range");
    return projector_from_top_eigenvectors((*eigs)[static_cast<std::size_t>(n)], m, tol);
  });
}

// ---------------------------------------------------------------------------
// Family diagnostics
// ---------------------------------------------------------------------------

inline constexpr double kFamilySlack = 1e-9;

struct FamilyCheckReport {
  // base (consistency) checks
  bool monotone_ok = true;
  double worst_monotone_defect = 0.0;  // most negative eigenvalue of P(n,m+1)-P(n,m)
  int monotone_fail_n = -1, monotone_fail_m = -1;
  std::vector<int> max_rank_per_m;
  bool coverage_ok = true;
  double worst_coverage_ratio = 1.0;  // min over n of Tr(P sigma)/Tr sigma at m_max
  bool limit_distance_ok = true;
  double worst_final_distance = 0.0;  // max over m of ||P(n_max,m) - P(0,m)||

  // strong checks
  bool strong_checked = false;
  bool commutation_ok = true;
  double worst_commutator = 0.0;
  bool rank_condition_ok = true;
  int rank_fail_n = -1, rank_fail_m = -1;
  bool distance_trend_ok = true;

  bool consistent() const { return monotone_ok && coverage_ok && limit_distance_ok; }
  bool strongly_consistent() const {
    return strong_checked && consistent() && commutation_ok && rank_condition_ok &&
           distance_trend_ok;
  }
};

namespace detail {

// End positions (counts, 1-based) of the eigenvalue clusters within the
// positive spectrum; the last entry is always the numerical rank.
inline std::vector<int> positive_cluster_ends(const EigenSystem& es, int rank,
                                              const Tolerances& tol) {
  const double gap_floor =
      tol.degeneracy_tol * (es.eigenvalues.empty() ? 0.0 : es.eigenvalues[0]);
  std::vector<int> ends;
  for (int i = 0; i < rank; ++i) {
    const double next =
        i + 1 < static_cast<int>(es.eigenvalues.size()) ? es.eigenvalues[i + 1] : 0.0;
    if (i + 1 == rank || es.eigenvalues[i] - next > gap_floor) ends.push_back(i + 1);
  }
  return ends;
}

inline std::vector<int> geometric_subsample(int n_max) {
  std::vector<int> ns;
  for (int n = 1; n < n_max; n *= 2) ns.push_back(n);
  if (n_max >= 1) ns.push_back(n_max);
  return ns;
}

}  // namespace detail

// Verifies the structural properties of a projector family against the
// sequence it is meant to track: monotone nesting in m, bounded ranks,
// support coverage at m_max, and closeness to the limit projector at the
// largest sampled n.
inline FamilyCheckReport check_consistent(const ProjectorFamily& fam, const OperatorSequence& sigmas,
                                          const Tolerances& tol = {}) {
  FamilyCheckReport rep;
  const int n_max = sigmas.n_max();
  const int m_lo = fam.m_min(), m_hi = fam.m_max();
  rep.max_rank_per_m.assign(static_cast<std::size_t>(m_hi - m_lo + 1), 0);

  for (int n = 0; n <= n_max; ++n) {
    Projector prev = fam.at(n, m_lo);
    for (int m = m_lo; m <= m_hi; ++m) {
      const Projector p = m == m_lo ? prev : fam.at(n, m);
      auto& mr = rep.max_rank_per_m[static_cast<std::size_t>(m - m_lo)];
      mr = std::max(mr, p.rank());
      if (m > m_lo) {
        const EigenSystem gap = hermitian_eig(p.matrix() - prev.matrix(), tol);
        const double lam_min = gap.eigenvalues.empty() ? 0.0 : gap.eigenvalues.back();
        if (lam_min < -kFamilySlack && rep.monotone_ok) {
          rep.monotone_ok = false;
          rep.monotone_fail_n = n;
          rep.monotone_fail_m = m;
        }
        rep.worst_monotone_defect = std::min(rep.worst_monotone_defect, lam_min);
        prev = p;
      }
    }

    const double tr_sigma = sigmas.term(n).trace();
    if (tr_sigma > tol.zero_trace_tol) {
      const Projector top = fam.at(n, m_hi);
      const double covered =
          trace_of_product_real(top.matrix(), sigmas.term(n).matrix()) / tr_sigma;
      rep.worst_coverage_ratio = std::min(rep.worst_coverage_ratio, covered);
      if (covered < 1.0 - tol.cover_tol) rep.coverage_ok = false;
    }
  }

  for (int m = m_lo; m <= m_hi; ++m) {
    const double dist =
        operator_norm(fam.at(n_max, m).matrix() - fam.at(0, m).matrix(), tol);
    rep.worst_final_distance = std::max(rep.worst_final_distance, dist);
    if (dist > tol.family_conv_tol) rep.limit_distance_ok = false;
  }
  return rep;
}

// Adds the strong-family requirements: commutation with sigma_n, full rank of
// the compressions, and a non-stalling distance trend toward the limit
// projectors over a geometric subsample of n.
inline FamilyCheckReport check_strongly_consistent(const ProjectorFamily& fam,
                                                   const OperatorSequence& sigmas,
                                                   const Tolerances& tol = {}) {
  FamilyCheckReport rep = check_consistent(fam, sigmas, tol);
  rep.strong_checked = true;
  const int n_max = sigmas.n_max();

  for (int n = 0; n <= n_max; ++n) {
    for (int m = fam.m_min(); m <= fam.m_max(); ++m) {
      const Projector p = fam.at(n, m);
      const double comm =
          operator_norm(commutator(p.matrix(), sigmas.term(n).matrix()), tol);
      rep.worst_commutator = std::max(rep.worst_commutator, comm);
      if (comm > kFamilySlack) rep.commutation_ok = false;

      const PsdOperator squeezed = compress(sigmas.term(n), p, tol);
      const int r = numerical_rank(ordered_eig(squeezed, tol), tol);
      if (r != p.rank() && rep.rank_condition_ok) {
        rep.rank_condition_ok = false;
        rep.rank_fail_n = n;
        rep.rank_fail_m = m;
      }
    }
  }

  const std::vector<int> ns = detail::geometric_subsample(n_max);
  for (int m = fam.m_min(); m <= fam.m_max() && rep.distance_trend_ok; ++m) {
    std::vector<double> dist;
    dist.reserve(ns.size());
    const ComplexMatrix limit = fam.at(0, m).matrix();
    for (int n : ns) dist.push_back(operator_norm(fam.at(n, m).matrix() - limit, tol));
    if (dist.size() > 2) {
      const std::size_t half = dist.size() / 2;
      double first = 0.0, second = 0.0;
      for (std::size_t i = 0; i < half; ++i) first += dist[i];
      for (std::size_t i = half; i < dist.size(); ++i) second += dist[i];
      if (second / static_cast<double>(dist.size() - half) >
          first / static_cast<double>(half) + kFamilySlack)
        rep.distance_trend_ok = false;
    }
  }
  return rep;
}

// sup_n Tr (I - P(n, m)) sigma_n.
inline double tail_mass(const OperatorSequence& sigmas, const ProjectorFamily& fam, int m,
                        const Tolerances& tol = {}) {
  double sup = 0.0;
  for (int n = 0; n <= sigmas.n_max(); ++n) {
    const Projector p = fam.at(n, m);
    const double tail =
        sigmas.term(n).trace() - trace_of_product_real(p.matrix(), sigmas.term(n).matrix());
    sup = std::max(sup, tail);
  }
  (void)tol;
  return sup;
}

// Uniform deviation profile of a table a[k][n] against its target limits[n]:
// profile[k] = sup_n |limits[n] - a[k][n]|.  Monotone pointwise convergence
// of the rows drives the profile to zero.
inline std::vector<double> dini_tail_sup(const std::vector<std::vector<double>>& table,
                                         const std::vector<double>& limits) {
  std::vector<double> profile(table.size(), 0.0);
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (table[k].size() != limits.size())
      throw DimensionMismatch("dini_tail_sup: row length does not match limits");
    for (std::size_t n = 0; n < limits.size(); ++n)
      profile[k] = std::max(profile[k], std::abs(limits[n] - table[k][n]));
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Convergence criterion profile
// ---------------------------------------------------------------------------

struct CriterionRow {
  int m = 0;
  ExtReal sup_d;       // sup over n >= n0 of D(tail rho || tail sigma)
  int argmax_n = 0;    // first n attaining the sup
  bool at_boundary = false;  // sup attained at n_max: treat with suspicion
};

struct CriterionProfile {
  int n0 = 0;
  int m_min = 0;
  std::vector<CriterionRow> rows;
  std::vector<std::vector<ExtReal>> table;  // [m - m_min][n]
  std::vector<ExtReal> seq_d;               // D(rho_n || sigma_n) per n
  int first_finite_n = -1;                  // smallest n with finite D, -1 if none

  const CriterionRow& row(int m) const {
    for (const auto& r : rows)
      if (r.m == m) return r;
    throw Error("CriterionProfile: no row for requested m");
  }

  // Smallest (m, n_start) in lexicographic order with
  // sup_{n in [n_start, n_max]} D < eps.
  std::optional<std::pair<int, int>> witness(double eps) const {
    for (std::size_t k = 0; k < table.size(); ++k) {
      const auto& row_vals = table[k];
      ExtReal suffix = ExtReal::finite(0.0);
      std::vector<ExtReal> sufmax(row_vals.size());
      for (int n = static_cast<int>(row_vals.size()) - 1; n >= 0; --n) {
        suffix = n + 1 < static_cast<int>(row_vals.size()) ? max(row_vals[n], sufmax[n + 1])
                                                           : row_vals[n];
        sufmax[n] = suffix;
      }
      for (std::size_t n = 0; n < sufmax.size(); ++n)
        if (sufmax[n] < ExtReal::finite(eps))
          return std::make_pair(static_cast<int>(k) + m_min, static_cast<int>(n));
    }
    return std::nullopt;
  }

  void write_csv(std::ostream& os) const {
    os << "m,sup_D,argmax_n,boundary_flag\n";
    for (const auto& r : rows)
      os << r.m << ',' << format_ext(r.sup_d) << ',' << r.argmax_n << ','
         << (r.at_boundary ? 1 : 0) << '\n';
  }
};

// Largest increase between consecutive profile rows; a correct profile is
// non-increasing in m, so anything above numerical slack signals trouble.
// An infinite sup after a finite one counts as an infinite regression.
inline double profile_increase_defect(const CriterionProfile& prof) {
  double worst = 0.0;
  for (std::size_t k = 1; k < prof.rows.size(); ++k) {
    const ExtReal& prev = prof.rows[k - 1].sup_d;
    const ExtReal& next = prof.rows[k].sup_d;
    if (next.is_infinite()) {
      if (prev.is_finite()) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (prev.is_infinite()) continue;
    worst = std::max(worst, next.value() - prev.value());
  }
  return worst;
}

// Evaluates D((I-P) rho_n (I-P) || (I-P) sigma_n (I-P)) on the full (m, n)
// grid of the family and aggregates the sup over n >= n0 per m.
inline CriterionProfile criterion_profile(const OperatorSequence& rhos,
                                          const OperatorSequence& sigmas,
                                          const ProjectorFamily& fam, int n0 = 0,
                                          const Tolerances& tol = {}) {
  if (rhos.dim() != sigmas.dim() || rhos.n_max() != sigmas.n_max())
    throw DimensionMismatch("criterion_profile: sequences not aligned");
  if (n0 < 0 || n0 > rhos.n_max()) throw DimensionMismatch("criterion_profile: n0 out of range");

  CriterionProfile out;
  out.n0 = n0;
  out.m_min = fam.m_min();
  const int n_max = rhos.n_max();

  out.seq_d.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    out.seq_d.push_back(relative_entropy(rhos.term(n), sigmas.term(n), tol));
    if (out.first_finite_n < 0 && out.seq_d.back().is_finite()) out.first_finite_n = n;
  }

  for (int m = fam.m_min(); m <= fam.m_max(); ++m) {
    std::vector<ExtReal> row_vals;
    row_vals.reserve(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
      const Projector pc = fam.at(n, m).complement();
      const PsdOperator tr = compress(rhos.term(n), pc, tol);
      const PsdOperator ts = compress(sigmas.term(n), pc, tol);
      row_vals.push_back(relative_entropy(tr, ts, tol));
    }

    CriterionRow row;
    row.m = m;
    row.sup_d = row_vals[static_cast<std::size_t>(n0)];
    row.argmax_n = n0;
    for (int n = n0 + 1; n <= n_max; ++n) {
      if (row_vals[static_cast<std::size_t>(n)] > row.sup_d) {
        row.sup_d = row_vals[static_cast<std::size_t>(n)];
        row.argmax_n = n;
      }
    }
    row.at_boundary = row.argmax_n == n_max;
    out.rows.push_back(row);
    out.table.push_back(std::move(row_vals));
  }
  return out;
}

// Single-operator variant: the family is constant in n, built from the
// spectral projectors of one sigma.
struct SingleSigmaCriterion {
  std::optional<std::pair<int, int>> witness;  // (m, n_start) if found
  CriterionProfile profile;
};

inline SingleSigmaCriterion single_sigma_criterion(const OperatorSequence& rhos,
                                                   const PsdOperator& sigma, double eps,
                                                   const Tolerances& tol = {}) {
  if (sigma.is_zero(tol)) throw ZeroSigma("single_sigma_criterion: sigma is numerically zero");
  if (sigma.dim() != rhos.dim())
    throw DimensionMismatch("single_sigma_criterion: dimensions differ");

  auto eig = std::make_shared<EigenSystem>(ordered_eig(sigma, tol));
  const int d = sigma.dim();
  ProjectorFamily fam(d, 0, d, [eig, tol](int, int m) {
    return projector_from_top_eigenvectors(*eig, m, tol);
  });

  std::vector<PsdOperator> copies(static_cast<std::size_t>(rhos.n_max()) + 1, sigma);
  const OperatorSequence sigmas(std::move(copies));

  SingleSigmaCriterion out{std::nullopt, criterion_profile(rhos, sigmas, fam, 0, tol)};
  out.witness = out.profile.witness(eps);
  return out;
}

// Largest spectral-gap-aligned rank of sigma0 that does not exceed m: the
// cut must not split a degenerate cluster.  The admissible cuts are the ends
// of the eigenvalue clusters of the positive spectrum (the full rank always
// qualifies).
inline int gap_aligned_rank(const PsdOperator& sigma0, int m, const Tolerances& tol = {}) {
  const EigenSystem es = ordered_eig(sigma0, tol);
  const int r = numerical_rank(es, tol);
  if (r == 0) throw ZeroSigma("gap_aligned_rank: sigma0 is numerically zero");

  const std::vector<int> cuts = detail::positive_cluster_ends(es, r, tol);
  const int m0 = cuts.front();
  if (m < m0) throw MTooSmall("gap_aligned_rank: m is below the top multiplicity");
  int best = m0;
  for (int c : cuts)
    if (c <= m) best = c;
  return best;
}

}  // namespace qrelent

#endif  // QRELENT_SEQUENCES_HPP
