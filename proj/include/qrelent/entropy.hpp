#ifndef QRELENT_ENTROPY_HPP
#define QRELENT_ENTROPY_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qrelent/ext_real.hpp"
#include "qrelent/operators.hpp"

namespace qrelent {

// eta(x) = -x ln x, continuously extended by eta(0) = 0.
inline double eta(double x) {
  if (x < 0.0) throw NegativeInput("eta: negative argument");
  if (x == 0.0) return 0.0;
  return -x * std::log(x);
}

// eta over a clipped eigenvalue: negative dust counts as zero.
inline double eta_clipped(double x) { return eta(std::max(x, 0.0)); }

// Extension of the binary entropy to unnormalized pairs:
// H(a, b) = eta(a) + eta(b) - eta(a + b).
inline double binary_entropy_ext(double a, double b) {
  if (a < 0.0 || b < 0.0) throw NegativeInput("binary_entropy_ext: negative argument");
  if (a == 0.0 && b == 0.0) throw BothZero("binary_entropy_ext: both arguments zero");
  return eta(a) + eta(b) - eta(a + b);
}

inline double binary_entropy(double p) {  // classic h2 on [0, 1]
  if (p < 0.0 || p > 1.0) throw NegativeInput("binary_entropy: argument outside [0, 1]");
  return eta(p) + eta(1.0 - p);
}

// x ln(x/y) + y - x with the usual closures: 0 -> y, division by zero -> inf.
inline ExtReal scalar_relative_entropy(double x, double y) {
  if (x < 0.0 || y < 0.0) throw NegativeInput("scalar_relative_entropy: negative argument");
  if (x == 0.0) return ExtReal::finite(y);
  if (y == 0.0) return ExtReal::infinity();
  return ExtReal::finite(x * std::log(x / y) + y - x);
}

// Von Neumann entropy extended to the positive cone:
// S(rho) = sum eta(lambda_i) - eta(Tr rho); S(0) = 0.
inline ExtReal von_neumann_entropy_ext(const PsdOperator& rho, const Tolerances& tol = {}) {
  if (rho.is_zero(tol)) return ExtReal::finite(0.0);
  const EigenSystem es = ordered_eig(rho, tol);
  double s = 0.0;
  for (double lam : es.eigenvalues) s += eta_clipped(lam);
  return ExtReal::finite(s - eta(rho.trace()));
}

// Relative entropy on the positive cone:
//   D(rho||sigma) = Tr rho (-log sigma) - S(rho) - eta(Tr rho) + Tr sigma - Tr rho,
// with D(0||sigma) = Tr sigma and D = +inf when supp(rho) escapes supp(sigma).
inline ExtReal relative_entropy(const PsdOperator& rho, const PsdOperator& sigma,
                                const Tolerances& tol = {}) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("relative_entropy: dimensions differ");
  if (rho.is_zero(tol)) return ExtReal::finite(std::max(sigma.trace(), 0.0));
  if (!support_contained(rho, sigma, tol)) return ExtReal::infinity();

  const ComplexMatrix log_sigma = log_on_support(sigma, tol);
  const double cross = -trace_of_product_real(rho.matrix(), log_sigma);

  const EigenSystem er = ordered_eig(rho, tol);
  double s_raw = 0.0;  // sum eta(lambda_i) = S(rho) + eta(Tr rho)
  for (double lam : er.eigenvalues) s_raw += eta_clipped(lam);

  return ExtReal::finite(cross - s_raw + sigma.trace() - rho.trace());
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

inline constexpr double kIdentitySlack = 1e-9;

struct IdentityCheck {
  std::string name;
  bool applicable = true;  // orthogonality-conditioned identities may not be
  bool vacuous = false;    // +inf vs +inf, or an +inf upper bound
  bool holds = true;
  double residual = 0.0;  // signed: equality |lhs-rhs|, inequality lhs-rhs
  double scale = 1.0;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;

  bool all_hold() const {
    for (const auto& c : checks)
      if (c.applicable && !c.holds) return false;
    return true;
  }

  const IdentityCheck& find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw Error("IdentityReport: no check named '" + name + "'");
  }
};

namespace detail {

inline double finite_scale(std::initializer_list<ExtReal> vals) {
  double m = 0.0;
  for (const ExtReal& v : vals)
    if (v.is_finite()) m = std::max(m, std::abs(v.value()));
  return 1.0 + m;
}

inline IdentityCheck check_equal(std::string name, ExtReal lhs, ExtReal rhs) {
  IdentityCheck c;
  c.name = std::move(name);
  c.scale = finite_scale({lhs, rhs});
  if (lhs.is_infinite() && rhs.is_infinite()) {
    c.vacuous = true;
    return c;
  }
  if (lhs.is_infinite() != rhs.is_infinite()) {
    c.holds = false;
    c.residual = std::numeric_limits<double>::infinity();
    return c;
  }
  c.residual = std::abs(lhs.value() - rhs.value());
  c.holds = c.residual <= kIdentitySlack * c.scale;
  return c;
}

inline IdentityCheck check_le(std::string name, ExtReal lhs, ExtReal rhs) {
  IdentityCheck c;
  c.name = std::move(name);
  c.scale = finite_scale({lhs, rhs});
  if (rhs.is_infinite()) {
    c.vacuous = true;
    return c;
  }
  if (lhs.is_infinite()) {
    c.holds = false;
    c.residual = std::numeric_limits<double>::infinity();
    return c;
  }
  c.residual = lhs.value() - rhs.value();
  c.holds = c.residual <= kIdentitySlack * c.scale;
  return c;
}

}  // namespace detail

// Evaluates the algebraic laws of the extended relative entropy on a concrete
// tuple.  The orthogonal-additivity equality is only applicable when the four
// cross products rho*sigma, rho*theta, sigma*omega, omega*theta vanish.
inline IdentityReport check_identities(const PsdOperator& rho, const PsdOperator& sigma,
                                       const PsdOperator& omega, const PsdOperator& theta,
                                       double c, const Tolerances& tol = {}) {
  if (c <= 0.0) throw NegativeInput("check_identities: c must be > 0");
  const int d = rho.dim();
  if (sigma.dim() != d || omega.dim() != d || theta.dim() != d)
    throw DimensionMismatch("check_identities: dimensions differ");

  IdentityReport rep;
  const ExtReal d_rs = relative_entropy(rho, sigma, tol);
  const ExtReal d_ro = relative_entropy(rho, omega, tol);
  const ExtReal d_so = relative_entropy(sigma, omega, tol);
  const ExtReal d_st = relative_entropy(sigma, theta, tol);
  const double tr_r = rho.trace(), tr_s = sigma.trace(), tr_o = omega.trace();

  {  // D(c rho || c sigma) = c D(rho || sigma)
    const PsdOperator cr(c * rho.matrix()), cs(c * sigma.matrix());
    rep.checks.push_back(
        detail::check_equal("scale-both", relative_entropy(cr, cs, tol), c * d_rs));
  }
  {  // D(rho || c sigma) = D(rho||sigma) - Tr rho ln c + (c-1) Tr sigma
    const PsdOperator cs(c * sigma.matrix());
    const ExtReal lhs = relative_entropy(rho, cs, tol);
    const ExtReal rhs = d_rs + (-tr_r * std::log(c) + (c - 1.0) * tr_s);
    rep.checks.push_back(detail::check_equal("scale-second", lhs, rhs));
  }
  {  // D(rho || sigma + omega) <= D(rho||sigma) + Tr omega
    const PsdOperator so(sigma.matrix() + omega.matrix());
    rep.checks.push_back(
        detail::check_le("enlarge-second", relative_entropy(rho, so, tol), d_rs + tr_o));
  }
  const PsdOperator rs_sum(rho.matrix() + sigma.matrix());
  const ExtReal d_sum_o = relative_entropy(rs_sum, omega, tol);
  {  // D(rho||omega) + D(sigma||omega) - Tr omega <= D(rho+sigma||omega)
    rep.checks.push_back(
        detail::check_le("first-superadditive", d_ro + d_so + (-tr_o), d_sum_o));
  }
  {  // D(rho+sigma||omega) <= D(rho||omega) + D(sigma||omega) + H(Tr rho, Tr sigma) - Tr omega
    const double h = (tr_r == 0.0 && tr_s == 0.0) ? 0.0 : binary_entropy_ext(tr_r, tr_s);
    rep.checks.push_back(
        detail::check_le("first-subadditive", d_sum_o, d_ro + d_so + (h - tr_o)));
  }
  const PsdOperator ot_sum(omega.matrix() + theta.matrix());
  const ExtReal d_sums = relative_entropy(rs_sum, ot_sum, tol);
  {  // D(rho+sigma || omega+theta) <= D(rho||omega) + D(sigma||theta)
    rep.checks.push_back(detail::check_le("joint-subadditive", d_sums, d_ro + d_st));
  }
  {  // equality under orthogonality
    const double orth = std::max(
        std::max((rho.matrix() * sigma.matrix()).max_abs(), (rho.matrix() * theta.matrix()).max_abs()),
        std::max((sigma.matrix() * omega.matrix()).max_abs(), (omega.matrix() * theta.matrix()).max_abs()));
    IdentityCheck c2 = detail::check_equal("orthogonal-additive", d_sums, d_ro + d_st);
    c2.applicable = orth <= 1e-12;
    rep.checks.push_back(c2);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Two-block pinching bounds
// ---------------------------------------------------------------------------

struct PinchingReport {
  IdentityCheck upper;  // D(rho||sigma) <= D(P.P||P.P) + D(Pc.Pc||Pc.Pc) + ln2 Tr rho
  IdentityCheck lower;  // block sum <= D(rho||sigma)
  bool ok() const { return upper.holds && lower.holds; }
};

// Requires P sigma = sigma P (operator norm of the commutator <= 1e-9).
inline PinchingReport pinching_bound_check(const PsdOperator& rho, const PsdOperator& sigma,
                                           const Projector& p, const Tolerances& tol = {}) {
  if (rho.dim() != sigma.dim() || rho.dim() != p.dim())
    throw DimensionMismatch("pinching_bound_check: dimensions differ");
  if (operator_norm(commutator(p.matrix(), sigma.matrix()), tol) > 1e-9)
    throw NonCommuting("pinching_bound_check: P does not commute with sigma");

  const Projector pc = p.complement();
  const ExtReal d_full = relative_entropy(rho, sigma, tol);
  const ExtReal d_in = relative_entropy(compress(rho, p, tol), compress(sigma, p, tol), tol);
  const ExtReal d_out = relative_entropy(compress(rho, pc, tol), compress(sigma, pc, tol), tol);

  PinchingReport rep;
  rep.upper = detail::check_le("pinching-upper", d_full,
                               d_in + d_out + rho.trace() * std::numbers::ln2);
  rep.lower = detail::check_le("pinching-lower", d_in + d_out, d_full);
  return rep;
}

}  // namespace qrelent

#endif  // QRELENT_ENTROPY_HPP
