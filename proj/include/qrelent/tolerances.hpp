#ifndef QRELENT_TOLERANCES_HPP
#define QRELENT_TOLERANCES_HPP

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "qrelent/errors.hpp"

namespace qrelent {

// Every numerical threshold used by the library lives here so that a run can
// be reproduced from a single record.  Members named *_tol or *_slack are
// absolute unless the using code says otherwise (several are documented as
// relative to a scale, e.g. recon_tol is multiplied by the trace norm).
struct Tolerances {
  double hermitian_tol = 1e-10;   // max|M - M^+| <= hermitian_tol * (1 + max|entry|)
  double psd_slack = 1e-10;       // eigenvalues >= -psd_slack still count as psd
  double ortho_tol = 1e-10;       // orthonormality defect of eigenvector columns
  double recon_tol = 1e-9;        // reconstruction residual, relative to trace norm
  double idem_tol = 1e-10;        // projector idempotency defect
  double rank_rel_tol = 1e-12;    // lambda > rank_rel_tol * lambda_max counts toward rank
  double degeneracy_tol = 1e-8;   // eigenvalue gap below degeneracy_tol * lambda_max merges a cluster
  double containment_tol = 1e-9;  // support leak allowance, relative to max(trace, containment_floor)
  double containment_floor = 1e-12;
  double tie_break_tol = 1e-10;   // smallest usable projection of a reference basis vector
  double off_diag_factor = 1e-13; // Jacobi stop: off-diagonal Frobenius <= factor * ||A||_F
  int max_sweeps = 100;           // Jacobi sweep cap before NoConvergence
  double ext_slack = 1e-9;        // generic slack for extended-value comparisons
  double zero_trace_tol = 1e-13;  // psd operator with trace below this is treated as zero
  double cover_tol = 1e-8;        // family support coverage: Tr(P sigma) >= (1 - cover_tol) Tr(sigma)
  double family_conv_tol = 1e-6;  // final projector distance accepted as "converged"

  void set_by_name(std::string_view name, double value);
};

namespace detail {

struct TolEntry {
  std::string_view name;
  double Tolerances::*field;
};

inline constexpr std::array<TolEntry, 15> kTolEntries{{
    {"hermitian_tol", &Tolerances::hermitian_tol},
    {"psd_slack", &Tolerances::psd_slack},
    {"ortho_tol", &Tolerances::ortho_tol},
    {"recon_tol", &Tolerances::recon_tol},
    {"idem_tol", &Tolerances::idem_tol},
    {"rank_rel_tol", &Tolerances::rank_rel_tol},
    {"degeneracy_tol", &Tolerances::degeneracy_tol},
    {"containment_tol", &Tolerances::containment_tol},
    {"containment_floor", &Tolerances::containment_floor},
    {"tie_break_tol", &Tolerances::tie_break_tol},
    {"off_diag_factor", &Tolerances::off_diag_factor},
    {"ext_slack", &Tolerances::ext_slack},
    {"zero_trace_tol", &Tolerances::zero_trace_tol},
    {"cover_tol", &Tolerances::cover_tol},
    {"family_conv_tol", &Tolerances::family_conv_tol},
}};

}  // namespace detail

inline void Tolerances::set_by_name(std::string_view name, double value) {
  if (name == "max_sweeps") {
    if (value < 1) throw ConfigInvalid("max_sweeps must be >= 1");
    max_sweeps = static_cast<int>(value);
    return;
  }
  for (const auto& e : detail::kTolEntries) {
    if (e.name == name) {
      if (!(value >= 0)) throw ConfigInvalid("tolerance '" + std::string(name) + "' must be >= 0");
      this->*(e.field) = value;
      return;
    }
  }
  throw ConfigInvalid("unknown tolerance name '" + std::string(name) + "'");
}

}  // namespace qrelent

#endif  // QRELENT_TOLERANCES_HPP
