// Acceptance harness: each criterion prints exactly one PASS/FAIL line with
// its measured extremes and runtime; the process exits nonzero if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qrelent/scenarios.hpp"

using namespace qrelent;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

// --- 1: the divergence-gap counterexample against its closed form ----------

Outcome criterion_1() {
  const GibbsModel model = GibbsModel::truncated_oscillator(1.0, 64);
  const CounterexampleScenario sc = gen_counterexample(model, 2, 48);
  double worst_residual = 0.0, worst_gap_err = 0.0;
  for (const auto& row : sc.report.rows) {
    worst_residual = std::max(worst_residual, std::abs(row.residual));
    const double en = model.energies[static_cast<std::size_t>(row.n)];
    const double expected_gap =
        model.beta * (1.0 - model.energies.front() / en) - binary_entropy(1.0 / en);
    worst_gap_err = std::max(worst_gap_err, std::abs(row.gap - expected_gap));
  }
  Outcome out;
  out.pass = worst_residual <= 1e-8 && worst_gap_err <= 1e-8;
  out.detail = "worst closed-form residual " + sci(worst_residual) + ", worst gap error " +
               sci(worst_gap_err) + ", final gap " + sci(sc.report.rows.back().gap);
  return out;
}

// --- 2: identity suite on seeded tuples ------------------------------------

Outcome criterion_2() {
  Rng rng(20260825);
  int violations = 0, checked = 0;
  double worst = -1.0;
  for (int i = 0; i < 200; ++i) {
    const IdentityInstance inst = gen_identity_instance(rng, 6);
    const IdentityReport rep = check_identities(inst.rho, inst.sigma, inst.omega, inst.theta,
                                                inst.c);
    for (const auto& chk : rep.checks) {
      if (!chk.applicable || chk.vacuous) continue;
      ++checked;
      worst = std::max(worst, chk.residual);
      if (chk.residual > 1e-9) ++violations;
    }
  }
  Outcome out;
  out.pass = violations == 0;
  out.detail = std::to_string(checked) + " checks over 200 instances, " +
               std::to_string(violations) + " violations, worst residual " + sci(worst);
  return out;
}

// --- 3: monotonicity under completely positive maps ------------------------

Outcome criterion_3() {
  Rng rng(3);
  int violations = 0;
  double worst_slack = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const PsdOperator rho = random_psd(5, rng);
    const PsdOperator sigma = random_psd(5, rng);
    const KrausMap phi = i % 2 == 0 ? random_channel(5, 5, 3, rng)
                                    : random_operation(5, 4, 3, rng);
    const ExtReal before = relative_entropy(rho, sigma);
    if (!before.is_finite()) {
      ++violations;  // full-rank inputs must give finite divergence
      continue;
    }
    const ExtReal after = relative_entropy(phi.apply(rho), phi.apply(sigma));
    if (!after.is_finite()) {
      ++violations;
      continue;
    }
    const double slack = after.value() - before.value();
    worst_slack = std::max(worst_slack, slack);
    if (slack > 1e-9) ++violations;
  }
  Outcome out;
  out.pass = violations == 0;
  out.detail = "1000 map/pair triples, " + std::to_string(violations) +
               " violations, worst image-minus-input " + sci(worst_slack);
  return out;
}

// --- 4: agreement with the classical diagonal formulas ---------------------

Outcome criterion_4() {
  Rng rng(4);
  const int d = 12, n_max = 6;
  double worst_value = 0.0, worst_profile = 0.0;
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    // spacing ratio stays below 0.55, so +-7% jitter can never reorder entries
    const std::vector<double> q = decaying_spectrum(d, rng, 0.8, 0.2);
    std::vector<double> p(d);
    for (int k = 0; k < d; ++k) p[static_cast<std::size_t>(k)] = rng.uniform(0.1, 2.0);
    std::vector<double> jp(d), jq(d);
    for (int k = 0; k < d; ++k) {
      jp[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0);
      jq[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0);
    }

    std::vector<std::vector<double>> pn(n_max + 1), qn(n_max + 1);
    std::vector<PsdOperator> rhos, sigmas;
    for (int n = 0; n <= n_max; ++n) {
      const double w = n == 0 ? 0.0 : 0.1 * std::pow(0.7, n);
      pn[static_cast<std::size_t>(n)].resize(d);
      qn[static_cast<std::size_t>(n)].resize(d);
      ComplexMatrix rm(d, d), sm(d, d);
      for (int k = 0; k < d; ++k) {
        const double pv = p[static_cast<std::size_t>(k)] * (1.0 + w * jp[static_cast<std::size_t>(k)]);
        const double qv = q[static_cast<std::size_t>(k)] * (1.0 + w * jq[static_cast<std::size_t>(k)]);
        pn[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] = pv;
        qn[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] = qv;
        rm(k, k) = pv;
        sm(k, k) = qv;
      }
      rhos.emplace_back(rm);
      sigmas.emplace_back(sm);
    }

    // full divergence against the scalar sum on the unperturbed pair
    ExtReal scalar_sum = ExtReal::finite(0.0);
    for (int k = 0; k < d; ++k)
      scalar_sum = scalar_sum + scalar_relative_entropy(p[static_cast<std::size_t>(k)],
                                                        q[static_cast<std::size_t>(k)]);
    const ExtReal full = relative_entropy(rhos[0], sigmas[0]);
    if (!full.is_finite() || !scalar_sum.is_finite()) {
      ok = false;
      continue;
    }
    worst_value = std::max(worst_value, std::abs(full.value() - scalar_sum.value()));

    const OperatorSequence rho_seq(std::move(rhos)), sigma_seq(std::move(sigmas));
    const ProjectorFamily fam = build_strongly_consistent(sigma_seq);
    const CriterionProfile prof = criterion_profile(rho_seq, sigma_seq, fam);
    for (int m = 0; m <= d; ++m) {
      double classical = 0.0;
      for (int n = 0; n <= n_max; ++n) {
        double tail = 0.0;
        for (int k = m; k < d; ++k)
          tail += scalar_relative_entropy(pn[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)],
                                          qn[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)])
                      .value();
        classical = n == 0 ? tail : std::max(classical, tail);
      }
      const ExtReal sup = prof.row(m).sup_d;
      if (!sup.is_finite()) {
        ok = false;
        continue;
      }
      worst_profile = std::max(worst_profile, std::abs(sup.value() - classical));
    }
  }
  Outcome out;
  out.pass = ok && worst_value <= 1e-12 && worst_profile <= 1e-9;
  out.detail = "100 diagonal pairs: worst divergence deviation " + sci(worst_value) +
               ", worst tail-sup deviation " + sci(worst_profile);
  return out;
}

// --- 5: tail criterion profiles on dominated scenarios ---------------------

Outcome criterion_5() {
  const int d = 16, n_max = 64;
  bool ok = true;
  double worst_increase = 0.0, worst_level_m = 0.0, worst_full_cut = 0.0, worst_gap = 0.0;
  int latest_witness_m = 0;
  std::ostringstream gate;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DominatedScenario sc = gen_dominated(seed, d, n_max);
    const ProjectorFamily fam = build_strongly_consistent(sc.sigmas);
    const FamilyCheckReport fc = check_strongly_consistent(fam, sc.sigmas);
    if (!fc.strongly_consistent()) {
      ok = false;
      continue;
    }
    const CriterionProfile prof = criterion_profile(sc.rhos, sc.sigmas, fam);
    worst_increase = std::max(worst_increase, profile_increase_defect(prof));

    int m_star = -1;
    for (const auto& row : prof.rows)
      if (row.m < d && row.sup_d.is_finite() && row.sup_d.value() < 1e-3) {
        m_star = row.m;
        break;
      }
    if (m_star < 0) {
      ok = false;
      continue;
    }
    latest_witness_m = std::max(latest_witness_m, m_star);
    worst_level_m = std::max(worst_level_m, prof.row(m_star).sup_d.value());

    const ExtReal& full_cut = prof.row(d).sup_d;
    if (!full_cut.is_finite()) {
      ok = false;
      continue;
    }
    worst_full_cut = std::max(worst_full_cut, std::abs(full_cut.value()));

    // report-only gate: profile level reached vs the observed gap at n_max
    const double gap = std::abs(prof.seq_d.back().value() - prof.seq_d.front().value());
    worst_gap = std::max(worst_gap, gap);
  }
  gate << "gate(report-only): profile reaches " << sci(worst_level_m) << " by m<="
       << latest_witness_m << " < dim, observed D-gap at n_max <= " << sci(worst_gap);
  Outcome out;
  out.pass = ok && worst_increase <= 1e-9 && worst_full_cut <= 1e-12;
  out.detail = "10 seeds: worst profile increase " + sci(worst_increase) + ", full-cut sup " +
               sci(worst_full_cut) + "; " + gate.str();
  return out;
}

// --- 6: gap preservation under seeded channels and operations ---------------

Outcome criterion_6() {
  const int d = 16, n_max = 64;
  bool ok = true;
  double worst_input_gap = 0.0, worst_image_gap = 0.0, worst_monotone = -1.0;
  ExperimentOptions opt;
  opt.with_profiles = false;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DominatedScenario sc = gen_dominated(seed, d, n_max);
    Rng mrng(seed * 7919);
    for (int j = 0; j < 20; ++j) {
      const bool is_channel = j < 10;
      const KrausMap phi = is_channel ? random_channel(d, d, 4, mrng)
                                      : random_operation(d, 12, 3, mrng);
      const ExperimentReport rep = cp_preservation_experiment(sc.rhos, sc.sigmas, phi, opt);
      if (!rep.gap_in.back().is_finite() || rep.gap_in.back().value() > 1e-8) {
        ok = false;  // the scenario must supply the hypothesis
        continue;
      }
      worst_input_gap = std::max(worst_input_gap, rep.gap_in.back().value());
      if (!rep.hypothesis_met || !rep.claim_holds) ok = false;
      if (rep.gap_out.back().is_finite())
        worst_image_gap = std::max(worst_image_gap, rep.gap_out.back().value());
      else
        ok = false;
      if (!is_channel) {
        for (std::size_t n = 0; n < rep.d_in.size(); ++n) {
          if (rep.d_in[n].is_infinite()) continue;
          if (rep.d_out[n].is_infinite()) {
            ok = false;
            continue;
          }
          const double slack = rep.d_out[n].value() - rep.d_in[n].value();
          worst_monotone = std::max(worst_monotone, slack);
          if (slack > 1e-9) ok = false;
        }
      }
    }
  }
  Outcome out;
  out.pass = ok && worst_image_gap <= 1e-6;
  out.detail = "10 scenarios x (10 channels + 10 operations): worst input gap " +
               sci(worst_input_gap) + ", worst image gap " + sci(worst_image_gap) +
               ", worst operation slack " + sci(worst_monotone);
  return out;
}

// --- 7: polar partial isometries, alignment, and eigenvalue stability ------

Outcome criterion_7() {
  bool ok = true;
  double worst_polar = 0.0, worst_identity = 0.0, worst_mirsky = -1.0;

  Rng rng_a(71);
  const int d = 8;
  for (int i = 0; i < 100; ++i) {
    const int rank = rng_a.uniform_int(1, d - 1);
    const Projector q = random_projector(d, rank, rng_a);
    const ComplexMatrix h = random_hermitian(d, rng_a);
    double t = rng_a.uniform(0.05, 0.4);
    Projector p = q;
    for (int attempt = 0; attempt < 30; ++attempt) {
      const ComplexMatrix u = unitary_exp_i(h, t);
      p = Projector(u * q.matrix() * u.adjoint());
      if (operator_norm(p.matrix() - q.matrix()) < 0.9) break;
      t *= 0.5;
    }
    const PartialIsometry w = polar_partial_isometry(p, q);
    const ComplexMatrix wm = w.matrix();
    const double res = std::max(operator_norm(wm * wm.adjoint() - p.matrix()),
                                operator_norm(wm.adjoint() * wm - q.matrix()));
    worst_polar = std::max(worst_polar, res);
    if (res > 1e-10) ok = false;
  }

  Rng rng_b(72);
  const int ds = 6, n_max = 8;
  for (int i = 0; i < 100; ++i) {
    const ComplexMatrix u = random_unitary(ds, rng_b);
    const ComplexMatrix h = random_hermitian(ds, rng_b);
    const std::vector<double> spec = decaying_spectrum(ds, rng_b, 0.8, 0.2);
    std::vector<double> jit(ds);
    for (auto& x : jit) x = rng_b.uniform(-0.5, 0.5);

    std::vector<PsdOperator> terms;
    for (int n = 0; n <= n_max; ++n) {
      const double w = n == 0 ? 0.0 : std::pow(0.6, n);
      std::vector<double> s(ds);
      for (int k = 0; k < ds; ++k)
        s[static_cast<std::size_t>(k)] =
            spec[static_cast<std::size_t>(k)] * (1.0 + 0.3 * w * jit[static_cast<std::size_t>(k)]);
      ComplexMatrix diag(ds, ds);
      for (int k = 0; k < ds; ++k) diag(k, k) = s[static_cast<std::size_t>(k)];
      const ComplexMatrix rot = unitary_exp_i(h, 0.1 * w);
      terms.emplace_back(rot * u * diag * u.adjoint() * rot.adjoint());
    }
    const OperatorSequence seq(std::move(terms));
    const int probe_n = 1 + (i % n_max);
    const PartialIsometry w = support_alignment_isometry(seq, probe_n);
    const ComplexMatrix wm = w.matrix();

    const EigenSystem en = ordered_eig(seq.term(probe_n));
    const EigenSystem e0 = ordered_eig(seq.limit());
    double ell1 = 0.0;
    for (int k = 0; k < ds; ++k)
      ell1 += std::abs(en.eigenvalues[static_cast<std::size_t>(k)] -
                       e0.eigenvalues[static_cast<std::size_t>(k)]);
    const double lhs =
        trace_norm(wm.adjoint() * seq.term(probe_n).matrix() * wm - seq.limit().matrix());
    worst_identity = std::max(worst_identity, std::abs(lhs - ell1));
    if (std::abs(lhs - ell1) > 1e-9) ok = false;

    const double mirsky_slack =
        ell1 - trace_norm(seq.term(probe_n).matrix() - seq.limit().matrix());
    worst_mirsky = std::max(worst_mirsky, mirsky_slack);
    if (mirsky_slack > 1e-10) ok = false;
  }

  Outcome out;
  out.pass = ok;
  out.detail = "100 projector pairs: worst polar residual " + sci(worst_polar) +
               "; 100 sequences: worst alignment deviation " + sci(worst_identity) +
               ", worst eigenvalue-sum overshoot " + sci(worst_mirsky);
  return out;
}

// --- 8: additivity over orthogonal blocks and the summed gap ----------------

Outcome criterion_8() {
  const int d = 16, n_max = 64, blocks = 8;
  bool ok = true;
  double worst_additivity = 0.0, worst_component_gap = 0.0, worst_sum_gap = 0.0;
  for (std::uint64_t seed : {81u, 82u, 83u}) {
    const BlockScenario sc = gen_block_sums(seed, d, n_max, blocks);
    std::vector<ExtReal> d_sum;
    std::vector<std::vector<ExtReal>> d_blocks(blocks);
    for (int n = 0; n <= n_max; ++n) {
      const ExtReal whole = relative_entropy(sc.rho_sum.term(n), sc.sigma_sum.term(n));
      ExtReal parts = ExtReal::finite(0.0);
      for (int k = 0; k < blocks; ++k) {
        const ExtReal dk = relative_entropy(sc.rho_blocks[static_cast<std::size_t>(k)].term(n),
                                            sc.sigma_blocks[static_cast<std::size_t>(k)].term(n));
        d_blocks[static_cast<std::size_t>(k)].push_back(dk);
        parts = parts + dk;
      }
      d_sum.push_back(whole);
      if (!whole.is_finite() || !parts.is_finite()) {
        ok = false;
        continue;
      }
      const double res = std::abs(whole.value() - parts.value());
      worst_additivity = std::max(worst_additivity, res);
      if (res > 1e-9) ok = false;
    }
    bool premises = true;
    for (int k = 0; k < blocks; ++k) {
      const auto& dk = d_blocks[static_cast<std::size_t>(k)];
      const double gap = std::abs(dk.back().value() - dk.front().value());
      worst_component_gap = std::max(worst_component_gap, gap);
      if (gap > 1e-8) premises = false;
    }
    if (!premises) {
      ok = false;  // the generator is expected to satisfy the hypothesis
      continue;
    }
    const double sum_gap = std::abs(d_sum.back().value() - d_sum.front().value());
    worst_sum_gap = std::max(worst_sum_gap, sum_gap);
    if (sum_gap > 1e-6) ok = false;
  }
  Outcome out;
  out.pass = ok;
  out.detail = "3 seeds, 8 blocks: worst additivity residual " + sci(worst_additivity) +
               ", worst component gap " + sci(worst_component_gap) + ", worst summed gap " +
               sci(worst_sum_gap);
  return out;
}

// --- 9: dilation identities -------------------------------------------------

Outcome criterion_9() {
  Rng rng(91);
  bool ok = true;
  double worst_compress = 0.0, worst_stinespring = 0.0, worst_isometry = 0.0;

  for (int i = 0; i < 50; ++i) {
    const KrausMap phi = random_operation(4, 3, 3, rng);
    const DilatedChannel dil = dilate_operation_to_channel(phi);
    for (int probe = 0; probe < 3; ++probe) {
      const PsdOperator rho = random_state(4, rng);
      const PsdOperator big = dil.channel.apply(rho);
      const PsdOperator squeezed = compress(big, dil.b_projector);
      const ComplexMatrix small = phi.apply(rho).matrix();
      ComplexMatrix embedded(4, 4);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) embedded(a, b) = small(a, b);
      const double res = (squeezed.matrix() - embedded).max_abs();
      worst_compress = std::max(worst_compress, res);
      if (res > 1e-10) ok = false;
    }
  }

  for (int i = 0; i < 50; ++i) {
    const KrausMap phi = random_channel(4, 5, 3, rng);
    const StinespringDilation st = stinespring_isometry(phi);
    for (int probe = 0; probe < 3; ++probe) {
      const PsdOperator rho = random_state(4, rng);
      const ComplexMatrix lifted = st.isometry * rho.matrix() * st.isometry.adjoint();
      const PsdOperator reduced = partial_trace_env(PsdOperator(lifted), st.shape);
      const double res = trace_norm(reduced.matrix() - phi.apply(rho).matrix());
      worst_stinespring = std::max(worst_stinespring, res);
      if (res > 1e-10) ok = false;
    }
  }

  for (int i = 0; i < 100; ++i) {
    const int dc = 3 + i % 3;
    ComplexMatrix a = random_gaussian(dc, dc, rng);
    const double scale = rng.uniform(0.2, 0.95) / operator_norm(a);
    const ComplexMatrix v = scale * a;
    const ComplexMatrix vhat = contraction_dilation(v);
    const double res =
        operator_norm(vhat.adjoint() * vhat - ComplexMatrix::identity(dc));
    worst_isometry = std::max(worst_isometry, res);
    if (res > 1e-12) ok = false;
  }

  Outcome out;
  out.pass = ok;
  out.detail = "compression residual " + sci(worst_compress) + ", partial-trace residual " +
               sci(worst_stinespring) + ", dilation isometry residual " + sci(worst_isometry);
  return out;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    std::function<Outcome()> fn;
    double budget_s;  // 0 = no cap
  };
  const std::vector<Entry> entries{
      {1, "counterexample closed form", criterion_1, 5.0},
      {2, "divergence identity suite", criterion_2, 10.0},
      {3, "monotonicity under cp maps", criterion_3, 30.0},
      {4, "classical diagonal oracle", criterion_4, 0.0},
      {5, "tail criterion profiles", criterion_5, 0.0},
      {6, "gap preservation under maps", criterion_6, 60.0},
      {7, "polar and alignment isometries", criterion_7, 0.0},
      {8, "orthogonal block additivity", criterion_8, 0.0},
      {9, "dilation identities", criterion_9, 0.0},
  };

  bool all = true;
  for (const auto& e : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = std::string("exception: ") + ex.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = e.budget_s == 0.0 || secs <= e.budget_s;
    const bool pass = out.pass && in_budget;
    all = all && pass;
    char timing[64];
    if (in_budget)
      std::snprintf(timing, sizeof timing, "%.2fs", secs);
    else
      std::snprintf(timing, sizeof timing, "%.2fs, over the %.0fs budget", secs, e.budget_s);
    std::printf("[%s] criterion %d (%s): %s [%s]\n", pass ? "PASS" : "FAIL", e.id, e.title,
                out.detail.c_str(), timing);
  }
  std::printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILURES present");
  return all ? 0 : 1;
}
