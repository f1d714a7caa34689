#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qrelent/scenarios.hpp"

using namespace qrelent;

namespace {

ComplexMatrix diagm(std::initializer_list<double> xs) {
  ComplexMatrix m(static_cast<int>(xs.size()), static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) m(i, i) = x, ++i;
  return m;
}

OperatorSequence constant_sequence(const PsdOperator& a, int n_max) {
  std::vector<PsdOperator> terms(static_cast<std::size_t>(n_max) + 1, a);
  return OperatorSequence(std::move(terms));
}

// Kraus form of tracing out a dim_e environment from a b-major product index.
KrausMap trace_env_map(int dim_b, int dim_e) {
  std::vector<ComplexMatrix> ops;
  for (int e = 0; e < dim_e; ++e) {
    ComplexMatrix v(dim_b, dim_b * dim_e);
    for (int b = 0; b < dim_b; ++b) v(b, b * dim_e + e) = 1.0;
    ops.push_back(std::move(v));
  }
  return KrausMap(std::move(ops), MapKind::channel);
}

}  // namespace

TEST_CASE("gibbs model validates and matches the geometric partition sum") {
  const GibbsModel m = GibbsModel::truncated_oscillator(1.0, 64);
  CHECK(m.dim() == 64);
  const double closed = (1.0 - std::exp(-64.0)) / (1.0 - std::exp(-1.0));
  CHECK(std::abs(m.partition_sum() - closed) < 1e-12);

  const PsdOperator g = gibbs_state(m);
  CHECK(std::abs(g.trace() - 1.0) < 1e-12);
  CHECK(std::abs(g.matrix()(1, 1).real() / g.matrix()(0, 0).real() - std::exp(-1.0)) < 1e-12);

  const ComplexMatrix h = m.hamiltonian();
  CHECK(h(5, 5).real() == 5.0);
  CHECK(h(5, 4) == std::complex<double>(0.0, 0.0));

  CHECK_THROWS_AS(GibbsModel(0.0, {0.0, 1.0}), NegativeInput);
  CHECK_THROWS_AS(GibbsModel(1.0, {}), DimensionMismatch);
  CHECK_THROWS_AS(GibbsModel(1.0, {-0.5, 1.0}), NegativeInput);
  CHECK_THROWS_AS(GibbsModel(1.0, {2.0, 1.0}), ConfigInvalid);
}

TEST_CASE("gibbs corner cases: single level and deep cold limit") {
  const GibbsModel one(2.0, {3.0});
  const PsdOperator g1 = gibbs_state(one);
  CHECK(std::abs(g1.matrix()(0, 0).real() - 1.0) < 1e-15);

  const GibbsModel cold = GibbsModel::truncated_oscillator(50.0, 4);
  const PsdOperator gc = gibbs_state(cold);
  CHECK(std::abs(gc.matrix()(0, 0).real() - 1.0) < 1e-20);
  CHECK(gc.matrix()(1, 1).real() < 1e-20);
}

TEST_CASE("counterexample rows match the closed form and keep their gap") {
  const GibbsModel m = GibbsModel::truncated_oscillator(1.0, 64);
  const CounterexampleScenario sc = gen_counterexample(m, 2, 48);

  CHECK(sc.rhos.n_max() == 47);
  CHECK(std::abs(sc.report.limit_value - std::log(m.partition_sum())) < 1e-14);

  // On the oscillator ladder E0 = 0: the mean energy of every term is exactly
  // (1 - 1/n) * 0 + 1 and the trace distance to the limit is 2/n.
  for (const auto& row : sc.report.rows) {
    CHECK(std::abs(row.residual) < 1e-8);
    CHECK(std::abs(row.mean_energy - 1.0) < 1e-12);
    const double expected_gap = 1.0 - binary_entropy(1.0 / row.n);
    CHECK(std::abs(row.gap - expected_gap) < 1e-8);
    CHECK(row.gap > 0.18);  // never collapses toward the limit value
  }
  const double tn = trace_norm(sc.rhos.term(1).matrix() - sc.rhos.limit().matrix());
  CHECK(std::abs(tn - 2.0 / 2.0) < 1e-12);
  const double tn_last = trace_norm(sc.rhos.term(47).matrix() - sc.rhos.limit().matrix());
  CHECK(std::abs(tn_last - 2.0 / 48.0) < 1e-12);

  CHECK(std::abs(sc.report.final_gap_closed_form - (1.0 - binary_entropy(1.0 / 48.0))) < 1e-14);

  std::ostringstream csv;
  sc.report.write_csv(csv);
  CHECK(csv.str().rfind("n,D_computed,D_closed_form,residual,mean_energy,gap\n", 0) == 0);
}

TEST_CASE("counterexample rejects levels with energy at or below one") {
  const GibbsModel m = GibbsModel::truncated_oscillator(1.0, 16);
  CHECK_THROWS_AS(gen_counterexample(m, 1, 8), EnergyTooSmall);
  CHECK_THROWS_AS(gen_counterexample(m, 2, 16), DimensionMismatch);
  CHECK_THROWS_AS(gen_counterexample(m, 0, 4), DimensionMismatch);

  const GibbsModel flat(1.0, {0.0, 0.5, 0.9, 1.0, 5.0});
  CHECK_THROWS_AS(gen_counterexample(flat, 2, 4), EnergyTooSmall);
  CHECK_NOTHROW(gen_counterexample(flat, 4, 4));
}

TEST_CASE("dominated scenarios certify c rho <= sigma and settle on their limit") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const DominatedScenario sc = gen_dominated(seed, 6, 28);
    CHECK(sc.c == 0.5);
    CHECK(sc.domination_defect >= -1e-10);

    const EigenSystem gap = hermitian_eig(
        hermitize(sc.sigmas.term(3).matrix() - sc.c * sc.rhos.term(3).matrix()));
    CHECK(gap.eigenvalues.back() > -1e-9);

    CHECK(sc.rhos.decreasing_on_average());
    CHECK(sc.sigmas.decreasing_on_average());

    const ProjectorFamily fam = build_strongly_consistent(sc.sigmas);
    const FamilyCheckReport rep = check_strongly_consistent(fam, sc.sigmas);
    CHECK(rep.consistent());
    CHECK(rep.strongly_consistent());
  }
}

TEST_CASE("block scenario splits the divergence exactly across orthogonal blocks") {
  const BlockScenario sc = gen_block_sums(21, 8, 10, 4);
  CHECK(sc.block_dim == 2);
  CHECK(sc.rho_blocks.size() == 4);

  for (int n = 0; n <= 10; ++n) {
    // disjoint supports
    const ComplexMatrix overlap =
        sc.rho_blocks[0].term(n).matrix() * sc.rho_blocks[1].term(n).matrix();
    CHECK(overlap.max_abs() < 1e-14);

    ExtReal total = ExtReal::finite(0.0);
    for (int k = 0; k < 4; ++k)
      total = total + relative_entropy(sc.rho_blocks[static_cast<std::size_t>(k)].term(n),
                                       sc.sigma_blocks[static_cast<std::size_t>(k)].term(n));
    const ExtReal whole = relative_entropy(sc.rho_sum.term(n), sc.sigma_sum.term(n));
    REQUIRE(whole.is_finite());
    CHECK(std::abs(whole.value() - total.value()) <= 1e-9);
  }

  // geometric masses: each block carries half the previous one's weight
  const double t0 = sc.rho_blocks[0].term(0).trace();
  const double t1 = sc.rho_blocks[1].term(0).trace();
  CHECK(t1 < t0);

  CHECK_THROWS_AS(gen_block_sums(3, 4, 5, 9), BlockOverflow);
}

TEST_CASE("single block reduces to the plain scenario") {
  const BlockScenario sc = gen_block_sums(5, 4, 6, 1);
  for (int n = 0; n <= 6; ++n) {
    const ComplexMatrix diff = sc.rho_sum.term(n).matrix() - sc.rho_blocks[0].term(n).matrix();
    CHECK(diff.max_abs() < 1e-15);
  }
}

TEST_CASE("weighted energy bound controls the observed tails exactly") {
  // Hand-checkable: constant diagonal state, energies 0,1,2, weights 1,2,4.
  const GibbsModel m(1.0, {0.0, 1.0, 2.0});
  const OperatorSequence rhos = constant_sequence(PsdOperator(diagm({0.5, 0.3, 0.2})), 4);
  const GibbsTailReport rep = gibbs_tail_check(m, rhos, {1.0, 2.0, 4.0});

  CHECK(std::abs(rep.energy_bound - 2.2) < 1e-14);          // 2*0.3 + 8*0.2
  CHECK(std::abs(rep.observed_tail[0] - 0.7) < 1e-14);      // full mean energy
  CHECK(std::abs(rep.observed_tail[2] - 0.4) < 1e-14);      // E2 p2
  CHECK(std::abs(rep.tail_bound[2] - 0.55) < 1e-14);        // 2.2 / 4
  CHECK(rep.bound_ok);
  CHECK(rep.d_values.size() == 5);
  REQUIRE(rep.final_gap.is_finite());
  CHECK(rep.final_gap.value() < 1e-13);
  CHECK(rep.limit_reached);
}

TEST_CASE("bounded level sequences reach the gibbs limit in divergence") {
  const GibbsModel m = GibbsModel::truncated_oscillator(1.0, 12);
  const OperatorSequence rhos = gen_gibbs_bounded(31, m, 48, 5);
  std::vector<double> w(12);
  for (int k = 0; k < 12; ++k) w[static_cast<std::size_t>(k)] = 1.0 + k;

  const GibbsTailReport rep = gibbs_tail_check(m, rhos, w, 1e-5);
  CHECK(rep.bound_ok);
  for (const auto& d : rep.d_values) CHECK(d.is_finite());
  CHECK(rep.limit_reached);
}

TEST_CASE("weight validation: flat or shrinking weights are rejected") {
  const GibbsModel m(1.0, {0.0, 1.0, 2.0});
  const OperatorSequence rhos = constant_sequence(PsdOperator(diagm({0.5, 0.3, 0.2})), 2);
  CHECK_THROWS_AS(gibbs_tail_check(m, rhos, {1.0, 1.0, 1.0}), InvalidWeights);
  CHECK_THROWS_AS(gibbs_tail_check(m, rhos, {4.0, 2.0, 1.0}), InvalidWeights);
  CHECK_THROWS_AS(gibbs_tail_check(m, rhos, {1.0, 2.0}), InvalidWeights);
  CHECK_THROWS_AS(gibbs_tail_check(m, rhos, {0.0, 1.0, 2.0}), InvalidWeights);
}

TEST_CASE("identity map experiment reproduces the input divergences") {
  Rng rng(77);
  const PsdOperator rho = random_psd(5, rng);
  const PsdOperator sigma = random_psd(5, rng);
  const OperatorSequence rhos = constant_sequence(rho, 12);
  const OperatorSequence sigmas = constant_sequence(sigma, 12);

  ExperimentOptions opt;
  opt.with_profiles = false;
  const ExperimentReport rep =
      cp_preservation_experiment(rhos, sigmas, KrausMap::identity(5), opt);

  CHECK(rep.hypothesis_met);
  CHECK(rep.input_converged);
  CHECK(rep.image_converged);
  CHECK(rep.claim_checked);
  CHECK(rep.claim_holds);
  CHECK_FALSE(rep.varying_maps);
  for (std::size_t n = 0; n < rep.d_in.size(); ++n) {
    REQUIRE(rep.d_in[n].is_finite());
    CHECK(std::abs(rep.d_in[n].value() - rep.d_out[n].value()) < 1e-12);
  }

  std::ostringstream csv;
  rep.write_csv(csv);
  CHECK(csv.str().rfind("n,D_in,D_out,gap_in,gap_out\n", 0) == 0);
}

TEST_CASE("partial trace preserves convergence on dominated inputs") {
  const DominatedScenario sc = gen_dominated(41, 6, 44);
  ExperimentOptions opt;
  opt.with_profiles = false;
  const ExperimentReport rep =
      cp_preservation_experiment(sc.rhos, sc.sigmas, trace_env_map(3, 2), opt);

  CHECK(rep.hypothesis_met);
  CHECK(rep.claim_checked);
  CHECK(rep.claim_holds);
  // data processing: the image divergence never exceeds the input one
  for (std::size_t n = 0; n < rep.d_in.size(); ++n) {
    REQUIRE(rep.d_in[n].is_finite());
    CHECK(rep.d_out[n].value() <= rep.d_in[n].value() + 1e-9);
  }
}

TEST_CASE("profiles come along when requested") {
  const DominatedScenario sc = gen_dominated(43, 5, 30);
  ExperimentOptions opt;
  opt.with_profiles = true;
  const ExperimentReport rep =
      cp_preservation_experiment(sc.rhos, sc.sigmas, KrausMap::identity(5), opt);
  REQUIRE(rep.profile_in.has_value());
  REQUIRE(rep.profile_out.has_value());
  CHECK(rep.profile_in->rows.size() == 6);  // m = 0..5
  // full-dimension cut compresses by the identity: the tail sup vanishes
  REQUIRE(rep.profile_in->rows.back().sup_d.is_finite());
  CHECK(rep.profile_in->rows.back().sup_d.value() <= 1e-12);
}

TEST_CASE("a gap-keeping input leaves the hypothesis unmet and the claim unchecked") {
  const GibbsModel m = GibbsModel::truncated_oscillator(1.0, 16);
  const CounterexampleScenario sc = gen_counterexample(m, 2, 14);
  const OperatorSequence gammas = constant_sequence(sc.gamma, sc.rhos.n_max());

  // single-Kraus projection onto the lower half of the ladder: a valid
  // operation that is rank deficient on the ambient space
  ComplexMatrix p(16, 16);
  for (int i = 0; i < 8; ++i) p(i, i) = 1.0;
  const KrausMap phi({p}, MapKind::operation);

  ExperimentOptions opt;
  opt.with_profiles = false;
  const ExperimentReport rep = cp_preservation_experiment(sc.rhos, gammas, phi, opt);
  CHECK_FALSE(rep.hypothesis_met);
  CHECK_FALSE(rep.input_converged);
  CHECK_FALSE(rep.claim_checked);
  CHECK_FALSE(rep.claim_holds);
}

TEST_CASE("varying maps with a constant family match the fixed-map run") {
  const DominatedScenario sc = gen_dominated(47, 4, 20);
  ExperimentOptions opt;
  opt.with_profiles = false;
  const KrausMap id = KrausMap::identity(4);
  const std::vector<KrausMap> maps(static_cast<std::size_t>(sc.rhos.n_max()) + 1, id);

  const ExperimentReport fixed = cp_preservation_experiment(sc.rhos, sc.sigmas, id, opt);
  const ExperimentReport vary = varying_map_experiment(sc.rhos, sc.sigmas, maps, opt);

  CHECK(vary.varying_maps);
  CHECK_FALSE(vary.images_not_converging);
  REQUIRE(vary.map_residuals.size() == maps.size());
  for (double r : vary.map_residuals) CHECK(r < 1e-14);
  for (std::size_t n = 0; n < fixed.d_in.size(); ++n) {
    CHECK(std::abs(fixed.d_out[n].value() - vary.d_out[n].value()) < 1e-14);
  }
}

TEST_CASE("slowly settling unitary families count as converging images") {
  Rng rng(53);
  const PsdOperator rho = random_psd(4, rng);
  const PsdOperator sigma = random_psd(4, rng);
  const int n_max = 20;
  const OperatorSequence rhos = constant_sequence(rho, n_max);
  const OperatorSequence sigmas = constant_sequence(sigma, n_max);

  const ComplexMatrix h = random_hermitian(4, rng);
  std::vector<KrausMap> maps;
  for (int n = 0; n <= n_max; ++n) {
    const double angle = n == 0 ? 0.0 : 1.0 / n;
    maps.emplace_back(std::vector<ComplexMatrix>{unitary_exp_i(h, angle)}, MapKind::channel);
  }

  ExperimentOptions opt;
  opt.with_profiles = false;
  const ExperimentReport rep = varying_map_experiment(rhos, sigmas, maps, opt);
  CHECK_FALSE(rep.images_not_converging);
  // unitary invariance keeps every image divergence equal to the input one
  for (std::size_t n = 0; n < rep.d_in.size(); ++n)
    CHECK(std::abs(rep.d_out[n].value() - rep.d_in[n].value()) < 1e-9);
  CHECK(rep.hypothesis_met);
  CHECK(rep.claim_holds);
}

TEST_CASE("an oscillating map family is flagged as not converging") {
  Rng rng(59);
  const PsdOperator rho = random_psd(4, rng);
  const PsdOperator sigma = random_psd(4, rng);
  const int n_max = 16;
  const OperatorSequence rhos = constant_sequence(rho, n_max);
  const OperatorSequence sigmas = constant_sequence(sigma, n_max);

  const ComplexMatrix h = random_hermitian(4, rng);
  const KrausMap id = KrausMap::identity(4);
  const KrausMap kick(std::vector<ComplexMatrix>{unitary_exp_i(h, 0.9)}, MapKind::channel);
  std::vector<KrausMap> maps;
  for (int n = 0; n <= n_max; ++n) maps.push_back(n % 2 == 1 ? kick : id);

  ExperimentOptions opt;
  opt.with_profiles = false;
  const ExperimentReport rep = varying_map_experiment(rhos, sigmas, maps, opt);
  CHECK(rep.images_not_converging);
  double worst = 0.0;
  for (double r : rep.map_residuals) worst = std::max(worst, r);
  CHECK(worst > 0.05);
}

TEST_CASE("experiment shape validation") {
  const DominatedScenario sc = gen_dominated(61, 4, 6);
  ExperimentOptions opt;
  opt.with_profiles = false;
  CHECK_THROWS_AS(cp_preservation_experiment(sc.rhos, sc.sigmas, KrausMap::identity(5), opt),
                  DimensionMismatch);

  const std::vector<KrausMap> short_maps(3, KrausMap::identity(4));
  CHECK_THROWS_AS(varying_map_experiment(sc.rhos, sc.sigmas, short_maps, opt),
                  DimensionMismatch);
}
