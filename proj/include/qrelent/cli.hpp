#ifndef QRELENT_CLI_HPP
#define QRELENT_CLI_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "qrelent/interchange.hpp"

namespace qrelent {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

// Flat parameter record covering every command; per-command defaults fill the
// zero-valued dimension fields, validation rejects out-of-range combinations.
struct RunConfig {
  std::string command;  // check-identities | criterion | scenario | experiment
  std::string kind;     // scenario/experiment flavor, empty otherwise
  std::uint64_t seed = 42;
  int dim = 0;
  int instances = 0;  // check-identities
  int n_max = 0;
  int n0 = 0;
  double epsilon = 1e-3;  // criterion witness level
  double c = 0.5;         // domination constant
  int blocks = 4;         // block-sums
  int levels = 0;         // gibbs: number of occupied ladder rungs
  double beta = 1.0;
  int n_lo = 0, n_hi = 0;  // counterexample level range
  std::string map_kind = "channel";
  int kraus = 0;
  int dim_out = 0;
  double input_tol = 1e-8, image_tol = 1e-6;
  bool with_profiles = true;
  std::string out_dir = ".";
  Tolerances tol;
  std::map<std::string, double> tol_overrides;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> k{"check-identities", "criterion", "scenario",
                                          "experiment"};
  return k;
}

inline void apply_command_defaults(RunConfig& c) {
  const auto def = [](int& field, int v) {
    if (field == 0) field = v;
  };
  if (c.command == "check-identities") {
    def(c.dim, 6);
    def(c.instances, 200);
    def(c.n_max, 2);
  } else if (c.command == "criterion") {
    def(c.dim, 6);
    def(c.n_max, 48);
  } else if (c.command == "scenario") {
    if (c.kind == "dominated") {
      def(c.dim, 6);
      def(c.n_max, 32);
    } else if (c.kind == "block-sums") {
      def(c.dim, 8);
      def(c.n_max, 16);
    } else if (c.kind == "gibbs") {
      def(c.dim, 16);
      def(c.n_max, 48);
      def(c.levels, std::max(1, c.dim / 2));
    } else if (c.kind == "counterexample") {
      def(c.dim, 64);
      def(c.n_lo, 2);
      def(c.n_hi, std::min(48, c.dim - 2));
      def(c.n_max, std::max(2, c.n_hi - c.n_lo + 1));  // sequence length record
    }
  } else if (c.command == "experiment") {
    def(c.dim, 6);
    def(c.n_max, 64);
    def(c.dim_out, c.dim);
    def(c.kraus, 4);
  }
}

inline void validate_config(const RunConfig& c) {
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw ConfigInvalid("unknown command '" + c.command + "'");
  if (c.command == "scenario") {
    if (c.kind != "dominated" && c.kind != "block-sums" && c.kind != "gibbs" &&
        c.kind != "counterexample")
      throw ConfigInvalid("unknown scenario kind '" + c.kind + "'");
  } else if (c.command == "experiment") {
    if (c.kind != "cp-preserve" && c.kind != "varying-maps")
      throw ConfigInvalid("unknown experiment kind '" + c.kind + "'");
  } else if (!c.kind.empty()) {
    throw ConfigInvalid("command '" + c.command + "' takes no kind");
  }
  if (c.dim < 2) throw ConfigInvalid("dim must be at least 2");
  if (c.instances < 0) throw ConfigInvalid("instances must be positive");
  if (c.command == "check-identities" && c.instances < 1)
    throw ConfigInvalid("instances must be positive");
  if (c.n_max < 2) throw ConfigInvalid("n_max must be at least 2");
  if (c.n0 < 0 || c.n0 > c.n_max) throw ConfigInvalid("n0 must lie in [0, n_max]");
  if (!(c.epsilon > 0.0)) throw ConfigInvalid("epsilon must be positive");
  if (!(c.c > 0.0)) throw ConfigInvalid("c must be positive");
  if (c.blocks < 1) throw ConfigInvalid("blocks must be positive");
  if (c.command == "scenario" && c.kind == "gibbs" && (c.levels < 1 || c.levels > c.dim))
    throw ConfigInvalid("levels must lie in [1, dim]");
  if (!(c.beta > 0.0)) throw ConfigInvalid("beta must be positive");
  if (c.command == "scenario" && c.kind == "counterexample" &&
      (c.n_lo < 1 || c.n_hi < c.n_lo || c.n_hi >= c.dim))
    throw ConfigInvalid("counterexample level range must satisfy 1 <= n_lo <= n_hi < dim");
  if (c.command == "experiment") {
    if (c.kraus < 1) throw ConfigInvalid("kraus must be positive");
    if (c.dim_out < 1) throw ConfigInvalid("dim_out must be positive");
    if (c.map_kind != "channel" && c.map_kind != "operation")
      throw ConfigInvalid("map_kind must be channel or operation");
  }
  if (c.input_tol < 0.0 || c.image_tol < 0.0) throw ConfigInvalid("tolerances must be >= 0");
}

inline RunConfig config_from_json(const Json& j) {
  try {
    require_known_fields(j,
                         {"version", "command", "kind", "seed", "dim", "instances", "n_max", "n0",
                          "epsilon", "c", "blocks", "levels", "beta", "n_lo", "n_hi", "map_kind",
                          "kraus", "dim_out", "input_tol", "image_tol", "with_profiles", "out_dir",
                          "tolerances"},
                         "config");
  } catch (const MalformedDocument& e) {
    throw ConfigInvalid(e.what());
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kDocumentVersion)
    throw ConfigInvalid("config: missing or unsupported version");

  RunConfig c;
  const auto get_int = [&](const char* name, int& field) {
    if (!j.contains(name)) return;
    if (!j[name].is_number_integer()) throw ConfigInvalid(std::string("config: ") + name + " must be an integer");
    field = j[name].get<int>();
  };
  const auto get_double = [&](const char* name, double& field) {
    if (!j.contains(name)) return;
    if (!j[name].is_number()) throw ConfigInvalid(std::string("config: ") + name + " must be a number");
    field = j[name].get<double>();
    if (!std::isfinite(field)) throw ConfigInvalid(std::string("config: ") + name + " must be finite");
  };
  const auto get_string = [&](const char* name, std::string& field) {
    if (!j.contains(name)) return;
    if (!j[name].is_string()) throw ConfigInvalid(std::string("config: ") + name + " must be a string");
    field = j[name].get<std::string>();
  };

  get_string("command", c.command);
  get_string("kind", c.kind);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw ConfigInvalid("config: seed must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  get_int("dim", c.dim);
  get_int("instances", c.instances);
  get_int("n_max", c.n_max);
  get_int("n0", c.n0);
  get_double("epsilon", c.epsilon);
  get_double("c", c.c);
  get_int("blocks", c.blocks);
  get_int("levels", c.levels);
  get_double("beta", c.beta);
  get_int("n_lo", c.n_lo);
  get_int("n_hi", c.n_hi);
  get_string("map_kind", c.map_kind);
  get_int("kraus", c.kraus);
  get_int("dim_out", c.dim_out);
  get_double("input_tol", c.input_tol);
  get_double("image_tol", c.image_tol);
  if (j.contains("with_profiles")) {
    if (!j["with_profiles"].is_boolean()) throw ConfigInvalid("config: with_profiles must be a bool");
    c.with_profiles = j["with_profiles"].get<bool>();
  }
  get_string("out_dir", c.out_dir);
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigInvalid("config: tolerances must be an object");
    for (const auto& item : j["tolerances"].items()) {
      if (!item.value().is_number())
        throw ConfigInvalid("config: tolerance '" + item.key() + "' must be a number");
      const double v = item.value().get<double>();
      c.tol.set_by_name(item.key(), v);
      c.tol_overrides[item.key()] = v;
    }
  }
  return c;
}

// Canonical form used for hashing and for the echo inside reports; leaves out
// out_dir so the same run written elsewhere produces identical bytes.
inline Json config_to_json(const RunConfig& c) {
  Json j{{"version", kDocumentVersion},
         {"command", c.command},
         {"seed", c.seed},
         {"dim", c.dim},
         {"n_max", c.n_max},
         {"n0", c.n0}};
  if (!c.kind.empty()) j["kind"] = c.kind;
  if (c.command == "check-identities") j["instances"] = c.instances;
  if (c.command == "criterion") j["epsilon"] = c.epsilon;
  if ((c.command == "scenario" && (c.kind == "dominated" || c.kind == "block-sums")) ||
      c.command == "experiment" || c.command == "criterion")
    j["c"] = c.c;
  if (c.command == "scenario" && c.kind == "block-sums") j["blocks"] = c.blocks;
  if (c.command == "scenario" && c.kind == "gibbs") {
    j["levels"] = c.levels;
    j["beta"] = c.beta;
  }
  if (c.command == "scenario" && c.kind == "counterexample") {
    j["beta"] = c.beta;
    j["n_lo"] = c.n_lo;
    j["n_hi"] = c.n_hi;
  }
  if (c.command == "experiment") {
    j["map_kind"] = c.map_kind;
    j["kraus"] = c.kraus;
    j["dim_out"] = c.dim_out;
    j["input_tol"] = c.input_tol;
    j["image_tol"] = c.image_tol;
    j["with_profiles"] = c.with_profiles;
  }
  if (!c.tol_overrides.empty()) {
    Json t;
    for (const auto& [name, value] : c.tol_overrides) t[name] = value;
    j["tolerances"] = std::move(t);
  }
  return j;
}

inline std::string config_hash(const RunConfig& c) { return fnv1a64_hex(config_to_json(c).dump()); }

// ---------------------------------------------------------------------------
// Command drivers
// ---------------------------------------------------------------------------

namespace detail {

struct Assertion {
  std::string name;
  bool passed = false;
  double value = 0.0;  // the measured quantity behind the verdict
};

struct DriverResult {
  Json results;
  std::vector<Assertion> assertions;
  std::vector<std::pair<std::string, std::string>> files;  // name -> contents
};

inline DriverResult drive_check_identities(const RunConfig& c) {
  Rng rng(c.seed);
  std::ostringstream csv;
  csv << "instance,check,applicable,vacuous,holds,residual,scale\n";
  int violations = 0;
  double worst = 0.0;
  std::map<std::string, double> worst_by_check;
  for (int i = 0; i < c.instances; ++i) {
    const IdentityInstance inst = gen_identity_instance(rng, c.dim, c.tol);
    const IdentityReport rep =
        check_identities(inst.rho, inst.sigma, inst.omega, inst.theta, inst.c, c.tol);
    for (const auto& chk : rep.checks) {
      csv << i << ',' << chk.name << ',' << (chk.applicable ? 1 : 0) << ','
          << (chk.vacuous ? 1 : 0) << ',' << (chk.holds ? 1 : 0) << ','
          << format_g17(chk.residual) << ',' << format_g17(chk.scale) << '\n';
      if (chk.applicable && !chk.vacuous) {
        worst = std::max(worst, chk.residual);
        auto [it, inserted] = worst_by_check.try_emplace(chk.name, chk.residual);
        if (!inserted) it->second = std::max(it->second, chk.residual);
      }
      if (chk.applicable && !chk.holds) ++violations;
    }
  }
  DriverResult out;
  Json by;
  for (const auto& [name, value] : worst_by_check) by[name] = value;
  out.results = Json{{"instances", c.instances},
                     {"dim", c.dim},
                     {"violations", violations},
                     {"worst_residual", worst},
                     {"worst_by_check", std::move(by)}};
  out.assertions.push_back({"identities-hold", violations == 0, static_cast<double>(violations)});
  out.files.emplace_back("identities.csv", csv.str());
  return out;
}

inline DriverResult drive_criterion(const RunConfig& c) {
  const DominatedScenario sc = gen_dominated(c.seed, c.dim, c.n_max, c.c, c.tol);
  const ProjectorFamily fam = build_strongly_consistent(sc.sigmas, c.tol);
  const FamilyCheckReport fc = check_strongly_consistent(fam, sc.sigmas, c.tol);
  const CriterionProfile prof = criterion_profile(sc.rhos, sc.sigmas, fam, c.n0, c.tol);
  const double defect = profile_increase_defect(prof);
  const auto wit = prof.witness(c.epsilon);

  DriverResult out;
  out.results = Json{{"family", family_check_to_json(fc)},
                     {"profile", profile_to_json(prof)},
                     {"epsilon", c.epsilon}};
  if (wit) out.results["witness"] = Json{{"m", wit->first}, {"n_start", wit->second}};
  out.assertions.push_back({"family-consistent", fc.consistent(), fc.worst_monotone_defect});
  out.assertions.push_back(
      {"family-strongly-consistent", fc.strongly_consistent(), fc.worst_commutator});
  out.assertions.push_back({"profile-non-increasing", defect <= kFamilySlack, defect});
  const bool found = wit.has_value() && wit->first < c.dim;
  out.assertions.push_back(
      {"tail-witness-before-full-cut", found, found ? static_cast<double>(wit->first) : -1.0});
  std::ostringstream csv;
  prof.write_csv(csv);
  out.files.emplace_back("profile.csv", csv.str());
  return out;
}

inline DriverResult drive_scenario_dominated(const RunConfig& c) {
  const DominatedScenario sc = gen_dominated(c.seed, c.dim, c.n_max, c.c, c.tol);
  const std::vector<double> rdist = sc.rhos.distances_to_limit(c.tol);
  const std::vector<double> sdist = sc.sigmas.distances_to_limit(c.tol);

  std::vector<ExtReal> dv;
  bool all_finite = true;
  for (int n = 0; n <= c.n_max; ++n) {
    dv.push_back(relative_entropy(sc.rhos.term(n), sc.sigmas.term(n), c.tol));
    all_finite = all_finite && dv.back().is_finite();
  }
  std::ostringstream csv;
  csv << "n,D,gap,rho_distance,sigma_distance\n";
  Json dvj = Json::array();
  double final_gap = 0.0;
  for (int n = 0; n <= c.n_max; ++n) {
    const double gap =
        all_finite ? std::abs(dv[static_cast<std::size_t>(n)].value() - dv[0].value()) : 0.0;
    if (n == c.n_max) final_gap = gap;
    csv << n << ',' << format_ext(dv[static_cast<std::size_t>(n)]) << ',' << format_g17(gap)
        << ',' << format_g17(rdist[static_cast<std::size_t>(n)]) << ','
        << format_g17(sdist[static_cast<std::size_t>(n)]) << '\n';
    dvj.push_back(ext_to_json(dv[static_cast<std::size_t>(n)]));
  }
  DriverResult out;
  out.results = Json{{"c", sc.c},
                     {"domination_defect", sc.domination_defect},
                     {"final_gap", final_gap},
                     {"D", std::move(dvj)}};
  out.assertions.push_back(
      {"domination-certified", sc.domination_defect >= -1e-10, sc.domination_defect});
  out.assertions.push_back({"divergences-finite", all_finite, all_finite ? 1.0 : 0.0});
  const bool settling =
      sc.rhos.decreasing_on_average(c.tol) && sc.sigmas.decreasing_on_average(c.tol);
  out.assertions.push_back({"sequences-settling", settling, settling ? 1.0 : 0.0});
  out.files.emplace_back("scenario.csv", csv.str());
  return out;
}

inline DriverResult drive_scenario_block_sums(const RunConfig& c) {
  const BlockScenario sc = gen_block_sums(c.seed, c.dim, c.n_max, c.blocks, c.tol);
  std::ostringstream csv;
  csv << "n,D_sum,sum_of_blocks,residual\n";
  double max_residual = 0.0;
  for (int n = 0; n <= c.n_max; ++n) {
    const ExtReal whole = relative_entropy(sc.rho_sum.term(n), sc.sigma_sum.term(n), c.tol);
    ExtReal parts = ExtReal::finite(0.0);
    for (int k = 0; k < c.blocks; ++k)
      parts = parts + relative_entropy(sc.rho_blocks[static_cast<std::size_t>(k)].term(n),
                                       sc.sigma_blocks[static_cast<std::size_t>(k)].term(n), c.tol);
    const double residual = whole.is_finite() && parts.is_finite()
                                ? std::abs(whole.value() - parts.value())
                                : (whole.is_finite() == parts.is_finite() ? 0.0 : 1.0);
    max_residual = std::max(max_residual, residual);
    csv << n << ',' << format_ext(whole) << ',' << format_ext(parts) << ','
        << format_g17(residual) << '\n';
  }
  DriverResult out;
  out.results = Json{{"blocks", c.blocks},
                     {"block_dim", sc.block_dim},
                     {"max_additivity_residual", max_residual}};
  out.assertions.push_back({"block-additivity", max_residual <= kIdentitySlack, max_residual});
  out.files.emplace_back("blocks.csv", csv.str());
  return out;
}

inline DriverResult drive_scenario_gibbs(const RunConfig& c) {
  const GibbsModel model = GibbsModel::truncated_oscillator(c.beta, c.dim);
  const OperatorSequence rhos = gen_gibbs_bounded(c.seed, model, c.n_max, c.levels, c.tol);
  std::vector<double> weights(static_cast<std::size_t>(c.dim));
  for (int k = 0; k < c.dim; ++k) weights[static_cast<std::size_t>(k)] = 1.0 + k;
  const GibbsTailReport rep = gibbs_tail_check(model, rhos, weights, 1e-5, c.tol);

  std::ostringstream csv;
  csv << "m,weight,tail_bound,observed_tail\n";
  for (int m = 0; m < c.dim; ++m)
    csv << m << ',' << format_g17(weights[static_cast<std::size_t>(m)]) << ','
        << format_g17(rep.tail_bound[static_cast<std::size_t>(m)]) << ','
        << format_g17(rep.observed_tail[static_cast<std::size_t>(m)]) << '\n';

  bool all_finite = true;
  Json dvj = Json::array();
  for (const auto& d : rep.d_values) {
    all_finite = all_finite && d.is_finite();
    dvj.push_back(ext_to_json(d));
  }
  DriverResult out;
  out.results = Json{{"energy_bound", rep.energy_bound},
                     {"final_gap", ext_to_json(rep.final_gap)},
                     {"limit_reached", rep.limit_reached},
                     {"D", std::move(dvj)}};
  out.assertions.push_back({"energy-bound-propagates", rep.bound_ok, rep.energy_bound});
  out.assertions.push_back({"divergences-finite", all_finite, all_finite ? 1.0 : 0.0});
  out.files.emplace_back("gibbs.csv", csv.str());
  return out;
}

inline DriverResult drive_scenario_counterexample(const RunConfig& c) {
  const GibbsModel model = GibbsModel::truncated_oscillator(c.beta, c.dim);
  const CounterexampleScenario sc = gen_counterexample(model, c.n_lo, c.n_hi, c.tol);

  double max_residual = 0.0, max_gap_err = 0.0;
  for (const auto& row : sc.report.rows) {
    max_residual = std::max(max_residual, std::abs(row.residual));
    const double en = model.energies[static_cast<std::size_t>(row.n)];
    const double expected =
        c.beta * (1.0 - model.energies.front() / en) - binary_entropy(1.0 / en);
    max_gap_err = std::max(max_gap_err, std::abs(row.gap - expected));
  }
  DriverResult out;
  out.results = Json{{"limit_value", sc.report.limit_value},
                     {"final_gap_closed_form", sc.report.final_gap_closed_form},
                     {"final_gap_observed", sc.report.rows.back().gap},
                     {"max_residual", max_residual},
                     {"max_gap_error", max_gap_err}};
  out.assertions.push_back({"closed-form-match", max_residual <= 1e-8, max_residual});
  out.assertions.push_back({"gap-matches-closed-form", max_gap_err <= 1e-8, max_gap_err});
  std::ostringstream csv;
  sc.report.write_csv(csv);
  out.files.emplace_back("counterexample.csv", csv.str());
  return out;
}

inline DriverResult drive_experiment(const RunConfig& c) {
  const DominatedScenario sc = gen_dominated(c.seed, c.dim, c.n_max, c.c, c.tol);
  Rng mrng(c.seed * 0x9e3779b97f4a7c15ull + 13);
  ExperimentOptions opt;
  opt.input_tol = c.input_tol;
  opt.image_tol = c.image_tol;
  opt.with_profiles = c.with_profiles;
  opt.n0 = c.n0;

  DriverResult out;
  ExperimentReport rep = [&] {
    if (c.kind == "cp-preserve") {
      const KrausMap phi = c.map_kind == "channel"
                               ? random_channel(c.dim, c.dim_out, c.kraus, mrng, c.tol)
                               : random_operation(c.dim, c.dim_out, c.kraus, mrng, c.tol);
      out.results["map"] = kraus_to_json(phi);
      return cp_preservation_experiment(sc.rhos, sc.sigmas, phi, opt, c.tol);
    }
    const KrausMap base = random_channel(c.dim, c.dim_out, c.kraus, mrng, c.tol);
    const ComplexMatrix h = random_hermitian(c.dim_out, mrng);
    std::vector<KrausMap> maps;
    maps.push_back(base);
    for (int n = 1; n <= c.n_max; ++n) {
      const ComplexMatrix u = unitary_exp_i(h, 1.0 / n, c.tol);
      std::vector<ComplexMatrix> ops;
      for (const auto& v : base.ops()) ops.push_back(u * v);
      maps.emplace_back(std::move(ops), MapKind::channel, c.tol);
    }
    out.results["map"] = kraus_to_json(base);
    return varying_map_experiment(sc.rhos, sc.sigmas, maps, opt, c.tol);
  }();
  rep.seed = c.seed;
  rep.config_hash = config_hash(c);

  out.results["experiment"] = experiment_to_json(rep);
  out.results["seed"] = rep.seed;

  const double final_gap_out = rep.gap_out.back().value_or(-1.0);
  out.assertions.push_back(
      {"claim-holds-when-hypothesis-met", !rep.claim_checked || rep.claim_holds, final_gap_out});
  if (c.kind == "cp-preserve" && c.map_kind == "operation") {
    double worst = 0.0;
    bool ok = true;
    for (std::size_t n = 0; n < rep.d_in.size(); ++n) {
      if (rep.d_in[n].is_infinite()) continue;
      if (rep.d_out[n].is_infinite()) {
        ok = false;
        break;
      }
      worst = std::max(worst, rep.d_out[n].value() - rep.d_in[n].value());
    }
    out.assertions.push_back({"image-divergence-monotone", ok && worst <= 1e-9, worst});
  }
  if (c.kind == "varying-maps")
    out.assertions.push_back({"images-settling", !rep.images_not_converging,
                              rep.map_residuals.empty() ? 0.0 : rep.map_residuals.back()});

  std::ostringstream csv;
  rep.write_csv(csv);
  out.files.emplace_back("experiment.csv", csv.str());
  if (rep.profile_in) {
    std::ostringstream pin;
    rep.profile_in->write_csv(pin);
    out.files.emplace_back("profile_in.csv", pin.str());
  }
  if (rep.profile_out) {
    std::ostringstream pout;
    rep.profile_out->write_csv(pout);
    out.files.emplace_back("profile_out.csv", pout.str());
  }
  return out;
}

inline DriverResult dispatch(const RunConfig& c) {
  if (c.command == "check-identities") return drive_check_identities(c);
  if (c.command == "criterion") return drive_criterion(c);
  if (c.command == "scenario") {
    if (c.kind == "dominated") return drive_scenario_dominated(c);
    if (c.kind == "block-sums") return drive_scenario_block_sums(c);
    if (c.kind == "gibbs") return drive_scenario_gibbs(c);
    return drive_scenario_counterexample(c);
  }
  return drive_experiment(c);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct RunOutput {
  int status = 0;  // 0 all assertions pass, 1 otherwise
  Json report;
  std::vector<std::pair<std::string, std::string>> files;  // name -> contents
};

// Pure form of run(): produces the report and file contents without touching
// the filesystem, so outputs can be compared byte for byte.
inline RunOutput execute(const RunConfig& cfg) {
  RunConfig c = cfg;
  apply_command_defaults(c);
  validate_config(c);

  detail::DriverResult dr = detail::dispatch(c);
  Json asserts = Json::array();
  bool all_passed = true;
  for (const auto& a : dr.assertions) {
    asserts.push_back(Json{{"name", a.name}, {"passed", a.passed}, {"value", a.value}});
    all_passed = all_passed && a.passed;
  }
  RunOutput out;
  out.report = Json{{"version", kDocumentVersion},
                    {"command", c.command},
                    {"seed", c.seed},
                    {"config", config_to_json(c)},
                    {"config_hash", config_hash(c)},
                    {"tolerances", tolerances_to_json(c.tol)},
                    {"assertions", std::move(asserts)},
                    {"all_passed", all_passed},
                    {"results", std::move(dr.results)}};
  if (!c.kind.empty()) out.report["kind"] = c.kind;
  out.files = std::move(dr.files);
  out.files.emplace_back("report.json", out.report.dump(2) + "\n");
  out.status = all_passed ? 0 : 1;
  return out;
}

inline int run(const RunConfig& cfg) {
  const RunOutput out = execute(cfg);
  const std::filesystem::path dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& [name, contents] : out.files) atomic_write_file(dir / name, contents);
  return out.status;
}

// ---------------------------------------------------------------------------
// Help
// ---------------------------------------------------------------------------

inline std::string describe(const std::string& command) {
  if (command == "check-identities")
    return "check-identities: run the divergence identity suite on seeded random\n"
           "operator tuples and record every residual.\n"
           "  --seed N       rng seed (default 42)\n"
           "  dim            ambient dimension (default 6)\n"
           "  instances      number of tuples (default 200)\n"
           "Exit 1 if any applicable identity fails its 1e-9 slack.\n"
           "Outputs: report.json, identities.csv\n";
  if (command == "criterion")
    return "criterion: build a dominated scenario, derive a strongly consistent\n"
           "projector family from the sigma sequence, and tabulate the tail\n"
           "divergence sup over n >= n0 for every cut rank m in [0, dim].\n"
           "  --seed N       rng seed (default 42)\n"
           "  dim            ambient dimension (default 6)\n"
           "  n_max          last sequence index (default 48)\n"
           "  n0             tail start index (default 0)\n"
           "  epsilon        witness level the profile must reach before the\n"
           "                 full cut m = dim (default 1e-3)\n"
           "Exit 1 if the family checks fail, the profile increases in m, or\n"
           "no witness below epsilon exists at m < dim.\n"
           "Outputs: report.json, profile.csv\n";
  if (command == "scenario")
    return "scenario: generate a named operator-sequence scenario and verify its\n"
           "construction invariants.  Kinds:\n"
           "  dominated       sigma_n = c rho_n + eta_n with certified domination\n"
           "                  (dim 6, n_max 32, c 0.5)\n"
           "  block-sums      orthogonal blocks with geometric masses; divergence\n"
           "                  additivity residual per n (dim 8, n_max 16, blocks 4)\n"
           "  gibbs           bounded-energy diagonal states against the Gibbs\n"
           "                  state; weighted tail bound (dim 16, n_max 48,\n"
           "                  levels dim/2, beta 1)\n"
           "  counterexample  trace-norm convergent states whose divergence gap\n"
           "                  persists; closed-form cross-check (dim 64, levels\n"
           "                  n_lo 2 .. n_hi 48, beta 1)\n"
           "Outputs: report.json plus a kind-specific CSV.\n";
  if (command == "experiment")
    return "experiment: push a dominated scenario through completely positive\n"
           "maps and compare divergence gaps on both sides.  Kinds:\n"
           "  cp-preserve    one seeded random map (map_kind channel|operation,\n"
           "                 kraus 4, dim_out dim); claims image gap <= image_tol\n"
           "                 whenever the input gap at n_max is <= input_tol\n"
           "  varying-maps   channels converging to a limit channel (rotation\n"
           "                 angle 1/n composed with a fixed channel); also\n"
           "                 records per-index strong-convergence residuals\n"
           "  input_tol (1e-8), image_tol (1e-6), with_profiles (true), n0 (0)\n"
           "Exit 1 if a checked claim fails, an operation breaks monotonicity,\n"
           "or a varying family's images fail to settle.\n"
           "Outputs: report.json, experiment.csv, profile_in.csv, profile_out.csv\n";
  throw UnknownCommand("no help for '" + command + "'");
}

// ---------------------------------------------------------------------------
// Argument handling shared by the binary and the tests
// ---------------------------------------------------------------------------

struct CliArgs {
  std::string command;  // may be empty when --config provides it
  std::string kind;
  std::string config_path;
  std::string out_dir;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::vector<std::string> tol_overrides;  // NAME=VALUE
};

inline RunConfig build_config(const CliArgs& a) {
  RunConfig c;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + a.config_path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
    c = config_from_json(j);
  }
  if (!a.command.empty()) c.command = a.command;
  if (!a.kind.empty()) c.kind = a.kind;
  if (a.has_seed) c.seed = a.seed;
  if (!a.out_dir.empty()) c.out_dir = a.out_dir;
  for (const std::string& kv : a.tol_overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
      throw ConfigInvalid("--tol expects NAME=VALUE, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ConfigInvalid("--tol " + name + ": value is not a number");
    }
    c.tol.set_by_name(name, value);
    c.tol_overrides[name] = value;
  }
  return c;
}

// Exit codes: 0 all assertions passed, 1 an assertion failed, 2 the request
// was invalid, 3 the filesystem got in the way.
inline int cli_main(const CliArgs& a) {
  try {
    if (a.command == "describe") {
      std::cout << describe(a.kind);
      return 0;
    }
    return run(build_config(a));
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace qrelent

#endif  // QRELENT_CLI_HPP
