#ifndef QRELENT_INTERCHANGE_HPP
#define QRELENT_INTERCHANGE_HPP

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qrelent/scenarios.hpp"

namespace qrelent {

using Json = nlohmann::json;

inline constexpr int kDocumentVersion = 1;

// Reject stray keys early: silent typos in documents are worse than errors.
inline void require_known_fields(const Json& j, std::initializer_list<std::string_view> allowed,
                                 const std::string& where) {
  if (!j.is_object()) throw MalformedDocument(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known) throw MalformedDocument(where + ": unknown field '" + item.key() + "'");
  }
}

inline void require_version(const Json& j, const std::string& where) {
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kDocumentVersion)
    throw MalformedDocument(where + ": missing or unsupported version");
}

// ---------------------------------------------------------------------------
// Matrices and Kraus maps
// ---------------------------------------------------------------------------

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json entries = Json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      entries.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
  return Json{{"dim_rows", m.rows()}, {"dim_cols", m.cols()}, {"entries", std::move(entries)}};
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  require_known_fields(j, {"dim_rows", "dim_cols", "entries"}, "matrix");
  if (!j.contains("dim_rows") || !j.contains("dim_cols") || !j.contains("entries") ||
      !j["dim_rows"].is_number_integer() || !j["dim_cols"].is_number_integer() ||
      !j["entries"].is_array())
    throw MalformedDocument("matrix: needs integer dim_rows, dim_cols and an entries array");
  const int rows = j["dim_rows"].get<int>();
  const int cols = j["dim_cols"].get<int>();
  if (rows <= 0 || cols <= 0) throw MalformedDocument("matrix: dimensions must be positive");
  const auto& entries = j["entries"];
  if (static_cast<int>(entries.size()) != rows * cols)
    throw MalformedDocument("matrix: entry count does not match the dimensions");
  ComplexMatrix m(rows, cols);
  int idx = 0;
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw MalformedDocument("matrix: each entry must be a [re, im] number pair");
    const double re = e[0].get<double>(), im = e[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im))
      throw MalformedDocument("matrix: entries must be finite");
    m(idx / cols, idx % cols) = std::complex<double>(re, im);
    ++idx;
  }
  return m;
}

inline std::string to_string(MapKind k) {
  switch (k) {
    case MapKind::channel: return "channel";
    case MapKind::operation: return "operation";
    case MapKind::general: return "general";
  }
  return "general";
}

inline MapKind map_kind_from_string(const std::string& s) {
  if (s == "channel") return MapKind::channel;
  if (s == "operation") return MapKind::operation;
  if (s == "general") return MapKind::general;
  throw MalformedDocument("map kind must be channel, operation or general, got '" + s + "'");
}

inline Json kraus_to_json(const KrausMap& phi) {
  Json mats = Json::array();
  for (const auto& v : phi.ops()) mats.push_back(matrix_to_json(v));
  return Json{{"version", kDocumentVersion},
              {"dim_in", phi.dim_in()},
              {"dim_out", phi.dim_out()},
              {"kind", to_string(phi.kind())},
              {"matrices", std::move(mats)}};
}

inline KrausMap kraus_from_json(const Json& j, const Tolerances& tol = {}) {
  require_known_fields(j, {"version", "dim_in", "dim_out", "kind", "matrices"}, "kraus map");
  require_version(j, "kraus map");
  if (!j.contains("kind") || !j["kind"].is_string() || !j.contains("matrices") ||
      !j["matrices"].is_array() || j["matrices"].empty())
    throw MalformedDocument("kraus map: needs a kind and a non-empty matrices array");
  std::vector<ComplexMatrix> ops;
  for (const auto& m : j["matrices"]) ops.push_back(matrix_from_json(m));
  const KrausMap phi(std::move(ops), map_kind_from_string(j["kind"].get<std::string>()), tol);
  if (j.contains("dim_in") && (!j["dim_in"].is_number_integer() ||
                               j["dim_in"].get<int>() != phi.dim_in()))
    throw MalformedDocument("kraus map: dim_in disagrees with the matrices");
  if (j.contains("dim_out") && (!j["dim_out"].is_number_integer() ||
                                j["dim_out"].get<int>() != phi.dim_out()))
    throw MalformedDocument("kraus map: dim_out disagrees with the matrices");
  return phi;
}

// ---------------------------------------------------------------------------
// Report fragments
// ---------------------------------------------------------------------------

// Extended values live in JSON as a number or the string "inf".
inline Json ext_to_json(const ExtReal& x) {
  if (x.is_infinite()) return Json("inf");
  return Json(x.value());
}

inline Json tolerances_to_json(const Tolerances& t) {
  Json j;
  for (const auto& entry : detail::kTolEntries) j[std::string(entry.name)] = t.*(entry.field);
  j["max_sweeps"] = t.max_sweeps;
  return j;
}

inline Json profile_to_json(const CriterionProfile& p) {
  Json rows = Json::array();
  for (const auto& r : p.rows)
    rows.push_back(Json{{"m", r.m},
                        {"sup_D", ext_to_json(r.sup_d)},
                        {"argmax_n", r.argmax_n},
                        {"at_boundary", r.at_boundary}});
  Json seq = Json::array();
  for (const auto& d : p.seq_d) seq.push_back(ext_to_json(d));
  return Json{{"n0", p.n0},
              {"m_min", p.m_min},
              {"rows", std::move(rows)},
              {"sequence_D", std::move(seq)},
              {"first_finite_n", p.first_finite_n}};
}

inline Json family_check_to_json(const FamilyCheckReport& r) {
  Json j{{"monotone_ok", r.monotone_ok},
         {"worst_monotone_defect", r.worst_monotone_defect},
         {"coverage_ok", r.coverage_ok},
         {"worst_coverage_ratio", r.worst_coverage_ratio},
         {"limit_distance_ok", r.limit_distance_ok},
         {"worst_final_distance", r.worst_final_distance},
         {"consistent", r.consistent()},
         {"strong_checked", r.strong_checked}};
  if (r.strong_checked) {
    j["commutation_ok"] = r.commutation_ok;
    j["worst_commutator"] = r.worst_commutator;
    j["rank_condition_ok"] = r.rank_condition_ok;
    j["distance_trend_ok"] = r.distance_trend_ok;
    j["strongly_consistent"] = r.strongly_consistent();
  }
  return j;
}

inline Json experiment_to_json(const ExperimentReport& r) {
  Json d_in = Json::array(), d_out = Json::array(), g_in = Json::array(), g_out = Json::array();
  for (const auto& x : r.d_in) d_in.push_back(ext_to_json(x));
  for (const auto& x : r.d_out) d_out.push_back(ext_to_json(x));
  for (const auto& x : r.gap_in) g_in.push_back(ext_to_json(x));
  for (const auto& x : r.gap_out) g_out.push_back(ext_to_json(x));
  Json j{{"D_in", std::move(d_in)},
         {"D_out", std::move(d_out)},
         {"gap_in", std::move(g_in)},
         {"gap_out", std::move(g_out)},
         {"input_tol", r.input_tol},
         {"image_tol", r.image_tol},
         {"input_converged", r.input_converged},
         {"image_converged", r.image_converged},
         {"hypothesis_met", r.hypothesis_met},
         {"claim_checked", r.claim_checked},
         {"claim_holds", r.claim_holds},
         {"varying_maps", r.varying_maps}};
  if (r.varying_maps) {
    j["images_not_converging"] = r.images_not_converging;
    j["map_residuals"] = r.map_residuals;
  }
  if (r.profile_in) j["profile_in"] = profile_to_json(*r.profile_in);
  if (r.profile_out) j["profile_out"] = profile_to_json(*r.profile_out);
  return j;
}

}  // namespace qrelent

#endif  // QRELENT_INTERCHANGE_HPP
