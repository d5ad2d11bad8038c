#include "lkcurv/report.hpp"

#include <cmath>
#include <cstdio>

namespace lkcurv {

namespace {

Json number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

Json vec(const VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

}  // namespace

Json to_json(const Tolerance& t) {
  return Json{{"abs_tol", t.abs_tol}, {"rel_tol", t.rel_tol}, {"nsigma", t.nsigma}};
}

Json to_json(const IdentityReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms) terms.push_back(Json{{"label", t.label}, {"value", number(t.value)}, {"stderr", number(t.std_error)}});
  Json j{{"identity", r.identity},
         {"space", r.space},
         {"function", r.function},
         {"lhs", number(r.lhs)},
         {"lhs_stderr", number(r.lhs_error)},
         {"rhs", number(r.rhs)},
         {"rhs_stderr", number(r.rhs_error)},
         {"tolerance", to_json(r.tol)},
         {"bound", number(r.tolerance)},
         {"pass", r.pass},
         {"terms", terms}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const SeriesPoint& p) {
  return Json{{"scale", number(p.scale)}, {"value", number(p.value)}, {"stderr", number(p.std_error)}};
}

Json to_json(const LimitEstimate& e) {
  Json s = Json::array();
  for (const auto& p : e.series) s.push_back(to_json(p));
  return Json{{"tag", e.tag},
              {"value", number(e.value)},
              {"stderr", number(e.std_error)},
              {"residual", number(e.residual)},
              {"ladder", e.kind == LadderKind::shrink ? "eps" : "R"},
              {"decay", number(e.decay)},
              {"series", s}};
}

Json to_json(const PolarEstimate& p) {
  return Json{{"k", p.k},
              {"sigma", number(p.sigma)},
              {"stderr", number(p.std_error)},
              {"method", p.method},
              {"samples", p.samples},
              {"eps", number(p.eps)},
              {"delta_factors", p.delta_ladder}};
}

Json to_json(const BoundaryMeasure& b) {
  Json per = Json::object();
  for (const auto& [id, d] : b.per_stratum) per[id] = Json{{"value", number(d.value)}, {"stderr", number(d.std_error)}};
  return Json{{"eps", number(b.eps)}, {"per_stratum", per}, {"total", number(b.total)}, {"stderr", number(b.total_error)}};
}

Json to_json(const MorseReport& m) {
  Json pts = Json::array();
  for (const auto& p : m.critical_points) {
    pts.push_back(Json{{"position", vec(p.position)},
                       {"stratum", p.stratum},
                       {"lambda", number(p.lambda)},
                       {"morse_index", p.morse_index},
                       {"normal_index", number(p.normal_index)},
                       {"inward", p.inward}});
  }
  return Json{{"v", vec(m.v)},
              {"eps", number(m.eps)},
              {"resamples", m.resamples},
              {"critical_points", pts},
              {"index_at_origin", number(m.index_at_origin)},
              {"inward_sum", number(m.inward_sum)},
              {"lhs", number(m.identity_lhs)},
              {"rhs", number(m.identity_rhs)},
              {"incomplete", m.incomplete},
              {"pass", m.pass}};
}

Json to_json(const BdkResult& b) {
  return Json{{"lhs", b.lhs}, {"rhs", b.rhs}, {"pass", b.pass}, {"terms", b.terms}};
}

Json to_json(const ConstructibleFunction& f, const StratifiedSpace& space) {
  Json j = Json::object();
  for (std::size_t i = 0; i < space.size(); ++i) j[space.strata[i].id] = f.weights[i];
  return j;
}

Json describe(const StratifiedSpace& space) {
  Json strata = Json::array();
  for (const auto& s : space.strata) {
    Json j{{"id", s.id}, {"real_dim", s.real_dim}, {"complex", s.is_complex}, {"charts", s.charts.size()}};
    if (s.alpha) j["alpha"] = *s.alpha;
    if (s.alpha_fn) j["alpha"] = s.alpha_label.empty() ? "function" : s.alpha_label;
    strata.push_back(j);
  }
  Json closure = Json::array();
  for (auto [i, j] : space.closure_pairs) closure.push_back(Json::array({space.strata[i].id, space.strata[j].id}));
  Json links = Json::array();
  for (const auto& [key, chi] : space.chi_link) {
    links.push_back(Json::array(
        {space.strata[key.first].id, key.second == kAmbient ? std::string("X") : space.strata[key.second].id, chi}));
  }
  Json oracle = Json::object();
  for (const auto& [key, a] : space.oracle) {
    oracle[key] = Json{{"value", a.den == 1 ? Json(a.num) : Json(std::to_string(a.num) + "/" + std::to_string(a.den))},
                       {"derivation", a.derivation}};
  }
  const ValidationReport v = validate(space);
  Json failures = Json::array();
  for (const auto& f : v.failures) failures.push_back(Json{{"invariant", f.invariant}, {"witness", f.witness}});
  Json j{{"name", space.name},
         {"kind", space.kind == SpaceKind::germ ? "germ" : "global"},
         {"ambient_real_dim", space.ambient_real_dim},
         {"dim", space.dim()},
         {"complex", space.is_complex()},
         {"strata", strata},
         {"closure_order", closure},
         {"link_table", links},
         {"oracle_annotations", oracle},
         {"infinity_decay", number(space.infinity_decay)},
         {"valid", v.ok()},
         {"validation_failures", failures}};
  if (space.is_complex() && v.ok()) {
    Json eta_tab = Json::object();
    Json eu = Json::object();
    try {
      const auto basis = euler_obstruction_basis(space);
      for (std::size_t jx = 0; jx < space.size(); ++jx) eu[space.strata[jx].id] = to_json(basis[jx], space);
      for (std::size_t i = 0; i < space.size(); ++i) {
        eta_tab[space.strata[i].id] = eta(space, indicator_ambient(space), static_cast<int>(i));
      }
      j["eta_1X"] = eta_tab;
      j["euler_obstruction_basis"] = eu;
      j["euler_obstruction_label"] = euler_obstruction_label(space);
    } catch (const std::exception& e) {
      j["constructible_error"] = e.what();
    }
  }
  return j;
}

Json make_document(const std::string& command, const Json& config, Json results) {
  long passed = 0, failed = 0;
  for (const auto& r : results) {
    if (r.is_object() && r.contains("pass") && r["pass"].is_boolean()) (r["pass"].get<bool>() ? passed : failed)++;
  }
  return Json{{"schema", kReportSchema},
              {"command", command},
              {"config", config},
              {"results", std::move(results)},
              {"summary", Json{{"passed", passed}, {"failed", failed}}}};
}

std::string csv_number(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote(fields[i]);
  }
  return out + "\n";
}

std::string csv_header(const std::vector<std::string>& columns) { return csv_row(columns); }

std::string identity_csv(const std::vector<IdentityReport>& reports) {
  std::string out = csv_header({"identity", "space", "function", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "bound", "pass"});
  for (const auto& r : reports) {
    out += csv_row({r.identity, r.space, r.function, csv_number(r.lhs), csv_number(r.lhs_error), csv_number(r.rhs),
                    csv_number(r.rhs_error), csv_number(r.tolerance), r.pass ? "true" : "false"});
  }
  return out;
}

}  // namespace lkcurv
