#include "lkcurv/limits.hpp"

#include <algorithm>
#include <cmath>

namespace lkcurv {

LadderSpec parse_ladder(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("ladder must look like start:count");
  LadderSpec out;
  try {
    std::size_t used = 0;
    out.start = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("start");
    const std::string c = text.substr(colon + 1);
    out.count = std::stoi(c, &used);
    if (used != c.size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw std::invalid_argument("ladder must look like start:count, got '" + text + "'");
  }
  if (!(out.start > 0.0) || out.count < 5) {
    throw std::invalid_argument("ladder needs start > 0 and at least 5 points");
  }
  return out;
}

LadderSpec default_ladder(SpaceKind kind) {
  return kind == SpaceKind::germ ? LadderSpec{0.4, 8} : LadderSpec{4.0, 6};
}

Tolerance default_tolerance(const std::string& identity) {
  if (identity == "local-gb" || identity == "sullivan" || identity == "vanishing") return {0.02, 0.0, 3.0};
  if (identity == "global-gb") return {0.03, 0.0, 0.0};
  if (identity == "global-euler") return {0.0, 0.05, 0.0};
  return {0.02, 0.02, 3.0};
}

void decide(IdentityReport& r) {
  const double sigma = std::hypot(r.lhs_error, r.rhs_error);
  r.tolerance = std::max(r.tol.abs_tol + r.tol.rel_tol * std::abs(r.lhs), r.tol.nsigma * sigma);
  r.pass = std::isfinite(r.lhs) && std::isfinite(r.rhs) && std::abs(r.lhs - r.rhs) <= r.tolerance;
}

LimitEstimate limit_of(const LinearSeries& s, const std::string& tag) {
  LimitEstimate e = extrapolate_limit(s.points(), s.covariance(), s.kind, s.decay);
  e.tag = tag;
  return e;
}

LinearSeries scaled_series(const CurvatureEngine& eng, int k) {
  return scaled_by_ball(eng.total_series(k), k);
}

std::map<int, LimitEstimate> scaled_limits(const CurvatureEngine& eng, const std::vector<int>& ks) {
  std::map<int, LimitEstimate> out;
  for (int k : ks) out[k] = limit_of(scaled_series(eng, k), "k=" + std::to_string(k));
  return out;
}

namespace {

void require_complex(const CurvatureEngine& eng, const char* what) {
  if (!eng.space().is_complex()) throw PreconditionError(std::string(what) + " needs a complex space");
}

void require_germ(const CurvatureEngine& eng, const char* what) {
  if (eng.space().kind != SpaceKind::germ) throw PreconditionError(std::string(what) + " needs a germ");
}

void require_global(const CurvatureEngine& eng, const char* what) {
  if (eng.space().kind != SpaceKind::global) throw PreconditionError(std::string(what) + " needs a global space");
}

std::string tag_ie(const StratifiedSpace& sp, int i, int e) {
  return "i=" + sp.strata[i].id + ",e=" + std::to_string(e);
}

// Sum over e in [lo, hi] of L(i, e), weighted.
void add_stratum_terms(const CurvatureEngine& eng, int i, int lo, int hi, double w, LinearSeries& acc,
                       std::vector<ReportTerm>& terms) {
  for (int e = lo; e <= hi; ++e) {
    const LinearSeries s = stratum_limit_series(eng, i, e);
    const LimitEstimate l = limit_of(s, tag_ie(eng.space(), i, e));
    terms.push_back({"L(" + eng.space().strata[i].id + "," + std::to_string(e) + ")", l.value, l.std_error});
    acc.add(w, s);
  }
}

LinearSeries zero_series(const CurvatureEngine& eng) {
  LinearSeries z = eng.stratum_series(0, eng.kmax() + 1);
  return z;
}

void fill_rhs(IdentityReport& r, const LinearSeries& s, double constant) {
  const LimitEstimate l = limit_of(s);
  r.rhs = constant + l.value;
  r.rhs_error = l.std_error;
}

}  // namespace

LinearSeries stratum_limit_series(const CurvatureEngine& eng, int i, int e) {
  const auto& sp = eng.space();
  if (i < 0 || i >= static_cast<int>(sp.size())) throw LookupError("no stratum with index " + std::to_string(i));
  if (e < 0) throw PreconditionError("e must be non-negative");
  return scaled_by_ball(eng.stratum_series(i, 2 * e), 2 * e);
}

LimitEstimate stratum_curvature_limit(const CurvatureEngine& eng, int i, int e) {
  require_complex(eng, "stratum_curvature_limit");
  return limit_of(stratum_limit_series(eng, i, e), tag_ie(eng.space(), i, e));
}

IdentityReport verify_stratum_vanishing(const CurvatureEngine& eng, int i, int e, const Tolerance& tol) {
  const LimitEstimate l = stratum_curvature_limit(eng, i, e);
  IdentityReport r;
  r.identity = "stratum-vanishing";
  r.space = eng.space().name;
  r.lhs = l.value;
  r.lhs_error = l.std_error;
  r.rhs = 0.0;
  r.tol = tol;
  r.terms.push_back({"L(" + eng.space().strata[i].id + "," + std::to_string(e) + ")", l.value, l.std_error});
  decide(r);
  return r;
}

IdentityReport verify_local_gb(const CurvatureEngine& eng, const Tolerance& tol) {
  require_germ(eng, "verify_local_gb");
  const auto& sp = eng.space();
  const int d0 = sp.strata[sp.minimal_index()].real_dim;
  IdentityReport r;
  r.identity = "local-gb";
  r.space = sp.name;
  r.tol = tol;
  LinearSeries acc = zero_series(eng);
  for (int k = d0; k <= eng.kmax(); ++k) {
    const LinearSeries s = scaled_series(eng, k);
    const LimitEstimate l = limit_of(s);
    r.terms.push_back({"k=" + std::to_string(k), l.value, l.std_error});
    acc.add(1.0, s);
  }
  fill_rhs(r, acc, 0.0);
  // Reported as lhs = sum of limits, rhs = 1.
  std::swap(r.lhs, r.rhs);
  std::swap(r.lhs_error, r.rhs_error);
  r.rhs = 1.0;
  decide(r);
  return r;
}

std::vector<IdentityReport> verify_sullivan(const CurvatureEngine& eng, const Tolerance& tol) {
  require_germ(eng, "verify_sullivan");
  require_complex(eng, "verify_sullivan");
  std::vector<IdentityReport> out;
  for (int k = 1; k <= eng.kmax(); k += 2) {
    const LimitEstimate l = limit_of(scaled_series(eng, k));
    IdentityReport r;
    r.identity = "sullivan";
    r.space = eng.space().name;
    r.function = "k=" + std::to_string(k);
    r.lhs = l.value;
    r.lhs_error = l.std_error;
    r.rhs = 0.0;
    r.tol = tol;
    r.terms.push_back({"k=" + std::to_string(k), l.value, l.std_error});
    decide(r);
    out.push_back(std::move(r));
  }
  return out;
}

IdentityReport verify_main_theorem(const CurvatureEngine& eng, const ConstructibleFunction& phi,
                                   const std::string& label, const Tolerance& tol) {
  require_germ(eng, "verify_main_theorem");
  require_complex(eng, "verify_main_theorem");
  const auto& sp = eng.space();
  const int v0 = sp.minimal_index();
  const int d0 = sp.strata[v0].complex_dim();
  IdentityReport r;
  r.identity = "main";
  r.space = sp.name;
  r.function = label;
  r.tol = tol;
  r.lhs = static_cast<double>(phi.at(v0));
  const long eta0 = eta(sp, phi, v0);
  r.terms.push_back({"eta(" + sp.strata[v0].id + ")", static_cast<double>(eta0), 0.0});
  LinearSeries acc = zero_series(eng);
  for (int i = 0; i < static_cast<int>(sp.size()); ++i) {
    if (i == v0) continue;
    const long ei = eta(sp, phi, i);
    r.terms.push_back({"eta(" + sp.strata[i].id + ")", static_cast<double>(ei), 0.0});
    if (ei == 0) continue;
    add_stratum_terms(eng, i, d0 + 1, sp.strata[i].complex_dim(), static_cast<double>(ei), acc, r.terms);
  }
  fill_rhs(r, acc, static_cast<double>(eta0));
  decide(r);
  return r;
}

EulerViaCurvature euler_obstruction_via_curvature(const CurvatureEngine& eng, const Tolerance& tol) {
  require_germ(eng, "euler_obstruction_via_curvature");
  require_complex(eng, "euler_obstruction_via_curvature");
  const auto& sp = eng.space();
  if (!equidimensional(sp)) throw PreconditionError("euler_obstruction_via_curvature needs an equidimensional space");
  const int v0 = sp.minimal_index();
  const int d0 = sp.strata[v0].complex_dim();
  IdentityReport r;
  r.identity = "euler";
  r.space = sp.name;
  r.function = euler_obstruction_label(sp);
  r.tol = tol;
  r.lhs = static_cast<double>(euler_obstruction(sp).at(v0));
  LinearSeries acc = zero_series(eng);
  double constant = 0.0;
  for (int i : sp.maximal()) {
    if (i == v0) {
      constant += 1.0;
      r.terms.push_back({"smooth point", 1.0, 0.0});
      continue;
    }
    add_stratum_terms(eng, i, d0 + 1, sp.strata[i].complex_dim(), 1.0, acc, r.terms);
  }
  const LimitEstimate l = limit_of(acc, "Eu");
  fill_rhs(r, acc, constant);
  decide(r);
  EulerViaCurvature out;
  out.estimate = l;
  out.estimate.value += constant;
  out.report = r;
  return out;
}

IdentityReport verify_global(const CurvatureEngine& eng, GlobalVariant variant,
                             const std::optional<ConstructibleFunction>& phi, const std::string& label,
                             std::optional<Tolerance> tol) {
  require_global(eng, "verify_global");
  const auto& sp = eng.space();
  const std::vector<long> chi = chi_strata(sp);
  IdentityReport r;
  r.space = sp.name;
  LinearSeries acc = zero_series(eng);
  switch (variant) {
    case GlobalVariant::gb: {
      r.identity = "global-gb";
      r.tol = tol.value_or(default_tolerance("global-gb"));
      r.lhs = static_cast<double>(euler_characteristic(sp, indicator_ambient(sp), chi));
      for (int k = 0; k <= eng.kmax(); ++k) {
        const LinearSeries s = scaled_series(eng, k);
        const LimitEstimate l = limit_of(s);
        r.terms.push_back({"k=" + std::to_string(k), l.value, l.std_error});
        acc.add(1.0, s);
      }
      break;
    }
    case GlobalVariant::main: {
      require_complex(eng, "verify_global main");
      r.identity = "global-main";
      r.tol = tol.value_or(default_tolerance("global-main"));
      const ConstructibleFunction f = phi.value_or(indicator_ambient(sp));
      r.function = phi ? label : "1_X";
      r.lhs = static_cast<double>(euler_characteristic(sp, f, chi));
      for (int i = 0; i < static_cast<int>(sp.size()); ++i) {
        const long ei = eta(sp, f, i);
        r.terms.push_back({"eta(" + sp.strata[i].id + ")", static_cast<double>(ei), 0.0});
        if (ei == 0) continue;
        add_stratum_terms(eng, i, 0, sp.strata[i].complex_dim(), static_cast<double>(ei), acc, r.terms);
      }
      break;
    }
    case GlobalVariant::euler: {
      require_complex(eng, "verify_global euler");
      if (!equidimensional(sp)) throw PreconditionError("global Euler obstruction needs an equidimensional space");
      r.identity = "global-euler";
      r.function = euler_obstruction_label(sp);
      r.tol = tol.value_or(default_tolerance("global-euler"));
      r.lhs = static_cast<double>(euler_characteristic(sp, euler_obstruction(sp), chi));
      for (int i : sp.maximal()) add_stratum_terms(eng, i, 0, sp.strata[i].complex_dim(), 1.0, acc, r.terms);
      break;
    }
  }
  fill_rhs(r, acc, 0.0);
  decide(r);
  return r;
}

}  // namespace lkcurv
