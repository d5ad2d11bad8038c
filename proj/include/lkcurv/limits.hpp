#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lkcurv/constructible.hpp"
#include "lkcurv/curvature.hpp"

namespace lkcurv {

/// Ladder given as "start:count" on the command line.
struct LadderSpec {
  double start = 0.4;
  int count = 8;
};

LadderSpec parse_ladder(const std::string& text);
LadderSpec default_ladder(SpaceKind kind);

/// pass iff |lhs - rhs| <= max(abs_tol + rel_tol |lhs|, nsigma * combined stderr).
struct Tolerance {
  double abs_tol = 0.02;
  double rel_tol = 0.02;
  double nsigma = 3.0;
};

Tolerance default_tolerance(const std::string& identity);

struct ReportTerm {
  std::string label;
  double value = 0.0;
  double std_error = 0.0;
};

struct IdentityReport {
  std::string identity;
  std::string space;
  std::string function;  // label of phi, if any
  double lhs = 0.0;
  double lhs_error = 0.0;
  double rhs = 0.0;
  double rhs_error = 0.0;
  Tolerance tol;
  double tolerance = 0.0;  // the bound actually applied
  bool pass = false;
  std::vector<ReportTerm> terms;
  std::string note;
};

/// Fills tolerance and pass from lhs, rhs and their errors.
void decide(IdentityReport& r);

LimitEstimate limit_of(const LinearSeries& s, const std::string& tag = {});

/// Lambda_k / (b_k eps^k) over the ladder.
LinearSeries scaled_series(const CurvatureEngine& eng, int k);

std::map<int, LimitEstimate> scaled_limits(const CurvatureEngine& eng, const std::vector<int>& ks);

/// Series whose limit is L(i, e): stratum i's K_{2(d_i - e)} integral over
/// b_{2e} eps^{2e} (point strata: 1 for e = 0).
LinearSeries stratum_limit_series(const CurvatureEngine& eng, int i, int e);
LimitEstimate stratum_curvature_limit(const CurvatureEngine& eng, int i, int e);

/// e outside [d_0, d_i] must give 0 within nsigma * stderr (and abs_tol).
IdentityReport verify_stratum_vanishing(const CurvatureEngine& eng, int i, int e,
                                        const Tolerance& tol = default_tolerance("vanishing"));

IdentityReport verify_local_gb(const CurvatureEngine& eng,
                               const Tolerance& tol = default_tolerance("local-gb"));

/// |lim Lambda_k / (b_k eps^k)| against 0 for every odd k.
std::vector<IdentityReport> verify_sullivan(const CurvatureEngine& eng,
                                            const Tolerance& tol = default_tolerance("sullivan"));

IdentityReport verify_main_theorem(const CurvatureEngine& eng, const ConstructibleFunction& phi,
                                   const std::string& label = {},
                                   const Tolerance& tol = default_tolerance("main"));

struct EulerViaCurvature {
  LimitEstimate estimate;
  IdentityReport report;
};

EulerViaCurvature euler_obstruction_via_curvature(const CurvatureEngine& eng,
                                                  const Tolerance& tol = default_tolerance("euler"));

enum class GlobalVariant { gb, main, euler };

IdentityReport verify_global(const CurvatureEngine& eng, GlobalVariant variant,
                             const std::optional<ConstructibleFunction>& phi = std::nullopt,
                             const std::string& label = {},
                             std::optional<Tolerance> tol = std::nullopt);

}  // namespace lkcurv
