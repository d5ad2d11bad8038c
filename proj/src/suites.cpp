#include "lkcurv/suites.hpp"

#include <cmath>
#include <functional>

namespace lkcurv {

std::vector<std::string> suite_names() {
  return {"local-gb", "main", "euler", "bdk", "global", "polar", "fu", "morse"};
}

SuiteRunner::SuiteRunner(SuiteOptions opts) : opts_(std::move(opts)) {}

Tolerance SuiteRunner::tolerance(const std::string& identity) const {
  Tolerance t = default_tolerance(identity);
  if (opts_.tol.abs_tol) t.abs_tol = *opts_.tol.abs_tol;
  if (opts_.tol.rel_tol) t.rel_tol = *opts_.tol.rel_tol;
  if (opts_.tol.nsigma) t.nsigma = *opts_.tol.nsigma;
  return t;
}

LadderSpec SuiteRunner::ladder(const StratifiedSpace& space) const {
  if (space.kind == SpaceKind::germ) return opts_.eps_ladder.value_or(default_ladder(SpaceKind::germ));
  return opts_.r_ladder.value_or(default_ladder(SpaceKind::global));
}

const CurvatureEngine& SuiteRunner::engine(const StratifiedSpace& space) {
  auto& slot = engines_[space.name];
  if (!slot) {
    const LadderSpec l = ladder(space);
    slot = std::make_unique<CurvatureEngine>(space, opts_.sampling, l.start, l.count);
  }
  return *slot;
}

namespace {

IdentityReport failed(const std::string& identity, const StratifiedSpace& space, const std::string& function,
                      const std::string& what) {
  IdentityReport r;
  r.identity = identity;
  r.space = space.name;
  r.function = function;
  r.lhs = r.rhs = std::nan("");
  r.pass = false;
  r.note = what;
  return r;
}

void guarded(std::vector<IdentityReport>& out, const std::string& identity, const StratifiedSpace& space,
             const std::string& function, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    out.push_back(failed(identity, space, function, e.what()));
  }
}

IdentityReport exact(const std::string& identity, const StratifiedSpace& space, const std::string& function, long lhs,
                     long rhs) {
  IdentityReport r;
  r.identity = identity;
  r.space = space.name;
  r.function = function;
  r.lhs = static_cast<double>(lhs);
  r.rhs = static_cast<double>(rhs);
  r.tol = {0.0, 0.0, 0.0};
  decide(r);
  return r;
}

bool complex_germ(const StratifiedSpace& s) { return s.kind == SpaceKind::germ && s.is_complex(); }

}  // namespace

std::vector<IdentityReport> SuiteRunner::run(const std::string& suite, const StratifiedSpace& space) {
  if (suite == "all") {
    std::vector<IdentityReport> out;
    for (const auto& s : suite_names()) {
      auto r = run(s, space);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }
  if (suite == "local-gb") return local_gb(space);
  if (suite == "main") return main_theorem(space);
  if (suite == "euler") return euler(space);
  if (suite == "bdk") return bdk(space);
  if (suite == "global") return global(space);
  if (suite == "polar") return polar(space);
  if (suite == "fu") return fu(space);
  if (suite == "morse") return morse(space);
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

std::vector<IdentityReport> SuiteRunner::local_gb(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (space.kind != SpaceKind::germ) return out;
  guarded(out, "local-gb", space, "", [&] { out.push_back(verify_local_gb(engine(space), tolerance("local-gb"))); });
  if (space.is_complex()) {
    guarded(out, "sullivan", space, "", [&] {
      for (auto& r : verify_sullivan(engine(space), tolerance("sullivan"))) out.push_back(std::move(r));
    });
  }
  return out;
}

std::vector<IdentityReport> SuiteRunner::main_theorem(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (!complex_germ(space)) return out;
  guarded(out, "main", space, "", [&] {
    for (const auto& [label, f] : corpus_functions(space)) {
      guarded(out, "main", space, label,
              [&] { out.push_back(verify_main_theorem(engine(space), f, label, tolerance("main"))); });
    }
  });
  // L(i, e) = 0 below the dimension of V_0.
  const int d0 = space.strata[space.minimal_index()].complex_dim();
  for (int i = 0; i < static_cast<int>(space.size()); ++i) {
    for (int e = 0; e < d0; ++e) {
      guarded(out, "stratum-vanishing", space, space.strata[i].id, [&] {
        out.push_back(verify_stratum_vanishing(engine(space), i, e, tolerance("vanishing")));
      });
    }
  }
  return out;
}

std::vector<IdentityReport> SuiteRunner::euler(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (!complex_germ(space) || !equidimensional(space)) return out;
  guarded(out, "euler", space, "",
          [&] { out.push_back(euler_obstruction_via_curvature(engine(space), tolerance("euler")).report); });
  return out;
}

std::vector<IdentityReport> SuiteRunner::bdk(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (!space.is_complex()) return out;
  guarded(out, "eta-basis", space, "", [&] {
    const auto basis = euler_obstruction_basis(space);
    for (std::size_t j = 0; j < space.size(); ++j) {
      long worst = 0;
      for (std::size_t i = 0; i < space.size(); ++i) {
        const long want = i == j ? 1 : 0;
        worst = std::max(worst, std::abs(eta(space, basis[j], static_cast<int>(i)) - want));
      }
      out.push_back(exact("eta-basis", space, "Eu_cl(" + space.strata[j].id + ")", worst, 0));
    }
  });
  const auto functions = corpus_functions(space);
  if (space.kind == SpaceKind::germ) {
    for (const auto& [label, f] : functions) {
      guarded(out, "bdk-local", space, label, [&] {
        const BdkResult b = bdk_local(space, f);
        out.push_back(exact("bdk-local", space, label, b.lhs, b.rhs));
      });
    }
  } else {
    guarded(out, "bdk-global", space, "", [&] {
      const auto chi = chi_strata(space);
      const auto geu = global_euler_obstructions(space, chi);
      for (const auto& [label, f] : functions) {
        const BdkResult b = bdk_global(space, f, chi, geu);
        out.push_back(exact("bdk-global", space, label, b.lhs, b.rhs));
      }
    });
  }
  return out;
}

std::vector<IdentityReport> SuiteRunner::global(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (space.kind != SpaceKind::global) return out;
  guarded(out, "global-gb", space, "",
          [&] { out.push_back(verify_global(engine(space), GlobalVariant::gb, std::nullopt, {}, tolerance("global-gb"))); });
  if (!space.is_complex()) return out;
  if (equidimensional(space)) {
    guarded(out, "global-euler", space, "", [&] {
      out.push_back(verify_global(engine(space), GlobalVariant::euler, std::nullopt, {}, tolerance("global-euler")));
    });
  }
  for (const auto& [label, f] : corpus_functions(space)) {
    guarded(out, "global-main", space, label, [&] {
      out.push_back(verify_global(engine(space), GlobalVariant::main, f, label, tolerance("global-main")));
    });
  }
  return out;
}

std::vector<IdentityReport> SuiteRunner::polar(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (!complex_germ(space)) return out;
  PolarConfig pc = opts_.polar;
  pc.seed = opts_.sampling.seed;
  const int d0 = space.strata[space.minimal_index()].real_dim;
  for (int k = d0; k < space.dim(); ++k) {
    guarded(out, "curv-polar", space, "k=" + std::to_string(k),
            [&] { out.push_back(verify_curv_polar(engine(space), k, pc, tolerance("polar"))); });
  }
  for (int e = 1; 2 * e <= space.dim(); ++e) {
    guarded(out, "polar-pairing", space, "e=" + std::to_string(e),
            [&] { out.push_back(verify_polar_pairing(space, e, pc, tolerance("polar"))); });
  }
  return out;
}

std::vector<IdentityReport> SuiteRunner::fu(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (!complex_germ(space) || !equidimensional(space)) return out;
  const LadderSpec l = ladder(space);
  guarded(out, "fu", space, "", [&] { out.push_back(verify_fu(space, l, opts_.sampling, tolerance("fu"))); });
  for (int i = 0; i < static_cast<int>(space.size()); ++i) {
    if (space.strata[i].real_dim == 0) continue;
    guarded(out, "boundary-limit", space, space.strata[i].id, [&] {
      out.push_back(verify_boundary_limits(engine(space), i, l, opts_.sampling, tolerance("boundary")));
    });
  }
  return out;
}

IdentityReport morse_suite_report(const StratifiedSpace& space, double eps, std::size_t directions,
                                  const MorseConfig& cfg, std::uint64_t seed) {
  const auto dirs = morse_directions(space, directions, seed);
  std::vector<MorseReport> reps(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t t) { reps[t] = morse_identity(space, dirs[t], eps, cfg); });
  IdentityReport r;
  r.identity = "morse";
  r.space = space.name;
  char buf[32];
  std::snprintf(buf, sizeof buf, "eps=%g", eps);
  r.function = buf;
  r.lhs = static_cast<double>(dirs.size());
  long ok = 0;
  for (std::size_t t = 0; t < reps.size(); ++t) {
    ok += reps[t].pass;
    r.terms.push_back({"v" + std::to_string(t) + (reps[t].incomplete ? " incomplete" : ""), reps[t].identity_rhs, 0.0});
  }
  r.rhs = static_cast<double>(ok);
  r.tol = {0.0, 0.0, 0.0};
  decide(r);
  r.note = "lhs = directions tried, rhs = directions with chi(X cap B_eps) = ind(v*, X, 0) + inward sum";
  return r;
}

std::vector<IdentityReport> SuiteRunner::morse(const StratifiedSpace& space) {
  std::vector<IdentityReport> out;
  if (space.kind != SpaceKind::germ) return out;
  MorseConfig mc = opts_.morse;
  mc.seed = opts_.sampling.seed;
  for (double eps : opts_.morse_eps) {
    guarded(out, "morse", space, "", [&] {
      out.push_back(morse_suite_report(space, eps, opts_.morse_directions, mc, opts_.sampling.seed));
    });
  }
  guarded(out, "mean-boundary", space, "", [&] {
    out.push_back(mean_boundary_identity(space, opts_.mean_boundary_eps, opts_.mean_boundary_directions, opts_.sampling,
                                         mc, tolerance("mean-boundary")));
  });
  return out;
}

}  // namespace lkcurv
