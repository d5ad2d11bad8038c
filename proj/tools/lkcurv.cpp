#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "lkcurv/report.hpp"
#include "lkcurv/suites.hpp"

using namespace lkcurv;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string space = "all";
  std::string format = "json";
  std::string eps_ladder;
  std::string r_ladder;
  std::size_t points = SamplingConfig{}.points;
  std::size_t directions = SamplingConfig{}.directions;
  std::uint64_t seed = 0;
  int threads = 0;
  std::optional<double> abs_tol, rel_tol, nsigma;
};

void add_common(CLI::App* app, Common& c, bool space_required) {
  auto* s = app->add_option("--space", c.space, "builtin name, variety JSON file, or 'all'");
  if (space_required) s->required();
  app->add_option("--format", c.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--eps-ladder", c.eps_ladder, "germ ladder start:count (default 0.4:8)");
  app->add_option("--r-ladder", c.r_ladder, "global ladder start:count (default 4:6)");
  app->add_option("--points", c.points, "sample points per stratum, chart and shell")->check(CLI::PositiveNumber);
  app->add_option("--directions", c.directions, "normal directions per point")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--threads", c.threads, "worker threads (overrides LKCURV_THREADS)")->check(CLI::PositiveNumber);
  app->add_option("--abs-tol", c.abs_tol, "absolute tolerance override");
  app->add_option("--rel-tol", c.rel_tol, "relative tolerance override");
  app->add_option("--nsigma", c.nsigma, "standard-error multiplier override");
}

StratifiedSpace load_space(const std::string& s) {
  if (std::filesystem::exists(s)) return load(s);
  try {
    return builtin(s);
  } catch (const LookupError& e) {
    throw UsageError(e.what());
  }
}

std::vector<StratifiedSpace> spaces(const std::string& s) {
  std::vector<StratifiedSpace> out;
  if (s == "all") {
    for (const auto& n : builtin_names()) out.push_back(builtin(n));
  } else {
    out.push_back(load_space(s));
  }
  return out;
}

SuiteOptions suite_options(const Common& c) {
  SuiteOptions o;
  o.sampling.points = c.points;
  o.sampling.directions = c.directions;
  o.sampling.seed = c.seed;
  try {
    if (!c.eps_ladder.empty()) o.eps_ladder = parse_ladder(c.eps_ladder);
    if (!c.r_ladder.empty()) o.r_ladder = parse_ladder(c.r_ladder);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  o.tol = {c.abs_tol, c.rel_tol, c.nsigma};
  return o;
}

Json config_json(const Common& c) {
  Json j{{"space", c.space}, {"points", c.points}, {"directions", c.directions}, {"seed", c.seed}};
  if (!c.eps_ladder.empty()) j["eps_ladder"] = c.eps_ladder;
  if (!c.r_ladder.empty()) j["r_ladder"] = c.r_ladder;
  if (c.abs_tol) j["abs_tol"] = *c.abs_tol;
  if (c.rel_tol) j["rel_tol"] = *c.rel_tol;
  if (c.nsigma) j["nsigma"] = *c.nsigma;
  return j;
}

void emit(const Json& doc) { std::cout << doc.dump(2) << "\n"; }

std::string space_kind(const StratifiedSpace& s) { return s.kind == SpaceKind::germ ? "germ" : "global"; }

// ---------------------------------------------------------------------------

int cmd_list(const Common& c) {
  Json rows = Json::array();
  std::string csv = csv_header({"name", "kind", "ambient_real_dim", "dim", "strata", "complex"});
  for (const auto& n : builtin_names()) {
    const auto s = builtin(n);
    rows.push_back(Json{{"name", n},
                        {"kind", space_kind(s)},
                        {"ambient_real_dim", s.ambient_real_dim},
                        {"dim", s.dim()},
                        {"strata", s.size()},
                        {"complex", s.is_complex()}});
    csv += csv_row({n, space_kind(s), std::to_string(s.ambient_real_dim), std::to_string(s.dim()),
                    std::to_string(s.size()), s.is_complex() ? "true" : "false"});
  }
  if (c.format == "csv") {
    std::cout << csv;
  } else {
    emit(make_document("list", Json::object(), rows));
  }
  return 0;
}

int cmd_describe(const Common& c) {
  Json rows = Json::array();
  for (const auto& s : spaces(c.space)) rows.push_back(describe(s));
  emit(make_document("describe", config_json(c), rows));
  return 0;
}

int cmd_curvature(const Common& c, const std::vector<int>& ks) {
  SuiteRunner runner(suite_options(c));
  Json rows = Json::array();
  std::string csv = csv_header({"space", "k", "eps", "stratum", "value", "stderr"});
  for (const auto& s : spaces(c.space)) {
    const CurvatureEngine& eng = runner.engine(s);
    std::vector<int> kk = ks;
    if (kk.empty())
      for (int k = 0; k <= eng.kmax(); ++k) kk.push_back(k);
    for (int k : kk) {
      if (k < 0 || k > eng.kmax()) throw UsageError("k out of range for " + s.name);
      const CurvatureSeries cs = eng.measure(k);
      Json total = Json::array();
      for (const auto& p : cs.values) {
        total.push_back(to_json(p));
        csv += csv_row({s.name, std::to_string(k), csv_number(p.scale), "total", csv_number(p.value), csv_number(p.std_error)});
      }
      Json per = Json::object();
      for (const auto& [id, pts] : cs.per_stratum) {
        Json a = Json::array();
        for (const auto& p : pts) {
          a.push_back(to_json(p));
          csv += csv_row({s.name, std::to_string(k), csv_number(p.scale), id, csv_number(p.value), csv_number(p.std_error)});
        }
        per[id] = a;
      }
      rows.push_back(Json{{"space", s.name}, {"k", k}, {"ladder", s.kind == SpaceKind::germ ? "eps" : "R"},
                          {"total", total}, {"per_stratum", per}});
    }
  }
  if (c.format == "csv") {
    std::cout << csv;
  } else {
    emit(make_document("curvature", config_json(c), rows));
  }
  return 0;
}

int cmd_limits(const Common& c, const std::vector<int>& ks) {
  SuiteRunner runner(suite_options(c));
  Json rows = Json::array();
  std::string csv = csv_header({"space", "tag", "value", "stderr", "residual"});
  for (const auto& s : spaces(c.space)) {
    const CurvatureEngine& eng = runner.engine(s);
    std::vector<int> kk = ks;
    if (kk.empty())
      for (int k = 0; k <= eng.kmax(); ++k) kk.push_back(k);
    Json lim = Json::array();
    for (const auto& [k, l] : scaled_limits(eng, kk)) {
      lim.push_back(to_json(l));
      csv += csv_row({s.name, l.tag, csv_number(l.value), csv_number(l.std_error), csv_number(l.residual)});
    }
    Json strat = Json::array();
    if (s.is_complex()) {
      for (int i = 0; i < static_cast<int>(s.size()); ++i) {
        for (int e = 0; e <= s.strata[i].complex_dim(); ++e) {
          const LimitEstimate l = stratum_curvature_limit(eng, i, e);
          strat.push_back(to_json(l));
          csv += csv_row({s.name, l.tag, csv_number(l.value), csv_number(l.std_error), csv_number(l.residual)});
        }
      }
    }
    rows.push_back(Json{{"space", s.name}, {"scaled_limits", lim}, {"stratum_limits", strat}});
  }
  if (c.format == "csv") {
    std::cout << csv;
  } else {
    emit(make_document("limits", config_json(c), rows));
  }
  return 0;
}

int cmd_polar(const Common& c, const std::vector<int>& ks, const PolarConfig& pc_in) {
  Json rows = Json::array();
  std::string csv = csv_header({"space", "k", "draw", "chi"});
  PolarConfig pc = pc_in;
  pc.seed = c.seed;
  for (const auto& s : spaces(c.space)) {
    if (s.kind != SpaceKind::germ) continue;
    std::vector<int> kk = ks;
    if (kk.empty())
      for (int k = 0; k <= s.ambient_real_dim; ++k) kk.push_back(k);
    for (int k : kk) {
      Json j;
      try {
        const PolarEstimate p = sigma(s, k, pc);
        j = to_json(p);
        for (std::size_t t = 0; t < p.draws.size(); ++t) {
          csv += csv_row({s.name, std::to_string(k), std::to_string(t), std::to_string(p.draws[t])});
        }
      } catch (const UnsupportedSliceError& e) {
        j = Json{{"k", k}, {"error", e.what()}};
      }
      j["space"] = s.name;
      rows.push_back(j);
    }
  }
  if (c.format == "csv") {
    std::cout << csv;
  } else {
    emit(make_document("polar", config_json(c), rows));
  }
  return 0;
}

int cmd_morse(const Common& c, double eps, std::size_t ndir, const std::vector<double>& vin) {
  Json rows = Json::array();
  std::string csv = csv_header({"space", "direction", "eps", "stratum", "lambda", "morse_index", "normal_index", "inward", "position"});
  bool all_pass = true;
  MorseConfig mc;
  mc.seed = c.seed;
  for (const auto& s : spaces(c.space)) {
    if (s.kind != SpaceKind::germ) continue;
    std::vector<VectorXd> dirs;
    if (!vin.empty()) {
      if (static_cast<int>(vin.size()) != s.ambient_real_dim) throw UsageError("--v needs ambient_real_dim entries");
      VectorXd v = Eigen::Map<const VectorXd>(vin.data(), static_cast<Eigen::Index>(vin.size()));
      if (!(v.norm() > 0.0)) throw UsageError("--v must be nonzero");
      dirs.push_back(v.normalized());
    } else {
      dirs = morse_directions(s, ndir, c.seed);
    }
    std::vector<MorseReport> reps(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t t) { reps[t] = morse_identity(s, dirs[t], eps, mc); });
    for (std::size_t t = 0; t < reps.size(); ++t) {
      Json j = to_json(reps[t]);
      j["space"] = s.name;
      rows.push_back(j);
      all_pass = all_pass && reps[t].pass;
      for (const auto& p : reps[t].critical_points) {
        std::string pos;
        for (Eigen::Index i = 0; i < p.position.size(); ++i) pos += (i ? " " : "") + csv_number(p.position[i]);
        csv += csv_row({s.name, std::to_string(t), csv_number(eps), p.stratum, csv_number(p.lambda),
                        std::to_string(p.morse_index), csv_number(p.normal_index), p.inward ? "true" : "false", pos});
      }
    }
  }
  if (c.format == "csv") {
    std::cout << csv;
  } else {
    emit(make_document("morse", config_json(c), rows));
  }
  return all_pass ? 0 : 1;
}

int cmd_fu(const Common& c) {
  SuiteRunner runner(suite_options(c));
  Json rows = Json::array();
  std::vector<IdentityReport> reps;
  std::string csv = csv_header({"space", "eps", "value", "stderr"});
  for (const auto& s : spaces(c.space)) {
    if (s.kind != SpaceKind::germ || !s.is_complex() || !equidimensional(s)) continue;
    const LadderSpec l = runner.ladder(s);
    const IdentityReport r = verify_fu(s, l, runner.options().sampling, runner.tolerance("fu"));
    for (const auto& t : r.terms) csv += csv_row({s.name, t.label.substr(4), csv_number(t.value), csv_number(t.std_error)});
    rows.push_back(to_json(r));
    reps.push_back(r);
  }
  if (c.format == "csv") {
    std::cout << csv;
  } else {
    emit(make_document("fu", config_json(c), rows));
  }
  for (const auto& r : reps)
    if (!r.pass) return 1;
  return 0;
}

int cmd_verify(const Common& c, const std::string& suite, bool timings) {
  SuiteRunner runner(suite_options(c));
  std::vector<IdentityReport> reps;
  const std::vector<std::string> parts = suite == "all" ? suite_names() : std::vector<std::string>{suite};
  for (const auto& s : spaces(c.space)) {
    for (const auto& p : parts) {
      const auto t0 = std::chrono::steady_clock::now();
      auto r = runner.run(p, s);
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      if (timings) std::fprintf(stderr, "timing %s %s %.3f\n", s.name.c_str(), p.c_str(), dt.count());
      reps.insert(reps.end(), r.begin(), r.end());
    }
  }
  long failed = 0;
  for (const auto& r : reps) failed += !r.pass;
  std::fprintf(stderr, "%-16s %-26s %-14s %12s %12s %10s  %s\n", "identity", "space", "function", "lhs", "rhs", "bound",
               "result");
  for (const auto& r : reps) {
    std::fprintf(stderr, "%-16s %-26s %-14s %12.6g %12.6g %10.4g  %s\n", r.identity.c_str(), r.space.c_str(),
                 r.function.c_str(), r.lhs, r.rhs, r.tolerance, r.pass ? "pass" : "FAIL");
  }
  std::fprintf(stderr, "%zu identities, %ld failed\n", reps.size(), failed);
  if (c.format == "csv") {
    std::cout << identity_csv(reps);
  } else {
    Json rows = Json::array();
    for (const auto& r : reps) rows.push_back(to_json(r));
    Json cfg = config_json(c);
    cfg["suite"] = suite;
    emit(make_document("verify", cfg, rows));
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lipschitz-Killing curvatures, polar invariants and Euler obstructions of stratified sets"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common c;
  std::vector<int> ks;
  PolarConfig pc;
  double morse_eps = 1e-3;
  std::size_t morse_n = 20;
  std::vector<double> morse_v;
  std::string suite;
  bool timings = false;

  auto* list = app.add_subcommand("list", "list builtin spaces");
  list->add_option("--format", c.format)->check(CLI::IsMember({"json", "csv"}));
  auto* desc = app.add_subcommand("describe", "strata, link data, oracles and Euler obstruction basis");
  desc->add_option("--space", c.space)->required();
  auto* curv = app.add_subcommand("curvature", "Lambda_k series over the ladder");
  add_common(curv, c, true);
  curv->add_option("--k", ks, "curvature indices (default all)");
  auto* lim = app.add_subcommand("limits", "scaled limits and per-stratum limits L(i, e)");
  add_common(lim, c, true);
  lim->add_option("--k", ks, "curvature indices (default all)");
  auto* pol = app.add_subcommand("polar", "polar invariants sigma_k");
  add_common(pol, c, true);
  pol->add_option("--k", ks, "indices (default all)");
  pol->add_option("--samples", pc.samples, "slice draws")->check(CLI::PositiveNumber);
  pol->add_option("--polar-eps", pc.eps, "ball radius")->check(CLI::PositiveNumber);
  auto* mor = app.add_subcommand("morse", "critical points of linear forms on X cap S_eps");
  add_common(mor, c, true);
  mor->add_option("--eps", morse_eps, "sphere radius")->check(CLI::Range(1e-9, 0.5));
  mor->add_option("--n-directions", morse_n, "random directions")->check(CLI::PositiveNumber);
  mor->add_option("--v", morse_v, "explicit direction (ambient coordinates)");
  auto* fu = app.add_subcommand("fu", "boundary measure of the regular part against Eu");
  add_common(fu, c, true);
  auto* ver = app.add_subcommand("verify", "run verification suites");
  std::vector<std::string> suites = suite_names();
  suites.push_back("all");
  ver->add_option("suite", suite, "local-gb | main | euler | bdk | global | polar | fu | morse | all")
      ->required()
      ->check(CLI::IsMember(suites));
  add_common(ver, c, false);
  ver->add_flag("--timings", timings, "print per-space, per-suite wall time to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (c.threads > 0) set_thread_count(c.threads);

  try {
    if (list->parsed()) return cmd_list(c);
    if (desc->parsed()) return cmd_describe(c);
    if (curv->parsed()) return cmd_curvature(c, ks);
    if (lim->parsed()) return cmd_limits(c, ks);
    if (pol->parsed()) return cmd_polar(c, ks, pc);
    if (mor->parsed()) return cmd_morse(c, morse_eps, morse_n, morse_v);
    if (fu->parsed()) return cmd_fu(c);
    if (ver->parsed()) return cmd_verify(c, suite, timings);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
