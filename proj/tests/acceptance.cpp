#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lkcurv/constructible.hpp"

using namespace lkcurv;
using nlohmann::json;

namespace {

struct Criterion {
  int id;
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Run {
  int status = -1;
  double seconds = 0.0;
};

Run run_cli(const std::string& args, const std::string& out, const std::string& err) {
  const std::string cmd = std::string(LKCURV_CLI) + " " + args + " > " + out + " 2> " + err;
  const auto t0 = std::chrono::steady_clock::now();
  const int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, seconds_since(t0)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json_file(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const std::exception&) {
    return json::object();
  }
}

// timing[space][suite]
std::map<std::string, std::map<std::string, double>> parse_timings(const std::string& err_path) {
  std::map<std::string, std::map<std::string, double>> t;
  std::istringstream in(slurp(err_path));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag, space, suite;
    double s = 0.0;
    if (ls >> tag >> space >> suite >> s && tag == "timing") t[space][suite] = s;
  }
  return t;
}

std::vector<json> find(const json& doc, const std::string& identity, const std::string& space,
                       const std::string& function = "") {
  std::vector<json> out;
  if (!doc.contains("results")) return out;
  for (const auto& r : doc["results"]) {
    if (r.value("identity", "") != identity || r.value("space", "") != space) continue;
    if (!function.empty() && r.value("function", "") != function) continue;
    out.push_back(r);
  }
  return out;
}

double combined_sigma(const json& r) {
  return std::hypot(r.value("lhs_stderr", 0.0), r.value("rhs_stderr", 0.0));
}

double term(const json& r, const std::string& label, double* err = nullptr) {
  for (const auto& t : r["terms"])
    if (t.value("label", "") == label) {
      if (err) *err = t.value("stderr", 0.0);
      return t.value("value", NAN);
    }
  return NAN;
}

void criterion_exact(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& n : builtin_names()) {
    const auto sp = builtin(n);
    if (!sp.is_complex()) continue;
    const auto basis = euler_obstruction_basis(sp);
    for (std::size_t i = 0; i < sp.size(); ++i)
      for (std::size_t j = 0; j < sp.size(); ++j)
        c.check(eta(sp, basis[j], static_cast<int>(i)) == (i == j ? 1 : 0),
                n + " eta(V" + std::to_string(i) + ", Eu" + std::to_string(j) + ")");
    if (sp.kind == SpaceKind::germ) {
      for (const auto& [label, phi] : corpus_functions(sp)) c.check(bdk_local(sp, phi).pass, n + " bdk_local " + label);
    }
  }
  const std::vector<std::pair<std::string, long>> eu{{"smooth_line", 1},
                                                     {"node", 2},
                                                     {"cusp", 2},
                                                     {"three_lines", 3},
                                                     {"cone_over_plane_curve_1", 1},
                                                     {"cone_over_plane_curve_2", 0},
                                                     {"cone_over_plane_curve_3", -3}};
  for (const auto& [n, want] : eu) {
    const auto sp = builtin(n);
    const long got = euler_obstruction(sp).at(sp.minimal_index());
    c.check(got == want, n + " Eu = " + std::to_string(got) + ", expected " + std::to_string(want));
  }
  const double dt = seconds_since(t0);
  c.check(dt < 1.0, fmt("time %.3f s < 1 s", dt));
  c.note(fmt("%.4f s", dt));
}

}  // namespace

int main() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "lkcurv_acceptance";
  fs::create_directories(dir);
  const std::string out1 = (dir / "all_t1.json").string(), err1 = (dir / "all_t1.err").string();
  const std::string out8 = (dir / "all_t8.json").string(), err8 = (dir / "all_t8.err").string();

  std::vector<Criterion> cs;
  for (int i = 1; i <= 10; ++i) cs.push_back({i});
  auto& c1 = cs[0];
  auto& c2 = cs[1];
  auto& c3 = cs[2];
  auto& c4 = cs[3];
  auto& c5 = cs[4];
  auto& c6 = cs[5];
  auto& c7 = cs[6];
  auto& c8 = cs[7];
  auto& c9 = cs[8];
  auto& c10 = cs[9];

  criterion_exact(c1);

  std::fprintf(stderr, "running verify all (1 thread)...\n");
  const Run r1 = run_cli("verify all --seed 7 --threads 1 --timings", out1, err1);
  std::fprintf(stderr, "  %.1f s, exit %d\n", r1.seconds, r1.status);
  std::fprintf(stderr, "running verify all (8 threads)...\n");
  const Run r8 = run_cli("verify all --seed 7 --threads 8 --timings", out8, err8);
  std::fprintf(stderr, "  %.1f s, exit %d\n", r8.seconds, r8.status);

  const json doc = load_json_file(out1);
  const auto timing = parse_timings(err1);
  auto t_of = [&](const std::string& space, const std::string& suite) {
    const auto s = timing.find(space);
    if (s == timing.end()) return double(INFINITY);
    const auto t = s->second.find(suite);
    return t == s->second.end() ? double(INFINITY) : t->second;
  };

  // 2. local Gauss-Bonnet on every germ
  for (const auto& n : builtin_germs()) {
    const auto rs = find(doc, "local-gb", n);
    c2.check(rs.size() == 1, n + " local-gb report present");
    if (rs.size() != 1) continue;
    const double sum = rs[0]["lhs"], sig = combined_sigma(rs[0]);
    c2.check(std::abs(sum - 1.0) <= std::max(0.02, 3.0 * sig), n + fmt(" sum %.5f (sigma %.4f)", sum, sig));
    const double t = t_of(n, "local-gb");
    c2.check(t < 120.0, n + fmt(" time %.1f s < 120 s", t));
    c2.note(n + fmt(" %.4f +- %.4f in %.1f s", sum, sig, t));
  }

  // 3. Eu via curvature
  for (const auto& [n, eu] : std::vector<std::pair<std::string, double>>{
           {"node", 2}, {"cusp", 2}, {"cone_over_plane_curve_2", 0}, {"cone_over_plane_curve_3", -3}}) {
    const auto rs = find(doc, "euler", n, "Eu");
    c3.check(rs.size() == 1, n + " euler report present");
    if (rs.size() != 1) continue;
    const double v = rs[0]["rhs"], sig = combined_sigma(rs[0]);
    c3.check(std::abs(v - eu) <= std::max(0.02 * (1.0 + std::abs(eu)), 3.0 * sig),
             n + fmt(" Eu %.4f vs %g (sigma %.4f)", v, eu, sig));
    const double t = t_of(n, "local-gb") + t_of(n, "euler");
    c3.check(t < 300.0, n + fmt(" time %.1f s < 300 s", t));
    c3.note(n + fmt(" %.4f +- %.4f in %.1f s", v, sig, t));
  }

  // 4. Sullivan
  int odd = 0;
  for (const auto& n : builtin_germs()) {
    for (const auto& r : find(doc, "sullivan", n)) {
      const double v = r["lhs"], sig = combined_sigma(r);
      c4.check(std::abs(v) <= std::max(0.02, 3.0 * sig),
               n + " " + r.value("function", "") + fmt(" %.5f (sigma %.4f)", v, sig));
      ++odd;
    }
  }
  c4.check(odd > 0, "odd-k limits reported");
  c4.note(std::to_string(odd) + " odd-k limits");

  // 5. polar invariants
  {
    const std::string pn = (dir / "polar_node.json").string(), ps = (dir / "polar_line.json").string();
    const Run a = run_cli("polar --space node --seed 7", pn, (dir / "polar_node.err").string());
    const Run b = run_cli("polar --space smooth_line --seed 7", ps, (dir / "polar_line.err").string());
    c5.check(a.status == 0 && b.status == 0, "polar commands exit 0");
    const json jn = load_json_file(pn), jl = load_json_file(ps);
    std::map<int, json> sn, sl;
    if (jn.contains("results"))
      for (const auto& e : jn["results"]) sn[e["k"].get<int>()] = e;
    if (jl.contains("results"))
      for (const auto& e : jl["results"]) sl[e["k"].get<int>()] = e;
    for (int k : {1, 2}) {
      const bool have = sn.count(k) > 0;
      c5.check(have, fmt("node sigma_%g present", k));
      if (!have) continue;
      const double s = sn[k]["sigma"], e = sn[k]["stderr"];
      c5.check(std::abs(s - 2.0) <= std::max(1e-12, 3.0 * e), fmt("node sigma_%g = %.4f +- %.4f", k, s, e));
      c5.note(fmt("node sigma_%g = %.4f +- %.4f", k, s, e) + " (" + sn[k].value("method", "") + ")");
    }
    const auto lg = find(doc, "local-gb", "node");
    if (sn.count(2) && sn.count(3) && lg.size() == 1) {
      double le = 0.0;
      const double lim = term(lg[0], "k=2", &le);
      const double diff = sn[2]["sigma"].get<double>() - sn[3]["sigma"].get<double>();
      const double de = std::hypot(sn[2]["stderr"].get<double>(), sn[3]["stderr"].get<double>());
      c5.check(std::abs(diff - 2.0) <= std::max(0.02, 3.0 * de), fmt("sigma_2 - sigma_3 = %.4f", diff));
      c5.check(std::abs(lim - 2.0) <= std::max(0.02, 3.0 * le), fmt("lim Lambda_2/(b_2 eps^2) = %.4f", lim));
      c5.note(fmt("sigma_2 - sigma_3 = %.4f, lim = %.4f", diff, lim));
    } else {
      c5.check(false, "node sigma_2, sigma_3 and Lambda_2 limit present");
    }
    const std::vector<double> pattern{1, 1, 1, 0, 0};
    std::string got;
    for (int k = 0; k <= 4; ++k) {
      const bool have = sl.count(k) > 0;
      const double s = have ? sl[k]["sigma"].get<double>() : NAN;
      c5.check(have && std::abs(s - pattern[k]) < 1e-9, fmt("smooth_line sigma_%g = %g", k, s));
      got += (k ? "," : "") + fmt("%g", s);
    }
    c5.note("smooth_line {" + got + "}");
  }

  // 6. Morse identity
  for (const auto& n : {"node", "cusp", "three_lines", "cone_over_plane_curve_2"}) {
    const auto rs = find(doc, "morse", n);
    c6.check(rs.size() >= 2, std::string(n) + " two eps values");
    for (const auto& r : rs) {
      const double dirs = r["lhs"], ok = r["rhs"];
      c6.check(dirs >= 20 && ok == dirs,
               std::string(n) + " " + r.value("function", "") + fmt(" %g/%g exact", ok, dirs));
    }
    const double t = t_of(n, "morse");
    c6.check(t < 120.0, std::string(n) + fmt(" time %.1f s < 120 s", t));
    c6.note(std::string(n) + fmt(" %g eps values in %.1f s", static_cast<double>(rs.size()), t));
  }

  // 7. Fu
  for (const auto& [n, eu] : std::vector<std::pair<std::string, double>>{
           {"node", 2}, {"cusp", 2}, {"cone_over_plane_curve_2", 0}}) {
    const auto rs = find(doc, "fu", n);
    c7.check(rs.size() == 1, n + " fu report present");
    if (rs.size() != 1) continue;
    const double v = rs[0]["rhs"], sig = combined_sigma(rs[0]);
    c7.check(std::abs(v - eu) <= std::max(0.02 * (1.0 + std::abs(eu)), 3.0 * sig),
             n + fmt(" %.4f vs %g (sigma %.4f)", v, eu, sig));
    c7.note(n + fmt(" %.4f +- %.4f", v, sig));
  }

  // 8. global identities
  {
    const auto p = find(doc, "global-gb", "parabola_global");
    const auto q = find(doc, "global-gb", "nodal_cubic_global");
    c8.check(p.size() == 1 && q.size() == 1, "global-gb reports present");
    if (p.size() == 1) {
      const double v = p[0]["rhs"];
      c8.check(std::abs(v - 1.0) <= 0.02, fmt("parabola sum %.5f", v));
      c8.note(fmt("parabola %.5f", v));
    }
    if (q.size() == 1) {
      const double v = q[0]["rhs"];
      c8.check(std::abs(v) <= 0.03, fmt("nodal_cubic sum %.5f", v));
      c8.note(fmt("nodal_cubic %.5f", v));
    }
    for (const auto& n : {"parabola_global", "nodal_cubic_global"}) {
      const auto e = find(doc, "global-euler", n);
      c8.check(e.size() == 1, std::string(n) + " global-euler present");
      if (e.size() != 1) continue;
      const double v = e[0]["rhs"];
      c8.check(std::abs(v - 1.0) <= 0.05, std::string(n) + fmt(" global Eu %.5f", v));
      c8.note(std::string(n) + fmt(" Eu %.5f", v));
      const auto b = find(doc, "bdk-global", n);
      c8.check(!b.empty(), std::string(n) + " bdk-global present");
      for (const auto& r : b)
        c8.check(r["lhs"] == r["rhs"], std::string(n) + " bdk-global " + r.value("function", ""));
    }
  }

  // 9. determinism
  {
    const std::string a = slurp(out1), b = slurp(out8);
    c9.check(!a.empty(), "output present");
    c9.check(a == b, "1-thread and 8-thread outputs byte-identical");
    c9.note(std::to_string(a.size()) + " bytes");
  }

  // 10. total time and overall status
  {
    const double t = std::min(r1.seconds, r8.seconds);
    c10.check(r1.status == 0 && r8.status == 0, "verify all exit status 0");
    c10.check(t < 900.0, fmt("verify all %.1f s < 900 s", t));
    c10.note(fmt("1 thread %.1f s, 8 threads %.1f s, %g hardware threads", r1.seconds, r8.seconds,
                 static_cast<double>(std::thread::hardware_concurrency())));
  }

  bool all = true;
  for (const auto& c : cs) {
    std::string detail;
    for (const auto& n : c.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("criterion %2d: %s  %s\n", c.id, c.pass ? "PASS" : "FAIL", detail.c_str());
    all = all && c.pass;
  }
  return all ? 0 : 1;
}
