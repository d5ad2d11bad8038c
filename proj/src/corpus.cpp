#include <cmath>

#include "lkcurv/variety.hpp"

namespace lkcurv {

namespace {

ComplexPoly P(const std::string& text, int nvars) { return parse_poly(text, nvars); }

ChartPtr poly_chart(std::vector<std::string> comps, int params, int sheets = 1,
                    std::vector<cplx> center = {}, PolynomialChart::Predicate accept = {}) {
  std::vector<ComplexPoly> ps;
  for (const auto& c : comps) ps.push_back(P(c, params));
  return std::make_shared<PolynomialChart>(std::move(ps), sheets, std::move(center), std::move(accept));
}

Stratum point_stratum(const std::string& id, int ambient) {
  Stratum s;
  s.id = id;
  s.real_dim = 0;
  s.is_complex = true;
  s.point = VectorXd::Zero(ambient);
  return s;
}

Stratum curve(const std::string& id, std::vector<ChartPtr> charts) {
  Stratum s;
  s.id = id;
  s.real_dim = charts.front()->dim();
  s.is_complex = true;
  s.charts = std::move(charts);
  return s;
}

void note(StratifiedSpace& sp, const std::string& key, const std::string& value,
          const std::string& derivation) {
  sp.oracle[key] = parse_rational(value, derivation);
}

// Germ whose strata are {0} and branches through 0, all with chi(L_0 cap branch) = 1
// except where given.
StratifiedSpace point_and_branches(const std::string& name, int ambient,
                                   std::vector<Stratum> branches, int chi_total) {
  StratifiedSpace sp;
  sp.name = name;
  sp.ambient_real_dim = ambient;
  sp.kind = SpaceKind::germ;
  sp.strata.push_back(point_stratum("V0", ambient));
  for (auto& b : branches) sp.strata.push_back(std::move(b));
  for (int i = 1; i < static_cast<int>(sp.size()); ++i) {
    sp.closure_pairs.emplace_back(0, i);
    sp.chi_link[{i, kAmbient}] = 0;
  }
  sp.chi_link[{0, kAmbient}] = chi_total;
  return sp;
}

StratifiedSpace smooth_line() {
  StratifiedSpace sp;
  sp.name = "smooth_line";
  sp.ambient_real_dim = 4;
  sp.kind = SpaceKind::germ;
  sp.strata.push_back(curve("L", {poly_chart({"x0", "0"}, 1)}));
  sp.chi_link[{0, kAmbient}] = 0;
  note(sp, "eu", "1", "smooth germ");
  note(sp, "lelong", "1", "smooth germ");
  note(sp, "chi_ball", "1", "contractible germ");
  note(sp, "chi_slice_codim_1", "1", "a real hyperplane meets a disk in a segment");
  sp.finalize();
  return sp;
}

StratifiedSpace node() {
  auto sp = point_and_branches("node", 4,
                               {curve("L1", {poly_chart({"x0", "0"}, 1)}),
                                curve("L2", {poly_chart({"0", "x0"}, 1)})},
                               2);
  sp.chi_link[{0, 1}] = 1;
  sp.chi_link[{0, 2}] = 1;
  note(sp, "eu", "2", "triangular solve of the eta system");
  note(sp, "lelong", "2", "two flat planes");
  note(sp, "chi_ball", "1", "contractible germ");
  note(sp, "chi_slice_codim_1", "2", "a generic real hyperplane cuts each plane in a segment");
  sp.finalize();
  return sp;
}

StratifiedSpace cusp() {
  auto sp = point_and_branches("cusp", 4, {curve("C", {poly_chart({"x0^3", "x0^2"}, 1)})}, 2);
  sp.chi_link[{0, 1}] = 2;
  note(sp, "eu", "2", "multiplicity of a plane curve germ");
  note(sp, "lelong", "2", "multiplicity 2");
  note(sp, "chi_ball", "1", "contractible germ");
  note(sp, "chi_slice_codim_1", "2", "generic line slice has 2 points, real slices match sigma_2");
  sp.finalize();
  return sp;
}

StratifiedSpace three_lines() {
  auto sp = point_and_branches("three_lines", 4,
                               {curve("L1", {poly_chart({"x0", "0"}, 1)}),
                                curve("L2", {poly_chart({"0", "x0"}, 1)}),
                                curve("L3", {poly_chart({"x0", "-1*x0"}, 1)})},
                               3);
  for (int i = 1; i <= 3; ++i) sp.chi_link[{0, i}] = 1;
  note(sp, "eu", "3", "triangular solve of the eta system");
  note(sp, "lelong", "3", "three flat planes");
  note(sp, "chi_ball", "1", "contractible germ");
  note(sp, "chi_slice_codim_1", "3", "a generic real hyperplane cuts each plane in a segment");
  sp.finalize();
  return sp;
}

StratifiedSpace cone(int d) {
  std::vector<ChartPtr> charts;
  if (d == 1) {
    charts.push_back(poly_chart({"x0", "x1", "0"}, 2));
  } else if (d == 2) {
    charts.push_back(poly_chart({"x0^2", "x1^2", "x0*x1"}, 2, 2));
  } else if (d == 3) {
    const ComplexPoly f = P("x0^3 + x1^3 + x2^3", 3);
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 3; ++b) charts.push_back(std::make_shared<ImplicitHypersurfaceChart>(f, c, b, true));
  } else {
    throw LookupError("cone_over_plane_curve: degree must be 1, 2 or 3");
  }
  Stratum top = curve("V1", std::move(charts));
  const int chi = 2 * d - d * d;
  auto sp = point_and_branches("cone_over_plane_curve_" + std::to_string(d), 6, {std::move(top)}, chi);
  sp.chi_link[{0, 1}] = chi;
  const std::string s = std::to_string(chi);
  const std::string from = "chi(Y) - chi(Y cap H) = (3d - d^2) - d for a smooth plane curve Y of degree d";
  note(sp, "eu", s, "1 = eta(V0, 1_X) + Eu_X(0) with " + from);
  note(sp, "lelong", std::to_string(d), "degree of the cone");
  note(sp, "chi_ball", "1", "contractible germ");
  note(sp, "chi_slice_codim_1", s, "sigma_1 = sigma_2 = 1 - (d - 1)^2 from the complex link");
  note(sp, "chi_slice_codim_2", s, "complex hyperplane slice is the complex link, " + from);
  note(sp, "chi_slice_codim_3", std::to_string(d), "sigma_3 = sigma_4 = multiplicity");
  sp.finalize();
  return sp;
}

StratifiedSpace parabola() {
  StratifiedSpace sp;
  sp.name = "parabola_global";
  sp.ambient_real_dim = 4;
  sp.kind = SpaceKind::global;
  sp.strata.push_back(curve("P", {poly_chart({"x0", "x0^2"}, 1)}));
  sp.chi_link[{0, kAmbient}] = 0;
  note(sp, "chi:P", "1", "graph of a polynomial, isomorphic to C");
  note(sp, "chi_X", "1", "isomorphic to C");
  note(sp, "eu_global", "1", "smooth, Eu(X) = chi(X)");
  note(sp, "degree", "2", "degree of the curve");
  sp.finalize();
  return sp;
}

StratifiedSpace nodal_cubic() {
  // Normalization t -> (t^2 - 1, t^3 - t); the node is at t = +-1. Two charts
  // centered on the branches split the parameter plane along Re t = 0.
  auto right = poly_chart({"x0^2 - 1", "x0^3 - x0"}, 1, 1, {cplx(1.0, 0.0)},
                          [](const std::vector<cplx>& t) { return t[0].real() > 0.0; });
  auto left = poly_chart({"x0^2 - 1", "x0^3 - x0"}, 1, 1, {cplx(-1.0, 0.0)},
                         [](const std::vector<cplx>& t) { return t[0].real() <= 0.0; });
  StratifiedSpace sp;
  sp.name = "nodal_cubic_global";
  sp.ambient_real_dim = 4;
  sp.kind = SpaceKind::global;
  sp.strata.push_back(point_stratum("V0", 4));
  sp.strata.push_back(curve("V1", {right, left}));
  sp.closure_pairs.emplace_back(0, 1);
  sp.chi_link[{0, 1}] = 2;
  sp.chi_link[{0, kAmbient}] = 2;
  sp.chi_link[{1, kAmbient}] = 0;
  note(sp, "chi:V0", "1", "a point");
  note(sp, "chi:V1", "-1", "C minus two points");
  note(sp, "chi_X", "0", "normalization C -> X identifies two points: 1 - 2 + 1");
  note(sp, "eu_global", "1", "chi(X, Eu_X) = -1 + 2");
  note(sp, "degree", "3", "degree of the curve");
  sp.infinity_decay = 2.0 / 3.0;
  sp.finalize();
  return sp;
}

StratifiedSpace real_cone() {
  auto nappe = [](double sign) {
    auto map = [sign](const VectorXd& u) {
      VectorXd x(3);
      x << u[0], u[1], sign * u.norm();
      return x;
    };
    auto jac = [sign](const VectorXd& u) {
      const double r = u.norm();
      MatrixXd j(3, 2);
      j << 1, 0, 0, 1, sign * u[0] / r, sign * u[1] / r;
      return j;
    };
    auto hess = [sign](const VectorXd& u) {
      const double r = u.norm();
      const double r3 = r * r * r;
      std::vector<MatrixXd> h(3, MatrixXd::Zero(2, 2));
      h[2] << u[1] * u[1] / r3, -u[0] * u[1] / r3, -u[0] * u[1] / r3, u[0] * u[0] / r3;
      h[2] *= sign;
      return h;
    };
    return std::make_shared<FunctionChart>(2, 3, map, jac, hess, 1, 1.0);
  };
  StratifiedSpace sp;
  sp.name = "real_cone";
  sp.ambient_real_dim = 3;
  sp.kind = SpaceKind::germ;
  Stratum v0;
  v0.id = "V0";
  v0.real_dim = 0;
  v0.is_complex = false;
  v0.point = VectorXd::Zero(3);
  // Lower half-link of the vertex: one whole circle when the plane v^perp
  // misses the cone, two arcs otherwise.
  v0.alpha_fn = [](const VectorXd&, const VectorXd& v) {
    return std::abs(v[2]) > std::sqrt(0.5) ? 1.0 : -1.0;
  };
  v0.alpha_label = "+1 if |v_z| > 1/sqrt(2) else -1";
  sp.strata.push_back(v0);
  for (double sign : {1.0, -1.0}) {
    Stratum s;
    s.id = sign > 0 ? "N+" : "N-";
    s.real_dim = 2;
    s.is_complex = false;
    s.alpha = 1.0;
    s.alpha_label = "smooth point";
    s.charts.push_back(nappe(sign));
    sp.strata.push_back(std::move(s));
  }
  sp.closure_pairs = {{0, 1}, {0, 2}};
  note(sp, "chi_ball", "1", "cone over two circles is contractible");
  sp.finalize();
  return sp;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"smooth_line",          "node",
          "cusp",                 "three_lines",
          "cone_over_plane_curve_1", "cone_over_plane_curve_2",
          "cone_over_plane_curve_3", "parabola_global",
          "nodal_cubic_global",   "real_cone"};
}

std::vector<std::string> builtin_germs() {
  std::vector<std::string> out;
  for (const auto& n : builtin_names())
    if (builtin(n).kind == SpaceKind::germ) out.push_back(n);
  return out;
}

StratifiedSpace builtin(const std::string& raw) {
  std::string name = raw;
  if (name.rfind("cone_over_plane_curve(", 0) == 0 && name.back() == ')') {
    name = "cone_over_plane_curve_" + name.substr(22, name.size() - 23);
  }
  if (name == "quadric_cone") name = "cone_over_plane_curve_2";
  if (name == "cubic_cone") name = "cone_over_plane_curve_3";
  if (name == "smooth_line") return smooth_line();
  if (name == "node") return node();
  if (name == "cusp") return cusp();
  if (name == "three_lines") return three_lines();
  if (name == "cone_over_plane_curve_1") return cone(1);
  if (name == "cone_over_plane_curve_2") return cone(2);
  if (name == "cone_over_plane_curve_3") return cone(3);
  if (name == "parabola_global") return parabola();
  if (name == "nodal_cubic_global") return nodal_cubic();
  if (name == "real_cone") return real_cone();
  throw LookupError("unknown builtin '" + raw + "'");
}

}  // namespace lkcurv
