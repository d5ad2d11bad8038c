#include <doctest.h>

#include <cmath>

#include "lkcurv/variety.hpp"

using namespace lkcurv;

TEST_CASE("every builtin validates") {
  for (const auto& n : builtin_names()) {
    CAPTURE(n);
    const auto sp = builtin(n);
    const auto rep = validate(sp);
    CHECK_MESSAGE(rep.ok(), rep.summary());
  }
  CHECK(builtin("quadric_cone").name == "cone_over_plane_curve_2");
  CHECK(builtin("cone_over_plane_curve(3)").name == "cone_over_plane_curve_3");
  CHECK_THROWS_AS(builtin("no_such_space"), LookupError);
}

TEST_CASE("polynomial parsing and evaluation") {
  const auto p = parse_poly("3*x0^2*x1 - 2i*x1 + 1", 2);
  const std::vector<cplx> z{cplx(1.0, 1.0), cplx(2.0, 0.0)};
  const cplx expect = 3.0 * z[0] * z[0] * z[1] - cplx(0.0, 2.0) * z[1] + 1.0;
  CHECK(std::abs(p.eval(z) - expect) < 1e-12);
  CHECK(p.degree() == 3);
  const auto g = p.gradient(z);
  CHECK(std::abs(g[0] - 6.0 * z[0] * z[1]) < 1e-12);
  CHECK(std::abs(g[1] - (3.0 * z[0] * z[0] - cplx(0.0, 2.0))) < 1e-12);
  CHECK_THROWS(parse_poly("x5", 2));
}

TEST_CASE("structure of the node") {
  const auto sp = builtin("node");
  CHECK(sp.dim() == 2);
  CHECK(sp.is_complex());
  CHECK(sp.minimal_index() == sp.index_of("V0"));
  CHECK(sp.below(sp.index_of("V0"), sp.index_of("L1")));
  CHECK_FALSE(sp.below(sp.index_of("L1"), sp.index_of("L2")));
  CHECK(sp.maximal().size() == 2);
  CHECK(sp.chi(sp.index_of("V0"), kAmbient) == 2);
}

TEST_CASE("charts land on their variety") {
  Rng rng(5, 0);
  const auto cusp = builtin("cusp");
  const auto& chart = *cusp.strata[cusp.index_of("C")].charts.at(0);
  for (int i = 0; i < 10; ++i) {
    const auto s = chart.sample_shell(rng, 0.1, 0.2, i, 10);
    if (s.weight == 0.0) continue;
    const auto z = to_complex(chart.map(s.u));
    CHECK(std::abs(z[0] * z[0] - z[1] * z[1] * z[1]) < 1e-10);
    const double r = chart.map(s.u).norm();
    CHECK((r >= 0.1 - 1e-12 && r < 0.2 + 1e-12));
  }
  const auto cone = builtin("cubic_cone");
  const auto& top = cone.strata[cone.index_of("V1")];
  int landed = 0;
  for (const auto& c : top.charts) {
    for (int i = 0; i < 5; ++i) {
      const auto s = c->sample_sphere(rng, 0.3, i, 5);
      if (s.weight == 0.0) continue;
      const VectorXd x = c->map(s.u);
      const auto z = to_complex(x);
      CHECK(x.norm() == doctest::Approx(0.3).epsilon(1e-8));
      CHECK(std::abs(z[0] * z[0] * z[0] + z[1] * z[1] * z[1] + z[2] * z[2] * z[2]) < 1e-9);
      ++landed;
    }
  }
  CHECK(landed > 0);
}

TEST_CASE("analytic and finite-difference jacobians agree") {
  const auto sp = builtin("cubic_cone");
  const auto& c = *sp.strata[sp.index_of("V1")].charts.at(0);
  Rng rng(9, 0);
  ChartSample s;
  do s = c.sample_shell(rng, 0.2, 0.4, 0, 1);
  while (s.weight == 0.0);
  const MatrixXd j = c.jacobian(s.u);
  MatrixXd fd(j.rows(), j.cols());
  for (int k = 0; k < s.u.size(); ++k) {
    VectorXd a = s.u, b = s.u;
    const double h = 1e-6;
    a[k] += h;
    b[k] -= h;
    fd.col(k) = (c.map(a) - c.map(b)) / (2 * h);
  }
  CHECK((j - fd).norm() < 1e-5 * (1.0 + j.norm()));
}

TEST_CASE("variety json files") {
  const auto sp = load(LKCURV_DATA_DIR "/node.json");
  CHECK(sp.name == "node_file");
  CHECK(validate(sp).ok());
  CHECK(sp.chi(sp.index_of("V0"), kAmbient) == 2);
  REQUIRE(sp.annotation("eu").has_value());
  CHECK(sp.annotation("eu")->value() == 2.0);

  const std::string missing_link = R"({
    "name": "bad", "kind": "germ", "ambient_real_dim": 4,
    "strata": [{"id": "V0", "real_dim": 0, "point": [0,0,0,0]},
               {"id": "L", "real_dim": 2, "charts": [{"type": "explicit", "params": 1, "components": ["x0", "0"]}]}],
    "closure_order": [["V0", "L"]],
    "link_table": [["V0", "X", 1]]
  })";
  bool rejected = false;
  try {
    const auto bad = load_json(missing_link);
    rejected = !validate(bad).ok();
  } catch (const SchemaError&) {
    rejected = true;
  } catch (const ValidationError&) {
    rejected = true;
  }
  CHECK(rejected);
  CHECK_THROWS_AS(load_json("{\"name\": 3}"), SchemaError);
  CHECK_THROWS_AS(load_json("not json"), SchemaError);
}

TEST_CASE("annotations parse as rationals") {
  const auto a = parse_rational("-3/4");
  CHECK(a.num == -3);
  CHECK(a.den == 4);
  CHECK(a.value() == doctest::Approx(-0.75));
  CHECK(parse_rational("5").value() == 5.0);
}

TEST_CASE("restriction to a closure") {
  const auto sp = restrict_to_closure(builtin("node"), "L1");
  CHECK(sp.size() == 2);
  CHECK(validate(sp).ok());
}
