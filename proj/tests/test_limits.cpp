#include <doctest.h>

#include "lkcurv/limits.hpp"

using namespace lkcurv;

namespace {
const CurvatureEngine& node_engine() {
  static const CurvatureEngine eng = [] {
    SamplingConfig c;
    c.points = 2048;
    c.directions = 32;
    c.seed = 2;
    return CurvatureEngine(builtin("node"), c, 0.4, 6);
  }();
  return eng;
}
}  // namespace

TEST_CASE("ladder parsing") {
  const auto l = parse_ladder("0.3:7");
  CHECK(l.start == doctest::Approx(0.3));
  CHECK(l.count == 7);
  CHECK_THROWS_AS(parse_ladder("0.4:4"), std::invalid_argument);
  CHECK_THROWS_AS(parse_ladder("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_ladder("-1:6"), std::invalid_argument);
  CHECK(default_ladder(SpaceKind::germ).count == 8);
  CHECK(default_ladder(SpaceKind::global).start == doctest::Approx(4.0));
}

TEST_CASE("decide applies the larger of the two bounds") {
  IdentityReport r;
  r.lhs = 1.03;
  r.rhs = 1.0;
  r.tol = {0.02, 0.0, 3.0};
  r.lhs_error = 0.005;
  decide(r);
  CHECK_FALSE(r.pass);
  CHECK(r.tolerance == doctest::Approx(0.02));
  r.lhs_error = 0.011;
  decide(r);
  CHECK(r.pass);
  CHECK(r.tolerance == doctest::Approx(0.033));
}

TEST_CASE("node limits") {
  const auto& eng = node_engine();
  const auto lim = scaled_limits(eng, {0, 1, 2});
  CHECK(lim.at(2).value == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(std::abs(lim.at(1).value) < 0.02);
  CHECK(lim.at(0).value == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(verify_local_gb(eng).pass);
  for (const auto& r : verify_sullivan(eng)) CHECK(r.pass);
  const auto eu = euler_obstruction_via_curvature(eng);
  CHECK(eu.report.pass);
  CHECK(eu.estimate.value == doctest::Approx(2.0).epsilon(0.02));
  const auto& sp = eng.space();
  CHECK(verify_main_theorem(eng, indicator_ambient(sp), "1_X").pass);
  CHECK(verify_main_theorem(eng, euler_obstruction(sp), "Eu").pass);
  const auto l = stratum_curvature_limit(eng, sp.index_of("L1"), 1);
  CHECK(l.value == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("global identities on the parabola") {
  SamplingConfig c;
  c.points = 2048;
  c.directions = 32;
  const auto sp = builtin("parabola_global");
  const auto l = default_ladder(SpaceKind::global);
  CurvatureEngine eng(sp, c, l.start, l.count);
  const auto gb = verify_global(eng, GlobalVariant::gb);
  CHECK(gb.pass);
  CHECK(gb.lhs == 1.0);
  CHECK(gb.rhs == doctest::Approx(1.0).epsilon(0.02));
  CHECK(verify_global(eng, GlobalVariant::euler).pass);
}
