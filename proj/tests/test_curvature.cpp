#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lkcurv/curvature.hpp"

using namespace lkcurv;

namespace {

SamplingConfig small_cfg() {
  SamplingConfig c;
  c.points = 2048;
  c.directions = 32;
  c.seed = 1;
  return c;
}

// rho > 0 with rho^6 + rho^4 = e^2
double cusp_rho(double e) {
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (std::pow(m, 6) + std::pow(m, 4) < e * e ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("second fundamental form of a flat line vanishes") {
  const auto sp = builtin("node");
  const int l1 = sp.index_of("L1");
  VectorXd u(2);
  u << 0.1, 0.05;
  const auto f = local_frame(*sp.strata[l1].charts[0], u);
  CHECK(f.tangent.cols() == 2);
  CHECK(f.normal.cols() == 2);
  CHECK((f.tangent.transpose() * f.normal).norm() < 1e-12);
  CHECK(second_fundamental_form(f, f.normal.col(0)).norm() < 1e-9);
}

TEST_CASE("cusp area matches the radial quadrature") {
  const auto sp = builtin("cusp");
  CurvatureEngine eng(sp, small_cfg(), 0.4, 5);
  const auto pts = eng.stratum_series(sp.index_of("C"), 2).points();
  REQUIRE(pts.size() == 5);
  for (const auto& p : pts) {
    const double r = cusp_rho(p.scale);
    // area of t -> (t^3, t^2) over |t| < r: int 2 pi rho (9 rho^4 + 4 rho^2) d rho
    const double area = std::numbers::pi * (3.0 * std::pow(r, 6) + 2.0 * std::pow(r, 4));
    CAPTURE(p.scale);
    CHECK(std::abs(p.value - area) <= std::max(4.0 * p.std_error, 1e-3 * area));
  }
}

TEST_CASE("node area and top curvature") {
  const auto sp = builtin("node");
  CurvatureEngine eng(sp, small_cfg(), 0.4, 5);
  const auto ser = eng.measure(2);
  for (const auto& p : ser.values) {
    const double area = 2.0 * std::numbers::pi * p.scale * p.scale;
    CHECK(p.value == doctest::Approx(area).epsilon(1e-3));
  }
  for (const auto& p : eng.measure(1).values) CHECK(std::abs(p.value) <= 4.0 * p.std_error + 1e-12);
}

TEST_CASE("stratum weights") {
  const auto node = builtin("node");
  CHECK(stratum_weight(node, node.index_of("L1")) == 1.0);
  CHECK(stratum_weight(node, node.index_of("V0")) == -1.0);
  const auto rc = builtin("real_cone");
  CHECK(stratum_weight(rc, rc.index_of("N+")) == 1.0);
}
