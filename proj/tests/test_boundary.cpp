#include <doctest.h>

#include <cmath>

#include "lkcurv/boundary.hpp"

using namespace lkcurv;

namespace {

StratifiedSpace flat_disk() {
  StratifiedSpace sp;
  sp.name = "disk";
  sp.ambient_real_dim = 2;
  Stratum d;
  d.id = "D";
  d.real_dim = 2;
  d.is_complex = false;
  d.alpha = 1.0;
  d.charts.push_back(std::make_shared<FunctionChart>(
      2, 2, [](const VectorXd& u) { return u; }, [](const VectorXd&) { return MatrixXd::Identity(2, 2); },
      [](const VectorXd&) { return std::vector<MatrixXd>(2, MatrixXd::Zero(2, 2)); }, 1, 1.0));
  sp.strata.push_back(d);
  sp.finalize();
  return sp;
}

}  // namespace

TEST_CASE("boundary measure of a flat disk is 1") {
  SamplingConfig c;
  c.points = 512;
  c.directions = 16;
  const auto m = boundary_gb_measure(flat_disk(), 0.3, c);
  CHECK(m.total == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("boundary measure of the node") {
  SamplingConfig c;
  c.points = 1024;
  c.directions = 32;
  const auto m = boundary_gb_measure(builtin("node"), 0.1, c);
  CHECK(std::abs(m.total - 2.0) <= std::max(0.02, 3.0 * m.total_error));
  CHECK_THROWS(boundary_gb_measure(builtin("node"), 0.9, c));
}

TEST_CASE("Morse critical points on the node") {
  const auto sp = builtin("node");
  const double eps = 1e-3;
  for (const auto& v : morse_directions(sp, 5, 11)) {
    const auto r = morse_identity(sp, v, eps);
    CHECK(r.pass);
    CHECK_FALSE(r.incomplete);
    CHECK(r.index_at_origin == doctest::Approx(-1.0));
    CHECK(r.identity_lhs == doctest::Approx(1.0));
    REQUIRE(r.critical_points.size() == 4);
    int inward = 0;
    for (const auto& p : r.critical_points) {
      CHECK(p.position.norm() == doctest::Approx(eps).epsilon(1e-6));
      // on branch b the critical points are +-eps times the unit projection of v
      const int b = std::abs(p.position[0]) + std::abs(p.position[1]) > 0.0 ? 0 : 1;
      VectorXd proj = VectorXd::Zero(4);
      proj.segment(2 * b, 2) = v.segment(2 * b, 2);
      proj *= eps / proj.norm();
      CHECK(std::min((p.position - proj).norm(), (p.position + proj).norm()) < 1e-9);
      inward += p.inward;
    }
    CHECK(inward == 2);
  }
}
