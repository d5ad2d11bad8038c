#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "lkcurv/mathkit.hpp"

using namespace lkcurv;

TEST_CASE("ball and sphere volumes") {
  const double pi = std::numbers::pi;
  CHECK(ball_volume(0) == doctest::Approx(1.0));
  CHECK(ball_volume(1) == doctest::Approx(2.0));
  CHECK(ball_volume(2) == doctest::Approx(pi));
  CHECK(ball_volume(3) == doctest::Approx(4.0 * pi / 3.0));
  CHECK(ball_volume(4) == doctest::Approx(pi * pi / 2.0));
  CHECK(sphere_volume(0) == doctest::Approx(2.0));
  CHECK(sphere_volume(1) == doctest::Approx(2.0 * pi));
  CHECK(sphere_volume(2) == doctest::Approx(4.0 * pi));
  CHECK(sphere_volume(3) == doctest::Approx(2.0 * pi * pi));
  VolumeTable t(10);
  for (int k = 0; k < 10; ++k) {
    CHECK(t.ball(k) == doctest::Approx(std::pow(pi, k / 2.0) / std::tgamma(k / 2.0 + 1.0)));
    CHECK(t.sphere(k) == doctest::Approx((k + 1) * t.ball(k + 1)));
  }
}

TEST_CASE("elementary symmetric polynomials") {
  const std::vector<double> e{1.0, 2.0, 3.0};
  CHECK(elementary_symmetric(e, 0) == 1.0);
  CHECK(elementary_symmetric(e, 1) == doctest::Approx(6.0));
  CHECK(elementary_symmetric(e, 2) == doctest::Approx(11.0));
  CHECK(elementary_symmetric(e, 3) == doctest::Approx(6.0));
  CHECK_THROWS_AS(elementary_symmetric(e, 4), std::domain_error);
}

TEST_CASE("Jacobi eigenvalues agree with Eigen") {
  Rng rng(mix_key(3, "jacobi"), 0);
  for (int n : {1, 2, 5, 9}) {
    MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    const MatrixXd m = a + a.transpose();
    const auto ours = symmetric_eigenvalues(m);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    REQUIRE(ours.size() == static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) CHECK(ours[i] == doctest::Approx(es.eigenvalues()[i]).epsilon(1e-9));
  }
  MatrixXd bad(2, 2);
  bad << 1, 2, 3, 4;
  CHECK_THROWS_AS(symmetric_eigenvalues(bad), ShapeError);
  CHECK_THROWS_AS(symmetric_eigenvalues(MatrixXd(2, 3)), ShapeError);
}

TEST_CASE("counter-based rng is reproducible") {
  Rng a(mix_key(7, "x"), 5), b(mix_key(7, "x"), 5), c(mix_key(7, "x"), 6);
  for (int i = 0; i < 10; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
  CHECK(mix_key(1, "a") != mix_key(1, "b"));
  Rng u(11, 0);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    mean += x / n;
  }
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sphere and grassmannian samples") {
  Rng rng(19, 1);
  for (int i = 0; i < 20; ++i) CHECK(sample_sphere(5, rng).norm() == doctest::Approx(1.0));
  const MatrixXd q = sample_grassmannian(6, 3, rng);
  CHECK((q.transpose() * q - MatrixXd::Identity(3, 3)).norm() < 1e-12);
  const MatrixXd c = orthogonal_complement(q);
  CHECK(c.cols() == 3);
  CHECK((q.transpose() * c).norm() < 1e-12);
  CHECK((c.transpose() * c - MatrixXd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("extrapolation recovers a quadratic") {
  std::vector<SeriesPoint> s;
  for (double e : {0.4, 0.2, 0.1, 0.05, 0.025}) s.push_back({e, 1.5 - 2.0 * e + 0.7 * e * e, 1e-3});
  const auto est = extrapolate_limit(s);
  CHECK(est.value == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(est.residual < 1e-9);
  CHECK(est.std_error > 0.0);
  std::vector<SeriesPoint> g;
  for (double r : {4.0, 8.0, 16.0, 32.0, 64.0}) g.push_back({r, -1.0 + 3.0 / r, 1e-3});
  CHECK(extrapolate_limit(g, LadderKind::grow).value == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK_THROWS_AS(extrapolate_limit(s, MatrixXd::Identity(2, 2)), ShapeError);
}

TEST_CASE("ladders") {
  const auto l = EpsilonLadder::geometric(0.4, 5, 0.5);
  REQUIRE(l.values.size() == 5);
  CHECK(l.values[4] == doctest::Approx(0.025));
  CHECK_NOTHROW(l.check());
}

TEST_CASE("real polynomial roots") {
  // (x - 1)(x + 2)(x - 3) = x^3 - 2x^2 - 5x + 6
  const std::vector<double> c{6.0, -5.0, -2.0, 1.0};
  const auto r = poly_real_roots(c, -10.0, 10.0);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-2.0));
  CHECK(r[1] == doctest::Approx(1.0));
  CHECK(r[2] == doctest::Approx(3.0));
  CHECK(poly_real_roots(c, 0.0, 2.0).size() == 1);
  CHECK(poly_eval(c, 2.0) == doctest::Approx(-4.0));
  const std::vector<double> none{1.0, 0.0, 1.0};
  CHECK(poly_real_roots(none, -5.0, 5.0).empty());
}

TEST_CASE("parallel_for visits every index once") {
  for (int t : {1, 4}) {
    set_thread_count(t);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  set_thread_count(1);
}
