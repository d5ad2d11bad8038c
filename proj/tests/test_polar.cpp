#include <doctest.h>

#include "lkcurv/polar.hpp"

using namespace lkcurv;

TEST_CASE("node slice points match a linear solve per branch") {
  const auto sp = builtin("node");
  Rng rng(mix_key(4, "slice"), 0);
  int nonempty = 0;
  for (int trial = 0; trial < 12; ++trial) {
    SliceSpec s;
    const MatrixXd frame = sample_grassmannian(4, 4, rng);
    s.h = frame.leftCols(2);
    s.v = frame.col(2);
    s.eps = 1.0;
    s.delta = 0.3 * rng.uniform();
    int expected = 0;
    for (int b = 0; b < 2; ++b) {
      // branch b is the real plane spanned by e_{2b}, e_{2b+1}
      MatrixXd basis = MatrixXd::Zero(4, 2);
      basis(2 * b, 0) = 1.0;
      basis(2 * b + 1, 1) = 1.0;
      MatrixXd a(4, 4);
      a << basis, -s.h;
      const VectorXd sol = a.fullPivLu().solve(s.delta * s.v);
      if ((basis * sol.head(2)).norm() < s.eps) ++expected;
    }
    const auto pts = slice_points(sp, s, 64, trial);
    CAPTURE(trial);
    CHECK(static_cast<int>(pts.size()) == expected);
    for (const auto& p : pts) CHECK((s.h.transpose() * p).size() == 2);
    nonempty += expected > 0;
  }
  CHECK(nonempty > 0);
}

TEST_CASE("polar invariants") {
  PolarConfig cfg;
  cfg.samples = 64;
  cfg.seed = 3;
  const auto node2 = sigma(builtin("node"), 2, cfg);
  CHECK(node2.method == "point-count");
  CHECK(std::abs(node2.sigma - 2.0) <= std::max(0.02, 3.0 * node2.std_error));
  const std::vector<double> pattern{1, 1, 1, 0, 0};
  const auto line = builtin("smooth_line");
  for (int k = 0; k <= 4; ++k) {
    CAPTURE(k);
    CHECK(sigma(line, k, cfg).sigma == doctest::Approx(pattern[k]));
  }
  CHECK(verify_polar_pairing(builtin("node"), 1, cfg).pass);
}
