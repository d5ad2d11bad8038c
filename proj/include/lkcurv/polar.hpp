#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lkcurv/limits.hpp"

namespace lkcurv {

struct UnsupportedSliceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StabilizationError : std::runtime_error {
  StabilizationError(const std::string& what, MatrixXd h, VectorXd v)
      : std::runtime_error(what), h_frame(std::move(h)), v(std::move(v)) {}
  MatrixXd h_frame;
  VectorXd v;
};

/// Affine slice H + delta v, intersected with the ball of radius eps.
struct SliceSpec {
  MatrixXd h;  // N x (N - k), orthonormal
  VectorXd v;  // unit, orthogonal to H
  double delta = 0.0;
  double eps = 0.0;
};

struct PolarConfig {
  std::size_t samples = 256;
  std::size_t seeds = 64;  // Newton starts per slice
  double eps = 0.02;
  std::vector<double> delta_factors{1e-2, 5e-3, 2.5e-3};
  int max_extra_halvings = 8;
  std::uint64_t seed = 0;
};

/// chi(X cap (H + delta v) cap B_eps).
int slice_euler_characteristic(const StratifiedSpace& space, const SliceSpec& slice,
                               std::size_t seeds = 64, std::uint64_t seed = 0);

/// Distinct points of X cap (H + delta v) cap B_eps for 0-dimensional slices.
std::vector<VectorXd> slice_points(const StratifiedSpace& space, const SliceSpec& slice, std::size_t seeds,
                                   std::uint64_t seed);

struct PolarEstimate {
  int k = 0;
  double sigma = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::string method;  // convention | empty | point-count | oracle
  std::vector<double> delta_ladder;
  double eps = 0.0;
  std::vector<int> draws;  // stabilized chi per draw (point-count only)
};

PolarEstimate sigma(const StratifiedSpace& space, int k, const PolarConfig& cfg = {});

/// lim Lambda_k / (b_k eps^k) against sigma_k - sigma_{k+1}.
IdentityReport verify_curv_polar(const CurvatureEngine& eng, int k, const PolarConfig& cfg = {},
                                 const Tolerance& tol = default_tolerance("polar"));

/// sigma_{2e-1} = sigma_{2e} on complex germs.
IdentityReport verify_polar_pairing(const StratifiedSpace& space, int e, const PolarConfig& cfg = {},
                                    const Tolerance& tol = default_tolerance("polar"));

}  // namespace lkcurv
