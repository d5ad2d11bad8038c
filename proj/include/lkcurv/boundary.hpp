#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lkcurv/limits.hpp"

namespace lkcurv {

struct IncompleteSearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lambda_0(X cap B_eps, V_i cap S_eps) per stratum, and their sum.
struct BoundaryMeasure {
  double eps = 0.0;
  std::map<std::string, DensityValue> per_stratum;
  double total = 0.0;
  double total_error = 0.0;
};

/// Sphere-boundary contribution of one stratum, with index weight alpha_i
/// times the inward indicator.
DensityValue stratum_boundary_measure(const StratifiedSpace& space, int i, double eps, double alpha,
                                      const SamplingConfig& cfg);

BoundaryMeasure boundary_gb_measure(const StratifiedSpace& space, double eps, const SamplingConfig& cfg = {});

/// Boundary measure restricted to the top strata, over the ladder.
std::vector<SeriesPoint> fu_series(const StratifiedSpace& space, const LadderSpec& ladder,
                                   const SamplingConfig& cfg = {});

IdentityReport verify_fu(const StratifiedSpace& space, const LadderSpec& ladder, const SamplingConfig& cfg = {},
                         const Tolerance& tol = default_tolerance("fu"));

/// lim Lambda_0(closure(V_i) cap B_eps, V_i cap S_eps) against the curvature
/// limits of V_i (or 1 for a positive-dimensional V_0).
IdentityReport verify_boundary_limits(const CurvatureEngine& eng, int i, const LadderSpec& ladder,
                                      const SamplingConfig& cfg = {},
                                      const Tolerance& tol = default_tolerance("boundary"));

struct CriticalPoint {
  VectorXd position;
  std::string stratum;
  double lambda = 0.0;
  int morse_index = 0;
  double normal_index = 0.0;
  bool inward = false;
};

struct MorseConfig {
  std::size_t seeds = 128;  // Newton starts per (stratum, v)
  int max_resamples = 16;
  std::uint64_t seed = 0;
};

struct MorseReport {
  VectorXd v;
  double eps = 0.0;
  int resamples = 0;
  std::vector<CriticalPoint> critical_points;
  double index_at_origin = 0.0;
  double inward_sum = 0.0;
  double identity_lhs = 0.0;
  double identity_rhs = 0.0;
  bool incomplete = false;
  bool pass = false;
};

/// chi(X cap B_eps) = ind(v*, X, 0) + sum over inward critical points of
/// v* on X cap S_eps of (-1)^sigma(p) ind_nor.
MorseReport morse_identity(const StratifiedSpace& space, const VectorXd& v, double eps, const MorseConfig& cfg = {});

/// Haar mean over v of the inward sums against the boundary measure.
IdentityReport mean_boundary_identity(const StratifiedSpace& space, double eps, std::size_t n_directions,
                                      const SamplingConfig& cfg = {}, const MorseConfig& mcfg = {},
                                      const Tolerance& tol = default_tolerance("mean-boundary"));

/// Random unit directions for Morse runs, deterministic in seed.
std::vector<VectorXd> morse_directions(const StratifiedSpace& space, std::size_t n, std::uint64_t seed);

}  // namespace lkcurv
