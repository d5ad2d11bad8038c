#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lkcurv/variety.hpp"

namespace lkcurv {

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingConfig {
  std::size_t points = 4096;       // per (stratum, chart, shell)
  std::size_t directions = 64;     // normal-sphere draws, taken in antipodal pairs
  std::size_t atom_directions = 65536;
  std::size_t global_factor = 4;   // points multiplier for global spaces
  std::uint64_t seed = 0;
};

/// Orthonormal tangent/normal frame of a chart at u. J = Q R with
/// tangent = Q[:, :m], normal = Q[:, m:].
struct Frame {
  VectorXd u;
  VectorXd x;
  MatrixXd jac;
  MatrixXd tangent;
  MatrixXd normal;
  MatrixXd rinv;
  std::vector<MatrixXd> hess;  // per ambient coordinate, in the orthonormal tangent frame
  double gram = 0.0;
};

Frame local_frame(const Chart& chart, const VectorXd& u);

/// II_v in the orthonormal tangent frame of `f`.
MatrixXd second_fundamental_form(const Frame& f, const VectorXd& v);

struct SecondFundamentalForm {
  VectorXd at;
  int stratum = 0;
  VectorXd normal_direction;
  MatrixXd matrix;
};

SecondFundamentalForm second_fundamental_form(const StratifiedSpace& space, int stratum, int chart,
                                              const VectorXd& u, const VectorXd& v);

struct DensityValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// lambda_k^V(x) at chart point u, alpha included.
DensityValue lk_density(const StratifiedSpace& space, int stratum, int chart, const VectorXd& u, int k,
                        std::size_t directions, Rng& rng);

/// K_{2j}(x): full normal-sphere integral of sigma_{2j}(II_{x,v}).
DensityValue lkw_curvature(const StratifiedSpace& space, int stratum, int chart, const VectorXd& u, int j,
                           std::size_t directions, Rng& rng);

/// Weight multiplying a stratum's alpha-free densities: eta(V, 1_X) for
/// complex strata, the constant alpha for real ones, 1 when alpha varies.
double stratum_weight(const StratifiedSpace& space, int stratum);

// ---------------------------------------------------------------------------
// Series that are linear (after linearizing the geometric tails) in a set of
// independently estimated shell integrals.

struct LinearSeries {
  LadderKind kind = LadderKind::shrink;
  double decay = 1.0;
  std::vector<double> scales;
  VectorXd values;
  MatrixXd coeffs;  // points x variables
  std::shared_ptr<const MatrixXd> var_cov;

  MatrixXd covariance() const;
  std::vector<SeriesPoint> points() const;
  LinearSeries& add(double a, const LinearSeries& other);
  /// values[j] *= factor[j].
  LinearSeries& scale_points(const std::vector<double>& factor);
};

LinearSeries scaled_by_ball(LinearSeries s, int k);

struct CurvatureSeries {
  int k = 0;
  EpsilonLadder ladder;
  std::vector<SeriesPoint> values;
  std::map<std::string, std::vector<SeriesPoint>> per_stratum;
  MatrixXd covariance;
};

/// Samples every (stratum, chart, shell) once and exposes Lambda_k series
/// over the ladder for every k. Germs: shells eps0 2^-l, l = 0..count+7, each
/// ladder value sums 9 shells plus a geometric tail. Global: 9 shells below
/// R0 plus tail, then outer shells [R_{j-1}, R_j].
class CurvatureEngine {
 public:
  CurvatureEngine(const StratifiedSpace& space, SamplingConfig cfg, double start, int count);

  const StratifiedSpace& space() const { return space_; }
  const EpsilonLadder& ladder() const { return ladder_; }
  int kmax() const { return kmax_; }

  /// Alpha-free, sheet-normalized integral of stratum i's density (unscaled).
  LinearSeries stratum_series(int i, int k) const;
  /// sum_i weight_i * stratum_series(i, k).
  LinearSeries total_series(int k) const;

  CurvatureSeries measure(int k) const;

 private:
  struct Shell {
    double lo, hi;
  };
  void sample();
  int var(int stratum, int shell, int k) const;

  StratifiedSpace space_;
  SamplingConfig cfg_;
  EpsilonLadder ladder_;
  std::vector<Shell> shells_;
  int kmax_;
  int atom_vars_ = 0;
  std::vector<int> atom_var_;  // per stratum, -1 when not a point
  VectorXd mean_;
  std::shared_ptr<MatrixXd> cov_;
};

}  // namespace lkcurv
