#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lkcurv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DimensionError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Unit ball and unit sphere volumes b_0..b_max, s_0..s_max.
///
/// b_k = pi^{k/2} / Gamma(k/2 + 1) and s_k = (k + 1) b_{k+1}, so s_k is the
/// volume of the k-dimensional unit sphere sitting in R^{k+1}.
class VolumeTable {
 public:
  explicit VolumeTable(int max_dim = 64);

  int max_dim() const { return max_dim_; }
  double ball(int k) const;
  double sphere(int k) const;

 private:
  int max_dim_;
  std::vector<double> ball_;
  std::vector<double> sphere_;
};

double ball_volume(int k);
double sphere_volume(int k);

/// sigma_j(eigs); sigma_0 = 1.
double elementary_symmetric(std::span<const double> eigs, int j);

/// All sigma_0..sigma_n in one pass.
std::vector<double> elementary_symmetric_all(std::span<const double> eigs);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Throws ShapeError if M is not square or not symmetric within tol * ||M||.
std::vector<double> symmetric_eigenvalues(const MatrixXd& m, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Counter-based random numbers.
//
// A stream is fully determined by (key, stream index), so a sample drawn for
// index i is the same no matter which thread draws it or in which order.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_key(std::uint64_t key, std::uint64_t tag);
std::uint64_t mix_key(std::uint64_t key, const std::string& tag);

class Rng {
 public:
  Rng(std::uint64_t key, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Uniform point on S^{n-1}.
VectorXd sample_sphere(int n, Rng& rng);

/// Orthonormal basis (n x k) of a Haar-random k-plane in R^n, from the QR
/// factorization of an n x k standard Gaussian matrix with sign-fixed R.
MatrixXd sample_grassmannian(int n, int k, Rng& rng);

/// Orthonormal basis of the orthogonal complement of span(frame).
MatrixXd orthogonal_complement(const MatrixXd& frame);

// ---------------------------------------------------------------------------
// Ladders and extrapolation.

enum class LadderKind { shrink, grow };

struct EpsilonLadder {
  std::vector<double> values;
  LadderKind kind = LadderKind::shrink;

  /// start, start*ratio, ... (count values). ratio < 1 shrinks, > 1 grows.
  static EpsilonLadder geometric(double start, int count, double ratio);
  void check() const;
};

struct SeriesPoint {
  double scale = 0.0;  // epsilon or R
  double value = 0.0;
  double std_error = 0.0;
};

struct LimitEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double residual = 0.0;
  std::vector<SeriesPoint> series;
  LadderKind kind = LadderKind::shrink;
  double decay = 1.0;
  std::string tag;  // "k=2", "i=L1,e=1", ...
};

struct ExtrapolationError : std::runtime_error {
  ExtrapolationError(const std::string& what, std::vector<SeriesPoint> raw)
      : std::runtime_error(what), series(std::move(raw)) {}
  std::vector<SeriesPoint> series;
};

/// Weighted least-squares fit value ~ a + b x + c x^2 with x = eps^decay
/// (shrink) or x = R^-decay (grow). Returns a, its standard error and the
/// largest absolute fit residual.
LimitEstimate extrapolate_limit(std::span<const SeriesPoint> series,
                                LadderKind kind = LadderKind::shrink, double decay = 1.0);

/// Generalized least squares with the full covariance of the series values.
/// Used when the ladder values share samples.
LimitEstimate extrapolate_limit(std::span<const SeriesPoint> series,
                                const MatrixXd& covariance,
                                LadderKind kind = LadderKind::shrink, double decay = 1.0);

// ---------------------------------------------------------------------------
// Real polynomials in one variable (coefficients, lowest degree first).

double poly_eval(std::span<const double> coeffs, double x);

/// Real roots of the polynomial in [lo, hi], ascending. Works by bracketing
/// between the roots of the derivative, which is exact for the low degrees
/// that appear in ray profiles.
std::vector<double> poly_real_roots(std::span<const double> coeffs, double lo, double hi);

// ---------------------------------------------------------------------------
// Deterministic parallel loop over [0, n). Each index is processed exactly
// once; callers write results into per-index slots and reduce in order.

int default_thread_count();
void set_thread_count(int threads);
int thread_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lkcurv
