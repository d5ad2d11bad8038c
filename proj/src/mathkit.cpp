#include "lkcurv/mathkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace lkcurv {

VolumeTable::VolumeTable(int max_dim) : max_dim_(max_dim) {
  if (max_dim < 0) throw DimensionError("VolumeTable: negative max_dim");
  ball_.resize(max_dim + 2);
  for (int k = 0; k <= max_dim + 1; ++k) {
    ball_[k] = std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
  }
  ball_[0] = 1.0;
  sphere_.resize(max_dim + 1);
  for (int k = 0; k <= max_dim; ++k) sphere_[k] = (k + 1) * ball_[k + 1];
}

double VolumeTable::ball(int k) const {
  if (k < 0 || k > max_dim_) throw DimensionError("ball_volume: dimension out of range");
  return ball_[k];
}

double VolumeTable::sphere(int k) const {
  if (k < 0 || k > max_dim_) throw DimensionError("sphere_volume: dimension out of range");
  return sphere_[k];
}

namespace {
const VolumeTable& volumes() {
  static const VolumeTable table(64);
  return table;
}
}  // namespace

double ball_volume(int k) { return volumes().ball(k); }
double sphere_volume(int k) { return volumes().sphere(k); }

std::vector<double> elementary_symmetric_all(std::span<const double> eigs) {
  // Coefficients of prod (1 + lambda_i t).
  std::vector<double> e(eigs.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    for (std::size_t j = i + 1; j >= 1; --j) e[j] += eigs[i] * e[j - 1];
  }
  return e;
}

double elementary_symmetric(std::span<const double> eigs, int j) {
  if (j < 0 || static_cast<std::size_t>(j) > eigs.size()) {
    throw std::domain_error("elementary_symmetric: index exceeds number of eigenvalues");
  }
  return elementary_symmetric_all(eigs)[j];
}

std::vector<double> symmetric_eigenvalues(const MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) throw ShapeError("symmetric_eigenvalues: matrix is not square");
  const Eigen::Index n = m.rows();
  const double norm = m.norm();
  if ((m - m.transpose()).norm() > tol * std::max(norm, 1.0)) {
    throw ShapeError("symmetric_eigenvalues: matrix is not symmetric");
  }
  MatrixXd a = 0.5 * (m + m.transpose());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * norm || off == 0.0) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (Eigen::Index i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_key(std::uint64_t key, std::uint64_t tag) {
  return splitmix64(key ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
}

std::uint64_t mix_key(std::uint64_t key, const std::string& tag) {
  // FNV-1a, then mixed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix_key(key, h);
}

Rng::Rng(std::uint64_t key, std::uint64_t stream) : state_(mix_key(key, stream)) {}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

VectorXd sample_sphere(int n, Rng& rng) {
  if (n <= 0) throw DimensionError("sample_sphere: dimension must be positive");
  VectorXd v(n);
  double norm = 0.0;
  while (norm < 1e-12) {
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    norm = v.norm();
  }
  return v / norm;
}

MatrixXd sample_grassmannian(int n, int k, Rng& rng) {
  if (k < 0 || n < 0 || k > n) throw DimensionError("sample_grassmannian: need 0 <= k <= n");
  if (k == 0) return MatrixXd(n, 0);
  MatrixXd g(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, k);
  const MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

MatrixXd orthogonal_complement(const MatrixXd& frame) {
  const Eigen::Index n = frame.rows();
  const Eigen::Index k = frame.cols();
  if (k == 0) return MatrixXd::Identity(n, n);
  Eigen::HouseholderQR<MatrixXd> qr(frame);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
  return q.rightCols(n - k);
}

// ---------------------------------------------------------------------------

EpsilonLadder EpsilonLadder::geometric(double start, int count, double ratio) {
  EpsilonLadder ladder;
  ladder.kind = ratio < 1.0 ? LadderKind::shrink : LadderKind::grow;
  double v = start;
  for (int i = 0; i < count; ++i) {
    ladder.values.push_back(v);
    v *= ratio;
  }
  ladder.check();
  return ladder;
}

void EpsilonLadder::check() const {
  if (values.size() < 5) throw std::invalid_argument("ladder needs at least 5 values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::invalid_argument("ladder values must be positive");
    if (i == 0) continue;
    const bool ok = kind == LadderKind::shrink ? values[i] < values[i - 1]
                                               : values[i] > values[i - 1];
    if (!ok) throw std::invalid_argument("ladder is not monotone in its declared direction");
  }
}

LimitEstimate extrapolate_limit(std::span<const SeriesPoint> series, LadderKind kind, double decay) {
  MatrixXd cov = MatrixXd::Zero(series.size(), series.size());
  for (std::size_t i = 0; i < series.size(); ++i) cov(i, i) = series[i].std_error * series[i].std_error;
  return extrapolate_limit(series, cov, kind, decay);
}

LimitEstimate extrapolate_limit(std::span<const SeriesPoint> series, const MatrixXd& covariance,
                                LadderKind kind, double decay) {
  if (!(decay > 0.0)) throw std::invalid_argument("extrapolation decay must be positive");
  std::vector<SeriesPoint> raw(series.begin(), series.end());
  const auto n = static_cast<Eigen::Index>(series.size());
  if (n < 5) throw ExtrapolationError("extrapolation needs at least 5 ladder points", raw);
  if (covariance.rows() != n || covariance.cols() != n) {
    throw ShapeError("extrapolate_limit: covariance does not match series length");
  }
  MatrixXd a(n, 3);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = series[i].scale;
    const double x = std::pow(s, kind == LadderKind::shrink ? decay : -decay);
    a(i, 0) = 1.0;
    a(i, 1) = x;
    a(i, 2) = x * x;
    y[i] = series[i].value;
  }
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  const double cond = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  if (!(cond <= 1e8)) throw ExtrapolationError("extrapolation fit is ill-conditioned", raw);

  // Floor the variances so exact series (zero error) still give a proper fit.
  MatrixXd c = covariance;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(y[i]));
  const double floor_sd = 1e-13 * (1.0 + scale);
  const double jitter = 1e-8 * c.diagonal().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) c(i, i) += floor_sd * floor_sd + jitter;

  Eigen::LLT<MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw ExtrapolationError("series covariance is not positive definite", raw);
  const MatrixXd aw = llt.matrixL().solve(a);
  const VectorXd yw = llt.matrixL().solve(y);
  const MatrixXd normal = aw.transpose() * aw;
  const MatrixXd normal_inv = normal.ldlt().solve(MatrixXd::Identity(3, 3));
  const VectorXd beta = normal_inv * (aw.transpose() * yw);

  LimitEstimate out;
  out.value = beta[0];
  out.std_error = std::sqrt(std::max(0.0, normal_inv(0, 0)));
  out.residual = (y - a * beta).cwiseAbs().maxCoeff();
  out.series = std::move(raw);
  out.kind = kind;
  out.decay = decay;
  return out;
}

// ---------------------------------------------------------------------------

double poly_eval(std::span<const double> coeffs, double x) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
  return v;
}

std::vector<double> poly_real_roots(std::span<const double> coeffs, double lo, double hi) {
  std::vector<double> c(coeffs.begin(), coeffs.end());
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  std::vector<double> roots;
  if (c.size() <= 1 || lo > hi) return roots;
  if (c.size() == 2) {
    const double r = -c[0] / c[1];
    if (r >= lo && r <= hi) roots.push_back(r);
    return roots;
  }
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  std::vector<double> breaks{lo};
  for (double r : poly_real_roots(d, lo, hi)) breaks.push_back(r);
  breaks.push_back(hi);

  auto push = [&](double r) {
    if (roots.empty() || std::abs(r - roots.back()) > 1e-14 * (1.0 + std::abs(r))) roots.push_back(r);
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double a = breaks[i];
    double b = breaks[i + 1];
    double fa = poly_eval(c, a);
    double fb = poly_eval(c, b);
    if (fa == 0.0) {
      push(a);
      continue;
    }
    if ((fa < 0) == (fb < 0) || fb == 0.0) continue;
    for (int it = 0; it < 200 && b - a > 0; ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double fm = poly_eval(c, m);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    push(0.5 * (a + b));
  }
  if (poly_eval(c, hi) == 0.0) push(hi);
  return roots;
}

// ---------------------------------------------------------------------------

namespace {
std::atomic<int> g_threads{0};
}

int default_thread_count() {
  if (const char* env = std::getenv("LKCURV_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_count(int threads) { g_threads = threads > 0 ? threads : 0; }

int thread_count() {
  const int t = g_threads.load();
  return t > 0 ? t : default_thread_count();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int threads = std::min<std::size_t>(thread_count(), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < n && !failed; i = next++) body(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lkcurv
