#include "lkcurv/curvature.hpp"

#include <algorithm>
#include <cmath>

namespace lkcurv {

Frame local_frame(const Chart& chart, const VectorXd& u) {
  Frame f;
  f.u = u;
  f.x = chart.map(u);
  f.jac = chart.jacobian(u);
  const int m = chart.dim();
  const int n = chart.ambient_dim();
  Eigen::HouseholderQR<MatrixXd> qr(f.jac);
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
  const MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  double dmax = 0.0, dmin = INFINITY, det = 1.0;
  for (int a = 0; a < m; ++a) {
    dmax = std::max(dmax, std::abs(r(a, a)));
    dmin = std::min(dmin, std::abs(r(a, a)));
    det *= std::abs(r(a, a));
  }
  if (!(dmin > 1e-12 * dmax) || !(dmax > 0.0)) {
    throw ChartDegeneracyError("chart Jacobian is rank-deficient");
  }
  f.tangent = q.leftCols(m);
  f.normal = q.rightCols(n - m);
  f.rinv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(m, m));
  f.gram = det;
  const auto h = chart.hessian(u);
  f.hess.resize(n);
  for (int c = 0; c < n; ++c) {
    const MatrixXd t = f.rinv.transpose() * h[c] * f.rinv;
    f.hess[c] = 0.5 * (t + t.transpose());
  }
  return f;
}

MatrixXd second_fundamental_form(const Frame& f, const VectorXd& v) {
  const auto m = f.rinv.rows();
  MatrixXd ii = MatrixXd::Zero(m, m);
  for (std::size_t c = 0; c < f.hess.size(); ++c) {
    if (v[c] != 0.0) ii += v[c] * f.hess[c];
  }
  return ii;
}

namespace {

const Chart& chart_of(const StratifiedSpace& space, int stratum, int chart) {
  const auto& s = space.strata.at(stratum);
  if (chart < 0 || static_cast<std::size_t>(chart) >= s.charts.size()) {
    throw LookupError("stratum " + s.id + " has no chart " + std::to_string(chart));
  }
  return *s.charts[chart];
}

std::vector<VectorXd> normal_directions(const Frame& f, std::size_t directions, Rng& rng) {
  std::vector<VectorXd> out;
  const auto codim = f.normal.cols();
  if (codim == 0) return out;
  if (codim == 1) {
    out.push_back(f.normal.col(0));
    out.push_back(-f.normal.col(0));
    return out;
  }
  const std::size_t pairs = std::max<std::size_t>(1, directions / 2);
  for (std::size_t p = 0; p < pairs; ++p) {
    const VectorXd v = f.normal * sample_sphere(static_cast<int>(codim), rng);
    out.push_back(v);
    out.push_back(-v);
  }
  return out;
}

// Per-direction alpha * sigma_{e-k}(II_v) for k = 0..kmax, rows = directions.
MatrixXd direction_terms(const Stratum& s, const Frame& f, const std::vector<VectorXd>& dirs, int kmax) {
  const int e = s.real_dim;
  MatrixXd out = MatrixXd::Zero(static_cast<Eigen::Index>(dirs.size()), kmax + 1);
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const MatrixXd ii = second_fundamental_form(f, dirs[d]);
    const auto eig = symmetric_eigenvalues(ii, 1e-9);
    const auto sig = elementary_symmetric_all(eig);
    const double a = s.alpha_fn ? s.alpha_fn(f.x, dirs[d]) : 1.0;
    for (int k = 0; k <= std::min(e, kmax); ++k) out(d, k) = a * sig[e - k];
  }
  return out;
}

double density_factor(int n, int e, int k) {
  return sphere_volume(n - e - 1) / sphere_volume(n - k - 1);
}

// Alpha-included (when varying) densities lambda_k / weight, k = 0..kmax.
VectorXd raw_densities(const StratifiedSpace& space, const Stratum& s, const Frame& f,
                       std::size_t directions, Rng& rng, int kmax) {
  const int n = space.ambient_real_dim;
  const int e = s.real_dim;
  VectorXd out = VectorXd::Zero(kmax + 1);
  if (e == n) {
    if (e <= kmax) out[e] = 1.0;
    return out;
  }
  const auto dirs = normal_directions(f, directions, rng);
  const MatrixXd t = direction_terms(s, f, dirs, kmax);
  for (int k = 0; k <= std::min(e, kmax); ++k) {
    out[k] = density_factor(n, e, k) * t.col(k).mean();
  }
  return out;
}

DensityValue mean_with_error(const VectorXd& pair_means) {
  DensityValue d;
  const auto n = pair_means.size();
  d.value = pair_means.mean();
  if (n > 1) {
    const double var = (pair_means.array() - d.value).square().sum() / static_cast<double>(n - 1);
    d.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return d;
}

VectorXd pair_average(const VectorXd& col) {
  VectorXd p(col.size() / 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = 0.5 * (col[2 * i] + col[2 * i + 1]);
  return p;
}

}  // namespace

SecondFundamentalForm second_fundamental_form(const StratifiedSpace& space, int stratum, int chart,
                                              const VectorXd& u, const VectorXd& v) {
  const Frame f = local_frame(chart_of(space, stratum, chart), u);
  if (std::abs(v.norm() - 1.0) > 1e-8) throw PreconditionError("normal direction must be a unit vector");
  if ((f.tangent.transpose() * v).norm() > 1e-8) throw PreconditionError("direction is not normal to the stratum");
  return {f.x, stratum, v, second_fundamental_form(f, v)};
}

double stratum_weight(const StratifiedSpace& space, int stratum) {
  const auto& s = space.strata.at(stratum);
  if (s.is_complex) return 1.0 - space.chi(stratum, kAmbient);
  if (s.alpha_fn) return 1.0;
  if (s.alpha) return *s.alpha;
  throw DataError("stratum " + s.id + " is real and has no alpha data");
}

DensityValue lk_density(const StratifiedSpace& space, int stratum, int chart, const VectorXd& u, int k,
                        std::size_t directions, Rng& rng) {
  const auto& s = space.strata.at(stratum);
  const double w = stratum_weight(space, stratum);
  const int n = space.ambient_real_dim;
  const int e = s.real_dim;
  if (k < 0) throw DimensionError("lk_density: negative k");
  if (k > e) return {};
  const Frame f = local_frame(chart_of(space, stratum, chart), u);
  if (e == n) return {w, 0.0};
  const auto dirs = normal_directions(f, directions, rng);
  const MatrixXd t = direction_terms(s, f, dirs, k);
  DensityValue d = mean_with_error(pair_average(t.col(k)));
  const double c = w * density_factor(n, e, k);
  d.value *= c;
  d.std_error *= std::abs(c);
  return d;
}

DensityValue lkw_curvature(const StratifiedSpace& space, int stratum, int chart, const VectorXd& u, int j,
                           std::size_t directions, Rng& rng) {
  const auto& s = space.strata.at(stratum);
  if (!s.is_complex) throw std::invalid_argument("lkw_curvature: stratum " + s.id + " is real, use lk_density");
  const int n = space.ambient_real_dim;
  const int e = s.real_dim;
  if (j < 0 || 2 * j > e) throw DimensionError("lkw_curvature: j out of range");
  const Frame f = local_frame(chart_of(space, stratum, chart), u);
  const double vol = sphere_volume(n - e - 1);
  if (j == 0) return {vol, 0.0};
  const auto dirs = normal_directions(f, directions, rng);
  const MatrixXd t = direction_terms(s, f, dirs, e);
  // sigma_{2j} sits in column e - 2j.
  DensityValue d = mean_with_error(pair_average(t.col(e - 2 * j)));
  d.value *= vol;
  d.std_error *= vol;
  return d;
}

// ---------------------------------------------------------------------------

MatrixXd LinearSeries::covariance() const { return coeffs * (*var_cov) * coeffs.transpose(); }

std::vector<SeriesPoint> LinearSeries::points() const {
  const MatrixXd c = covariance();
  std::vector<SeriesPoint> out;
  for (std::size_t j = 0; j < scales.size(); ++j) {
    out.push_back({scales[j], values[j], std::sqrt(std::max(0.0, c(j, j)))});
  }
  return out;
}

LinearSeries& LinearSeries::add(double a, const LinearSeries& other) {
  if (other.values.size() != values.size() || other.coeffs.cols() != coeffs.cols()) {
    throw ShapeError("LinearSeries::add: incompatible series");
  }
  values += a * other.values;
  coeffs += a * other.coeffs;
  return *this;
}

LinearSeries& LinearSeries::scale_points(const std::vector<double>& factor) {
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    values[j] *= factor[j];
    coeffs.row(j) *= factor[j];
  }
  return *this;
}

LinearSeries scaled_by_ball(LinearSeries s, int k) {
  std::vector<double> f;
  for (double r : s.scales) f.push_back(1.0 / (ball_volume(k) * std::pow(r, k)));
  s.scale_points(f);
  return s;
}

// ---------------------------------------------------------------------------

namespace {
constexpr int kSummed = 9;  // shells summed per ladder value before the tail
}

CurvatureEngine::CurvatureEngine(const StratifiedSpace& space, SamplingConfig cfg, double start, int count)
    : space_(space), cfg_(cfg), kmax_(space.dim()) {
  if (cfg_.points < 2) cfg_.points = 2;
  if (cfg_.points % 2) ++cfg_.points;
  if (space_.kind == SpaceKind::germ) {
    ladder_ = EpsilonLadder::geometric(start, count, 0.5);
    if (start > 0.5) throw PreconditionError("germ ladders must stay below 0.5");
    for (int l = 0; l < count + kSummed - 1; ++l) {
      shells_.push_back({start * std::pow(0.5, l + 1), start * std::pow(0.5, l)});
    }
  } else {
    ladder_ = EpsilonLadder::geometric(start, count, 2.0);
    for (int l = 0; l < kSummed; ++l) shells_.push_back({start * std::pow(0.5, l + 1), start * std::pow(0.5, l)});
    for (int q = 1; q < count; ++q) shells_.push_back({start * std::pow(2.0, q - 1), start * std::pow(2.0, q)});
  }
  atom_var_.assign(space_.size(), -1);
  for (std::size_t i = 0; i < space_.size(); ++i) {
    if (space_.strata[i].real_dim == 0) atom_var_[i] = atom_vars_++;
  }
  sample();
}

int CurvatureEngine::var(int stratum, int shell, int k) const {
  return atom_vars_ + (stratum * static_cast<int>(shells_.size()) + shell) * (kmax_ + 1) + k;
}

void CurvatureEngine::sample() {
  const int ns = static_cast<int>(space_.size());
  const int nk = kmax_ + 1;
  const int nvars = atom_vars_ + ns * static_cast<int>(shells_.size()) * nk;
  mean_ = VectorXd::Zero(nvars);
  cov_ = std::make_shared<MatrixXd>(MatrixXd::Zero(nvars, nvars));
  const std::uint64_t base = mix_key(cfg_.seed, space_.name);

  // Point atoms: lambda_0 = mean of alpha over the full sphere.
  for (int i = 0; i < ns; ++i) {
    const auto& s = space_.strata[i];
    if (s.real_dim != 0) continue;
    const int a = atom_var_[i];
    if (!s.alpha_fn) {
      mean_[a] = 1.0;
      continue;
    }
    const std::size_t n = std::max<std::size_t>(2, cfg_.atom_directions);
    std::vector<double> vals(n);
    const std::uint64_t key = mix_key(base, "atom/" + s.id);
    parallel_for(n, [&](std::size_t t) {
      Rng rng(key, t);
      vals[t] = s.alpha_fn(s.point, sample_sphere(space_.ambient_real_dim, rng));
    });
    double m = 0.0;
    for (double v : vals) m += v;
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double v : vals) var += (v - m) * (v - m);
    var /= static_cast<double>(n - 1);
    mean_[a] = m;
    (*cov_)(a, a) = var / static_cast<double>(n);
  }

  struct Task {
    int stratum, chart, shell;
  };
  std::vector<Task> tasks;
  for (int i = 0; i < ns; ++i) {
    const auto& s = space_.strata[i];
    if (s.real_dim == 0) continue;
    for (int c = 0; c < static_cast<int>(s.charts.size()); ++c)
      for (int l = 0; l < static_cast<int>(shells_.size()); ++l) tasks.push_back({i, c, l});
  }
  const std::size_t npts = cfg_.points * (space_.kind == SpaceKind::global ? cfg_.global_factor : 1);
  std::vector<VectorXd> y(tasks.size() * npts);
  std::vector<std::uint64_t> keys;
  for (const auto& t : tasks) {
    keys.push_back(mix_key(base, "shell/" + space_.strata[t.stratum].id + "/" + std::to_string(t.chart) + "/" +
                                     std::to_string(t.shell)));
  }
  parallel_for(y.size(), [&](std::size_t idx) {
    const Task& t = tasks[idx / npts];
    const std::size_t s = idx % npts;
    const auto& st = space_.strata[t.stratum];
    const Chart& ch = *st.charts[t.chart];
    Rng rng(keys[idx / npts], s);
    VectorXd out = VectorXd::Zero(nk);
    const ChartSample smp = ch.sample_shell(rng, shells_[t.shell].lo, shells_[t.shell].hi, s, npts);
    if (smp.weight > 0.0) {
      try {
        const Frame f = local_frame(ch, smp.u);
        out = raw_densities(space_, st, f, cfg_.directions, rng, kmax_) *
              (smp.weight * f.gram / ch.sheet_count());
      } catch (const ChartDegeneracyError&) {
        out.setZero();
      }
    }
    y[idx] = std::move(out);
  });

  const double inv = 1.0 / static_cast<double>(npts);
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const Task& t = tasks[ti];
    const int v0 = var(t.stratum, t.shell, 0);
    VectorXd sum = VectorXd::Zero(nk);
    MatrixXd c = MatrixXd::Zero(nk, nk);
    for (std::size_t s = 0; s < npts; ++s) sum += y[ti * npts + s];
    for (std::size_t s = 0; s + 1 < npts; s += 2) {
      const VectorXd d = y[ti * npts + s] - y[ti * npts + s + 1];
      c += d * d.transpose();
    }
    mean_.segment(v0, nk) += sum * inv;
    cov_->block(v0, v0, nk, nk) += c * inv * inv;
  }
}

LinearSeries CurvatureEngine::stratum_series(int i, int k) const {
  const auto& s = space_.strata.at(i);
  const auto np = static_cast<Eigen::Index>(ladder_.values.size());
  LinearSeries out;
  out.kind = ladder_.kind;
  if (space_.kind == SpaceKind::global) out.decay = space_.infinity_decay;
  out.scales = ladder_.values;
  out.values = VectorXd::Zero(np);
  out.coeffs = MatrixXd::Zero(np, mean_.size());
  out.var_cov = cov_;
  if (k < 0 || k > kmax_) return out;
  if (s.real_dim == 0) {
    if (k == 0) {
      out.values.setConstant(mean_[atom_var_[i]]);
      out.coeffs.col(atom_var_[i]).setOnes();
    }
    return out;
  }
  if (k > s.real_dim) return out;

  const bool germ = space_.kind == SpaceKind::germ;
  for (Eigen::Index j = 0; j < np; ++j) {
    const int first = germ ? static_cast<int>(j) : 0;
    double head = 0.0;
    for (int l = first; l < first + kSummed; ++l) {
      const int v = var(i, l, k);
      head += mean_[v];
      out.coeffs(j, v) += 1.0;
    }
    // Geometric tail from the last two summed shells.
    const int v7 = var(i, first + kSummed - 2, k);
    const int v8 = var(i, first + kSummed - 1, k);
    const double t7 = mean_[v7];
    const double t8 = mean_[v8];
    const double r = germ ? ladder_.values[j] : ladder_.values[0];
    const double tiny = 1e-10 * ball_volume(k) * std::pow(r, k);
    double tail = 0.0;
    const bool negligible = std::abs(t8) <= tiny || std::abs(t8) <= 1e-3 * std::abs(head);
    if (!negligible && t7 != 0.0) {
      const double q = t8 / t7;
      if (q >= 1.0) {
        throw DivergenceError("shell contributions do not decay for stratum " + s.id + ", k = " +
                              std::to_string(k));
      }
      if (q > 0.0) {
        const double den = t7 - t8;
        tail = t8 * t8 / den;
        out.coeffs(j, v8) += t8 * (2.0 * t7 - t8) / (den * den);
        out.coeffs(j, v7) += -t8 * t8 / (den * den);
      }
    }
    double outer = 0.0;
    if (!germ) {
      for (Eigen::Index q = 1; q <= j; ++q) {
        const int v = var(i, kSummed - 1 + static_cast<int>(q), k);
        outer += mean_[v];
        out.coeffs(j, v) += 1.0;
      }
    }
    out.values[j] = head + tail + outer;
  }
  return out;
}

LinearSeries CurvatureEngine::total_series(int k) const {
  LinearSeries out = stratum_series(0, k);
  out.values *= stratum_weight(space_, 0);
  out.coeffs *= stratum_weight(space_, 0);
  for (int i = 1; i < static_cast<int>(space_.size()); ++i) out.add(stratum_weight(space_, i), stratum_series(i, k));
  return out;
}

CurvatureSeries CurvatureEngine::measure(int k) const {
  CurvatureSeries cs;
  cs.k = k;
  cs.ladder = ladder_;
  const LinearSeries total = total_series(k);
  cs.values = total.points();
  cs.covariance = total.covariance();
  for (int i = 0; i < static_cast<int>(space_.size()); ++i) {
    LinearSeries s = stratum_series(i, k);
    const double w = stratum_weight(space_, i);
    s.values *= w;
    s.coeffs *= w;
    cs.per_stratum[space_.strata[i].id] = s.points();
  }
  return cs;
}

}  // namespace lkcurv
