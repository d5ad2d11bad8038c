#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lkcurv/variety.hpp"

namespace lkcurv {

namespace {

std::size_t radial_cells(std::size_t n) {
  if (n < 2) return 1;
  for (auto b = static_cast<std::size_t>(std::sqrt(static_cast<double>(n))); b >= 2; --b) {
    if (n % b == 0 && b % 2 == 0) return b;
  }
  return n % 2 == 0 ? 2 : 1;
}

struct Stratified {
  VectorXd dir;
  double q = 0.0;  // radial CDF coordinate
};

Stratified stratified_draw(int m, Rng& rng, std::size_t cell, std::size_t cells, bool radial) {
  Stratified out;
  if (cells == 0) cells = 1;
  cell %= cells;
  if (m == 1) {
    const std::size_t half = cells / 2;
    double sign;
    std::size_t b, nb;
    if (half == 0) {
      sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
      b = 0;
      nb = 1;
    } else {
      sign = cell < half ? 1.0 : -1.0;
      b = cell < half ? cell : cell - half;
      nb = half;
      if (b >= nb) b = nb - 1;
    }
    out.dir = VectorXd::Constant(1, sign);
    out.q = (static_cast<double>(b) + rng.uniform()) / static_cast<double>(nb);
    return out;
  }
  if (m == 2) {
    const std::size_t nb = radial ? radial_cells(cells) : 1;
    const std::size_t na = cells / nb;
    const std::size_t a = cell / nb;
    const std::size_t b = cell % nb;
    const double theta = 2.0 * std::numbers::pi * (static_cast<double>(a) + rng.uniform()) /
                         static_cast<double>(na);
    out.dir = VectorXd(2);
    out.dir << std::cos(theta), std::sin(theta);
    out.q = (static_cast<double>(b) + rng.uniform()) / static_cast<double>(nb);
    return out;
  }
  out.dir = sample_sphere(m, rng);
  out.q = radial ? (static_cast<double>(cell) + rng.uniform()) / static_cast<double>(cells)
                 : rng.uniform();
  return out;
}

}  // namespace

Chart::Chart(int intrinsic_dim, int ambient_dim, int sheet_count)
    : m_(intrinsic_dim), n_(ambient_dim), sheets_(sheet_count) {
  if (intrinsic_dim < 1 || ambient_dim < intrinsic_dim) {
    throw DimensionError("Chart: need 1 <= intrinsic_dim <= ambient_dim");
  }
}

VectorXd Chart::fd_step(const VectorXd& u) const {
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  VectorXd h(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) h[i] = h0 * (1.0 + std::abs(u[i]));
  return h;
}

MatrixXd Chart::jacobian(const VectorXd& u) const {
  const VectorXd h = fd_step(u);
  MatrixXd j(n_, m_);
  for (int a = 0; a < m_; ++a) {
    VectorXd up = u, um = u;
    up[a] += h[a];
    um[a] -= h[a];
    j.col(a) = (map(up) - map(um)) / (2.0 * h[a]);
  }
  return j;
}

std::vector<MatrixXd> Chart::hessian(const VectorXd& u) const {
  const VectorXd h = fd_step(u);
  std::vector<MatrixXd> out(n_, MatrixXd::Zero(m_, m_));
  const VectorXd f0 = map(u);
  for (int a = 0; a < m_; ++a) {
    VectorXd up = u, um = u;
    up[a] += h[a];
    um[a] -= h[a];
    const VectorXd d2 = (map(up) - 2.0 * f0 + map(um)) / (h[a] * h[a]);
    for (int c = 0; c < n_; ++c) out[c](a, a) = d2[c];
    for (int b = a + 1; b < m_; ++b) {
      VectorXd pp = u, pm = u, mp = u, mm = u;
      pp[a] += h[a], pp[b] += h[b];
      pm[a] += h[a], pm[b] -= h[b];
      mp[a] -= h[a], mp[b] += h[b];
      mm[a] -= h[a], mm[b] -= h[b];
      const VectorXd dab = (map(pp) - map(pm) - map(mp) + map(mm)) / (4.0 * h[a] * h[b]);
      for (int c = 0; c < n_; ++c) out[c](a, b) = out[c](b, a) = dab[c];
    }
  }
  return out;
}

bool Chart::accepts(const VectorXd&) const { return true; }

VectorXd Chart::ray_origin() const { return VectorXd::Zero(m_); }

double Chart::gram(const VectorXd& u) const {
  const MatrixXd j = jacobian(u);
  const double det = (j.transpose() * j).determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

ChartSample Chart::sample_shell(Rng& rng, double r_lo, double r_hi, std::size_t cell,
                                std::size_t cells) const {
  const Stratified s = stratified_draw(m_, rng, cell, cells, true);
  const VectorXd o = ray_origin();
  std::vector<double> pts{0.0};
  if (r_lo > 0.0) {
    for (double t : radius_crossings(s.dir, r_lo)) pts.push_back(t);
  }
  for (double t : radius_crossings(s.dir, r_hi)) pts.push_back(t);
  std::sort(pts.begin(), pts.end());

  std::vector<std::pair<double, double>> segs;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (!(b > a)) continue;
    const double r = map(o + 0.5 * (a + b) * s.dir).norm();
    if (r >= r_lo && r < r_hi) {
      if (!segs.empty() && segs.back().second == a) {
        segs.back().second = b;
      } else {
        segs.emplace_back(a, b);
      }
    }
  }
  ChartSample out;
  out.u = o;
  const double m = m_;
  std::vector<double> mass;
  double total = 0.0;
  for (auto [a, b] : segs) {
    mass.push_back((std::pow(b, m) - std::pow(a, m)) / m);
    total += mass.back();
  }
  if (!(total > 0.0)) return out;
  double t = s.q * total;
  std::size_t k = 0;
  while (k + 1 < segs.size() && t > mass[k]) {
    t -= mass[k];
    ++k;
  }
  const double a = segs[k].first;
  const double b = segs[k].second;
  double rho = std::pow(std::pow(a, m) + m * std::min(t, mass[k]), 1.0 / m);
  rho = std::clamp(rho, a, b);
  out.u = o + rho * s.dir;
  out.weight = accepts(out.u) ? sphere_volume(m_ - 1) * total : 0.0;
  return out;
}

ChartSample Chart::sample_sphere(Rng& rng, double r, std::size_t cell, std::size_t cells) const {
  const Stratified s = stratified_draw(m_, rng, cell, cells, false);
  const VectorXd o = ray_origin();
  ChartSample out;
  out.u = o;
  const std::vector<double> roots = radius_crossings(s.dir, r);
  if (roots.empty()) return out;
  auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(roots.size()));
  pick = std::min(pick, roots.size() - 1);
  const double rho = roots[pick];
  out.u = o + rho * s.dir;
  const VectorXd x = map(out.u);
  const double deriv = x.dot(jacobian(out.u) * s.dir) / x.norm();
  if (!(std::abs(deriv) > 0.0) || !accepts(out.u)) return out;
  out.weight = sphere_volume(m_ - 1) * static_cast<double>(roots.size()) *
               std::pow(rho, m_ - 1) / std::abs(deriv);
  return out;
}

// ---------------------------------------------------------------------------

VectorXd to_real(const std::vector<cplx>& z) {
  VectorXd x(2 * z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    x[2 * i] = z[i].real();
    x[2 * i + 1] = z[i].imag();
  }
  return x;
}

std::vector<cplx> to_complex(const VectorXd& x) {
  std::vector<cplx> z(x.size() / 2);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = {x[2 * i], x[2 * i + 1]};
  return z;
}

namespace {

// Real derivatives of a holomorphic function from its complex derivatives.
// d/dx_a = g_a, d/dy_a = i g_a.
void fill_jacobian(MatrixXd& j, int row, const std::vector<cplx>& g, int col0 = 0) {
  for (std::size_t a = 0; a < g.size(); ++a) {
    const cplx dx = g[a];
    const cplx dy = cplx(0, 1) * g[a];
    j(row, col0 + 2 * a) = dx.real();
    j(row + 1, col0 + 2 * a) = dx.imag();
    j(row, col0 + 2 * a + 1) = dy.real();
    j(row + 1, col0 + 2 * a + 1) = dy.imag();
  }
}

void fill_hessian(MatrixXd& re, MatrixXd& im, const std::vector<cplx>& h, std::size_t n) {
  static const cplx ipow[3] = {1.0, cplx(0, 1), -1.0};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (int sa = 0; sa < 2; ++sa) {
        for (int sb = 0; sb < 2; ++sb) {
          const cplx v = ipow[sa + sb] * h[a * n + b];
          re(2 * a + sa, 2 * b + sb) = v.real();
          im(2 * a + sa, 2 * b + sb) = v.imag();
        }
      }
    }
  }
}

std::vector<cplx> poly_mul(const std::vector<cplx>& p, const std::vector<cplx>& q) {
  std::vector<cplx> r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

// Positive roots of |sum_k a_jk t^k|^2 - r^2 over components j.
std::vector<double> modulus_crossings(const std::vector<std::vector<cplx>>& comps, double r) {
  std::size_t deg = 0;
  for (const auto& c : comps) deg = std::max(deg, c.size());
  std::vector<double> q(deg == 0 ? 1 : 2 * deg - 1, 0.0);
  for (const auto& c : comps) {
    for (std::size_t k = 0; k < c.size(); ++k)
      for (std::size_t l = 0; l < c.size(); ++l) q[k + l] += (c[k] * std::conj(c[l])).real();
  }
  q[0] -= r * r;
  while (q.size() > 1 && std::abs(q.back()) <= 1e-300) q.pop_back();
  if (q.size() <= 1) return {};
  double bound = 0.0;
  for (std::size_t i = 0; i + 1 < q.size(); ++i) bound = std::max(bound, std::abs(q[i] / q.back()));
  bound = 1.0 + bound;
  std::vector<double> out;
  for (double t : poly_real_roots(q, 0.0, bound)) {
    if (t > 0.0) out.push_back(t);
  }
  return out;
}

std::vector<double> scan_crossings(const std::function<double(double)>& radius, double r,
                                   double limit) {
  std::vector<double> out;
  const int steps = 4000;
  const double lo = 1e-12 * limit;
  double prev_t = lo;
  double prev_f = radius(prev_t) - r;
  for (int i = 1; i <= steps; ++i) {
    const double t = lo * std::pow(limit / lo, static_cast<double>(i) / steps);
    const double f = radius(t) - r;
    if ((prev_f < 0) != (f < 0)) {
      double a = prev_t, b = t, fa = prev_f;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double fm = radius(mid) - r;
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    prev_t = t;
    prev_f = f;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ComplexPoly::ComplexPoly(int nvars, std::vector<Monomial> terms)
    : nvars_(nvars), terms_(std::move(terms)) {
  for (auto& t : terms_) {
    if (static_cast<int>(t.exps.size()) < nvars_) t.exps.resize(nvars_, 0);
    if (static_cast<int>(t.exps.size()) != nvars_) throw ShapeError("ComplexPoly: exponent length");
  }
}

int ComplexPoly::degree() const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int e : t.exps) s += e;
    d = std::max(d, s);
  }
  return d;
}

cplx ComplexPoly::eval(const std::vector<cplx>& z) const {
  cplx s = 0.0;
  for (const auto& t : terms_) {
    cplx p = t.coeff;
    for (int a = 0; a < nvars_; ++a)
      for (int e = 0; e < t.exps[a]; ++e) p *= z[a];
    s += p;
  }
  return s;
}

std::vector<cplx> ComplexPoly::gradient(const std::vector<cplx>& z) const {
  std::vector<cplx> g(nvars_, 0.0);
  for (const auto& t : terms_) {
    for (int a = 0; a < nvars_; ++a) {
      if (t.exps[a] == 0) continue;
      cplx p = t.coeff * static_cast<double>(t.exps[a]);
      for (int b = 0; b < nvars_; ++b) {
        const int e = t.exps[b] - (b == a ? 1 : 0);
        for (int k = 0; k < e; ++k) p *= z[b];
      }
      g[a] += p;
    }
  }
  return g;
}

std::vector<cplx> ComplexPoly::hessian(const std::vector<cplx>& z) const {
  std::vector<cplx> h(nvars_ * nvars_, 0.0);
  for (const auto& t : terms_) {
    for (int a = 0; a < nvars_; ++a) {
      for (int b = a; b < nvars_; ++b) {
        std::vector<int> e = t.exps;
        double f = e[a];
        e[a] -= 1;
        f *= e[b];
        e[b] -= 1;
        if (f == 0.0 || e[a] < 0 || e[b] < 0) continue;
        cplx p = t.coeff * f;
        for (int c = 0; c < nvars_; ++c)
          for (int k = 0; k < e[c]; ++k) p *= z[c];
        h[a * nvars_ + b] += p;
        if (a != b) h[b * nvars_ + a] += p;
      }
    }
  }
  return h;
}

std::vector<cplx> ComplexPoly::along_line(const std::vector<cplx>& c,
                                          const std::vector<cplx>& w) const {
  std::vector<cplx> out{0.0};
  for (const auto& t : terms_) {
    std::vector<cplx> p{t.coeff};
    for (int a = 0; a < nvars_; ++a) {
      for (int k = 0; k < t.exps[a]; ++k) p = poly_mul(p, {c[a], w[a]});
    }
    if (p.size() > out.size()) out.resize(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] += p[i];
  }
  return out;
}

// ---------------------------------------------------------------------------

PolynomialChart::PolynomialChart(std::vector<ComplexPoly> components, int sheet_count,
                                 std::vector<cplx> center, Predicate accept)
    : Chart(components.empty() ? 0 : 2 * components.front().nvars(),
            2 * static_cast<int>(components.size()), sheet_count),
      comps_(std::move(components)),
      center_(std::move(center)),
      accept_(std::move(accept)) {
  const int n = comps_.front().nvars();
  for (const auto& c : comps_) {
    if (c.nvars() != n) throw ShapeError("PolynomialChart: components disagree on variable count");
  }
  if (center_.empty()) center_.assign(n, 0.0);
  if (static_cast<int>(center_.size()) != n) throw ShapeError("PolynomialChart: center length");
}

std::vector<cplx> PolynomialChart::shifted(const VectorXd& u) const {
  std::vector<cplx> z = to_complex(u);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += center_[i];
  return z;
}

VectorXd PolynomialChart::map(const VectorXd& u) const {
  const auto z = shifted(u);
  std::vector<cplx> w(comps_.size());
  for (std::size_t j = 0; j < comps_.size(); ++j) w[j] = comps_[j].eval(z);
  return to_real(w);
}

MatrixXd PolynomialChart::jacobian(const VectorXd& u) const {
  const auto z = shifted(u);
  MatrixXd j(ambient_dim(), dim());
  for (std::size_t c = 0; c < comps_.size(); ++c) fill_jacobian(j, 2 * c, comps_[c].gradient(z));
  return j;
}

std::vector<MatrixXd> PolynomialChart::hessian(const VectorXd& u) const {
  const auto z = shifted(u);
  std::vector<MatrixXd> out(ambient_dim(), MatrixXd::Zero(dim(), dim()));
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    fill_hessian(out[2 * c], out[2 * c + 1], comps_[c].hessian(z), z.size());
  }
  return out;
}

bool PolynomialChart::accepts(const VectorXd& u) const {
  return accept_ ? accept_(shifted(u)) : true;
}

std::vector<double> PolynomialChart::radius_crossings(const VectorXd& dir, double r) const {
  const std::vector<cplx> w = to_complex(dir);
  std::vector<std::vector<cplx>> coeffs;
  coeffs.reserve(comps_.size());
  for (const auto& c : comps_) coeffs.push_back(c.along_line(center_, w));
  return modulus_crossings(coeffs, r);
}

// ---------------------------------------------------------------------------

ImplicitHypersurfaceChart::ImplicitHypersurfaceChart(ComplexPoly f, int solved, int branch,
                                                     bool homogeneous)
    : Chart(2 * (f.nvars() - 1), 2 * f.nvars(), 1),
      f_(std::move(f)),
      solved_(solved),
      branch_(branch),
      homogeneous_(homogeneous) {
  if (solved < 0 || solved >= f_.nvars()) throw DimensionError("implicit chart: bad solved coordinate");
  if (branch < 0 || branch >= branch_count()) throw DimensionError("implicit chart: bad branch");
}

int ImplicitHypersurfaceChart::branch_count() const {
  int d = 0;
  for (const auto& t : f_.terms()) d = std::max(d, t.exps[solved_]);
  return d;
}

std::vector<cplx> ImplicitHypersurfaceChart::point(const VectorXd& u) const {
  const auto p = to_complex(u);
  const int n = f_.nvars();
  std::vector<cplx> z(n, 0.0), e(n, 0.0);
  for (int a = 0, k = 0; a < n; ++a) {
    if (a == solved_) continue;
    z[a] = p[k++];
  }
  e[solved_] = 1.0;
  std::vector<cplx> c = f_.along_line(z, e);
  const int d = branch_count();
  c.resize(d + 1, 0.0);
  if (std::abs(c[d]) == 0.0) throw ChartDegeneracyError("implicit chart: leading coefficient vanishes");
  // Rescale z = s w so the companion matrix is O(1) whatever the root size.
  double s = 0.0;
  for (int k = 0; k < d; ++k) s = std::max(s, std::pow(std::abs(c[k] / c[d]), 1.0 / (d - k)));
  if (!(s > 0.0)) s = 1.0;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[i] / c[d] / std::pow(s, d - i);
  std::vector<cplx> roots(d);
  if (d == 1) {
    roots[0] = -c[0] / c[1];
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    for (int i = 0; i < d; ++i) roots[i] = s * es.eigenvalues()[i];
  }
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx f = 0.0, df = 0.0;
      for (int k = d; k >= 0; --k) {
        df = df * r + f;
        f = f * r + c[k];
      }
      if (std::abs(df) == 0.0) break;
      r -= f / df;
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
  z[solved_] = roots[branch_];
  return z;
}

VectorXd ImplicitHypersurfaceChart::map(const VectorXd& u) const { return to_real(point(u)); }

std::vector<cplx> ImplicitHypersurfaceChart::dz(const std::vector<cplx>& z) const {
  const auto g = f_.gradient(z);
  const cplx fz = g[solved_];
  if (std::abs(fz) == 0.0) throw ChartDegeneracyError("implicit chart: df/dz vanishes");
  std::vector<cplx> out;
  for (int a = 0; a < f_.nvars(); ++a) {
    if (a != solved_) out.push_back(-g[a] / fz);
  }
  return out;
}

MatrixXd ImplicitHypersurfaceChart::jacobian(const VectorXd& u) const {
  const auto z = point(u);
  const auto g = dz(z);
  const int n = f_.nvars();
  MatrixXd j = MatrixXd::Zero(2 * n, dim());
  for (int a = 0, k = 0; a < n; ++a) {
    if (a == solved_) {
      fill_jacobian(j, 2 * a, g);
      continue;
    }
    std::vector<cplx> unit(n - 1, 0.0);
    unit[k++] = 1.0;
    fill_jacobian(j, 2 * a, unit);
  }
  return j;
}

std::vector<MatrixXd> ImplicitHypersurfaceChart::hessian(const VectorXd& u) const {
  const auto z = point(u);
  const int n = f_.nvars();
  const auto grad = f_.gradient(z);
  const auto hf = f_.hessian(z);
  const auto g = dz(z);
  const cplx fz = grad[solved_];
  std::vector<int> idx;
  for (int a = 0; a < n; ++a)
    if (a != solved_) idx.push_back(a);
  const std::size_t p = idx.size();
  const int c = solved_;
  std::vector<cplx> h(p * p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      const int ia = idx[a], ib = idx[b];
      h[a * p + b] = -(hf[ia * n + ib] + hf[ia * n + c] * g[b] + hf[ib * n + c] * g[a] +
                       hf[c * n + c] * g[a] * g[b]) /
                     fz;
    }
  }
  std::vector<MatrixXd> out(2 * n, MatrixXd::Zero(dim(), dim()));
  fill_hessian(out[2 * c], out[2 * c + 1], h, p);
  return out;
}

bool ImplicitHypersurfaceChart::accepts(const VectorXd& u) const {
  const auto g = f_.gradient(point(u));
  const double mine = std::abs(g[solved_]);
  for (int a = 0; a < f_.nvars(); ++a) {
    if (a < solved_ && std::abs(g[a]) >= mine) return false;
    if (a > solved_ && std::abs(g[a]) > mine) return false;
  }
  return true;
}

std::vector<double> ImplicitHypersurfaceChart::radius_crossings(const VectorXd& dir,
                                                                double r) const {
  if (homogeneous_) {
    const double s = map(dir).norm();
    if (!(s > 0.0)) return {};
    return {r / s};
  }
  return scan_crossings([&](double t) { return map(t * dir).norm(); }, r, 1e3);
}

// ---------------------------------------------------------------------------

FunctionChart::FunctionChart(int m, int n, MapFn map, JacFn jac, HessFn hess, int sheet_count,
                             double homogeneous_degree, double param_limit)
    : Chart(m, n, sheet_count),
      map_(std::move(map)),
      jac_(std::move(jac)),
      hess_(std::move(hess)),
      degree_(homogeneous_degree),
      limit_(param_limit) {}

VectorXd FunctionChart::map(const VectorXd& u) const { return map_(u); }

MatrixXd FunctionChart::jacobian(const VectorXd& u) const {
  return jac_ ? jac_(u) : Chart::jacobian(u);
}

std::vector<MatrixXd> FunctionChart::hessian(const VectorXd& u) const {
  return hess_ ? hess_(u) : Chart::hessian(u);
}

std::vector<double> FunctionChart::radius_crossings(const VectorXd& dir, double r) const {
  if (degree_ > 0.0) {
    const double s = map_(dir).norm();
    if (!(s > 0.0)) return {};
    return {std::pow(r / s, 1.0 / degree_)};
  }
  return scan_crossings([&](double t) { return map_(t * dir).norm(); }, r, limit_);
}

}  // namespace lkcurv
