#include "lkcurv/boundary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace lkcurv {

namespace {

void require_germ(const StratifiedSpace& space, double eps) {
  if (space.kind != SpaceKind::germ) throw PreconditionError("boundary measures need a germ");
  if (!(eps > 0.0) || eps > 0.5) throw std::out_of_range("eps must lie in (0, 0.5]");
}

std::uint64_t eps_key(double eps) { return std::bit_cast<std::uint64_t>(eps); }

// alpha * [inward] * sigma_{m-1}(A_v) averaged over the unit normal sphere of
// W = V cap S_eps at the frame point, in antipodal pairs.
double boundary_density(const StratifiedSpace& space, const Stratum& s, const Frame& f, double alpha,
                        std::size_t directions, Rng& rng) {
  const int n = space.ambient_real_dim;
  const int m = s.real_dim;
  const VectorXd& x = f.x;
  const double eps = x.norm();
  const VectorXd xt = f.tangent.transpose() * x;
  const double xt_norm = xt.norm();
  if (!(xt_norm > 1e-12 * eps)) throw ChartDegeneracyError("stratum tangent to the sphere");
  const VectorXd tr = xt / xt_norm;
  const MatrixXd wb = orthogonal_complement(tr);  // m x (m-1), tangent frame coords
  const VectorXd xn = x - f.tangent * xt;
  const MatrixXd base = wb.transpose() * (-MatrixXd::Identity(m, m) - second_fundamental_form(f, xn)) * wb / xt_norm;
  const int codim = n - m + 1;
  auto term = [&](const VectorXd& a, double b) {
    // v = normal * a + b * (tangent * tr)
    const VectorXd vn = f.normal * a;
    const double inward = -(vn.dot(xn) + b * xt_norm);
    if (!(inward > 0.0)) return 0.0;
    double al = alpha;
    if (s.alpha_fn) al *= s.alpha_fn(x, vn + b * (f.tangent * tr));
    if (m == 1) return al;
    const MatrixXd av = wb.transpose() * second_fundamental_form(f, vn) * wb + b * base;
    const auto eig = symmetric_eigenvalues(0.5 * (av + av.transpose()), 1e-9);
    return al * elementary_symmetric(eig, m - 1);
  };
  double sum = 0.0;
  std::size_t count = 0;
  if (codim == 1) {
    const VectorXd a = VectorXd::Zero(0);
    sum = term(a, 1.0) + term(a, -1.0);
    count = 2;
  } else {
    const std::size_t pairs = std::max<std::size_t>(1, directions / 2);
    for (std::size_t p = 0; p < pairs; ++p) {
      const VectorXd w = sample_sphere(codim, rng);
      const VectorXd a = w.head(codim - 1);
      sum += term(a, w[codim - 1]) + term(-a, -w[codim - 1]);
      count += 2;
    }
  }
  return sphere_volume(n - m) / sphere_volume(n - 1) * sum / static_cast<double>(count);
}

}  // namespace

DensityValue stratum_boundary_measure(const StratifiedSpace& space, int i, double eps, double alpha,
                                      const SamplingConfig& cfg) {
  require_germ(space, eps);
  const auto& s = space.strata.at(i);
  if (s.real_dim == 0) return {};
  const std::size_t npts = std::max<std::size_t>(2, cfg.points + cfg.points % 2);
  DensityValue out;
  double var = 0.0;
  for (std::size_t c = 0; c < s.charts.size(); ++c) {
    const Chart& ch = *s.charts[c];
    const std::uint64_t key =
        mix_key(mix_key(mix_key(cfg.seed, space.name), "boundary/" + s.id + "/" + std::to_string(c)), eps_key(eps));
    std::vector<double> y(npts, 0.0);
    parallel_for(npts, [&](std::size_t t) {
      Rng rng(key, t);
      const ChartSample smp = ch.sample_sphere(rng, eps, t, npts);
      if (!(smp.weight > 0.0)) return;
      try {
        const Frame f = local_frame(ch, smp.u);
        const double xt = (f.tangent.transpose() * f.x).norm();
        y[t] = smp.weight * f.gram * xt / eps * boundary_density(space, s, f, alpha, cfg.directions, rng) /
               ch.sheet_count();
      } catch (const ChartDegeneracyError&) {
        y[t] = 0.0;
      }
    });
    double sum = 0.0, pv = 0.0;
    for (std::size_t t = 0; t < npts; ++t) sum += y[t];
    for (std::size_t t = 0; t + 1 < npts; t += 2) pv += (y[t] - y[t + 1]) * (y[t] - y[t + 1]);
    const double inv = 1.0 / static_cast<double>(npts);
    out.value += sum * inv;
    var += pv * inv * inv;
  }
  out.std_error = std::sqrt(var);
  return out;
}

BoundaryMeasure boundary_gb_measure(const StratifiedSpace& space, double eps, const SamplingConfig& cfg) {
  require_germ(space, eps);
  BoundaryMeasure out;
  out.eps = eps;
  double var = 0.0;
  for (int i = 0; i < static_cast<int>(space.size()); ++i) {
    const DensityValue d = stratum_boundary_measure(space, i, eps, stratum_weight(space, i), cfg);
    out.per_stratum[space.strata[i].id] = d;
    out.total += d.value;
    var += d.std_error * d.std_error;
  }
  out.total_error = std::sqrt(var);
  return out;
}

namespace {

std::vector<SeriesPoint> boundary_series(const StratifiedSpace& space, const std::vector<int>& strata,
                                         const LadderSpec& ladder, const SamplingConfig& cfg) {
  const EpsilonLadder eps = EpsilonLadder::geometric(ladder.start, ladder.count, 0.5);
  std::vector<SeriesPoint> out;
  for (double e : eps.values) {
    SeriesPoint p;
    p.scale = e;
    double var = 0.0;
    for (int i : strata) {
      const DensityValue d = stratum_boundary_measure(space, i, e, stratum_weight(space, i), cfg);
      p.value += d.value;
      var += d.std_error * d.std_error;
    }
    p.std_error = std::sqrt(var);
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<SeriesPoint> fu_series(const StratifiedSpace& space, const LadderSpec& ladder, const SamplingConfig& cfg) {
  return boundary_series(space, space.maximal(), ladder, cfg);
}

IdentityReport verify_fu(const StratifiedSpace& space, const LadderSpec& ladder, const SamplingConfig& cfg,
                         const Tolerance& tol) {
  if (!space.is_complex() || space.kind != SpaceKind::germ) throw PreconditionError("verify_fu needs a complex germ");
  if (!equidimensional(space)) throw PreconditionError("verify_fu needs an equidimensional germ");
  const auto pts = fu_series(space, ladder, cfg);
  const LimitEstimate l = extrapolate_limit(pts, LadderKind::shrink);
  IdentityReport r;
  r.identity = "fu";
  r.space = space.name;
  r.function = euler_obstruction_label(space);
  r.lhs = static_cast<double>(euler_obstruction(space).at(space.minimal_index()));
  r.rhs = l.value;
  r.rhs_error = l.std_error;
  r.tol = tol;
  for (const auto& p : pts) r.terms.push_back({"eps=" + std::to_string(p.scale), p.value, p.std_error});
  decide(r);
  return r;
}

IdentityReport verify_boundary_limits(const CurvatureEngine& eng, int i, const LadderSpec& ladder,
                                      const SamplingConfig& cfg, const Tolerance& tol) {
  const auto& sp = eng.space();
  if (!sp.is_complex() || sp.kind != SpaceKind::germ) throw PreconditionError("verify_boundary_limits needs a complex germ");
  const auto& st = sp.strata.at(i);
  const int v0 = sp.minimal_index();
  if (st.real_dim == 0) throw PreconditionError("stratum " + st.id + " does not meet small spheres");
  const StratifiedSpace closure = restrict_to_closure(sp, st.id);
  const auto pts = boundary_series(closure, {closure.index_of(st.id)}, ladder, cfg);
  const LimitEstimate l = extrapolate_limit(pts, LadderKind::shrink);
  IdentityReport r;
  r.identity = "boundary-limit";
  r.space = sp.name;
  r.function = st.id;
  r.lhs = l.value;
  r.lhs_error = l.std_error;
  r.tol = tol;
  if (i == v0) {
    r.rhs = 1.0;
  } else {
    const int d0 = sp.strata[v0].complex_dim();
    LinearSeries acc = eng.stratum_series(0, eng.kmax() + 1);
    for (int e = d0 + 1; e <= st.complex_dim(); ++e) {
      const LinearSeries s = stratum_limit_series(eng, i, e);
      const LimitEstimate le = limit_of(s);
      r.terms.push_back({"L(" + st.id + "," + std::to_string(e) + ")", le.value, le.std_error});
      acc.add(1.0, s);
    }
    const LimitEstimate sum = limit_of(acc);
    r.rhs = sum.value;
    r.rhs_error = sum.std_error;
  }
  decide(r);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Lagrange {
  VectorXd u;
  double lambda = 0.0;
};

// Residual of J^T (v - lambda phi) = 0, (|phi|^2 - eps^2) / 2 = 0.
VectorXd lagrange_residual(const Chart& ch, const VectorXd& v, double eps, const Lagrange& z, VectorXd* x_out,
                           MatrixXd* j_out) {
  const VectorXd x = ch.map(z.u);
  const MatrixXd j = ch.jacobian(z.u);
  const auto m = z.u.size();
  VectorXd r(m + 1);
  r.head(m) = j.transpose() * (v - z.lambda * x);
  r[m] = 0.5 * (x.squaredNorm() - eps * eps) / eps;
  if (x_out) *x_out = x;
  if (j_out) *j_out = j;
  return r;
}

MatrixXd lagrangian_hessian(const Chart& ch, const VectorXd& v, const Lagrange& z, const VectorXd& x,
                            const MatrixXd& j) {
  const auto h = ch.hessian(z.u);
  const VectorXd w = v - z.lambda * x;
  MatrixXd out = -z.lambda * (j.transpose() * j);
  for (std::size_t c = 0; c < h.size(); ++c) out += w[static_cast<Eigen::Index>(c)] * h[c];
  return 0.5 * (out + out.transpose());
}

bool lagrange_newton(const Chart& ch, const VectorXd& v, double eps, Lagrange& z) {
  const auto m = z.u.size();
  VectorXd x;
  MatrixXd j;
  VectorXd r = lagrange_residual(ch, v, eps, z, &x, &j);
  double rn = r.norm();
  for (int it = 0; it < 100; ++it) {
    if (rn < 1e-12) return true;
    MatrixXd big(m + 1, m + 1);
    big.topLeftCorner(m, m) = lagrangian_hessian(ch, v, z, x, j);
    big.topRightCorner(m, 1) = -(j.transpose() * x);
    big.bottomLeftCorner(1, m) = (j.transpose() * x).transpose() / eps;
    big(m, m) = 0.0;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(big);
    if (qr.rank() < m + 1) return false;
    const VectorXd step = qr.solve(r);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      Lagrange c{z.u - t * step.head(m), z.lambda - t * step[m]};
      VectorXd xc;
      MatrixXd jc;
      VectorXd rc;
      try {
        rc = lagrange_residual(ch, v, eps, c, &xc, &jc);
      } catch (const ChartDegeneracyError&) {
        t *= 0.5;
        continue;
      }
      if (rc.allFinite() && rc.norm() < rn) {
        z = c;
        x = xc;
        j = jc;
        r = rc;
        rn = rc.norm();
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return rn < 1e-10;
  }
  return rn < 1e-10;
}

struct Search {
  std::vector<CriticalPoint> points;
  bool degenerate = false;
  bool incomplete = false;
};

Search find_critical_points(const StratifiedSpace& space, const VectorXd& v, double eps, const MorseConfig& cfg,
                            std::uint64_t key) {
  Search out;
  const double dedupe = 1e-7 * eps;
  for (int i = 0; i < static_cast<int>(space.size()); ++i) {
    const auto& st = space.strata[i];
    if (st.real_dim == 0) continue;
    const double ind_nor = stratum_weight(space, i);
    const std::size_t per_chart = cfg.seeds;
    std::size_t tried = 0, failed = 0;
    std::vector<CriticalPoint> found;
    for (std::size_t c = 0; c < st.charts.size(); ++c) {
      const Chart& ch = *st.charts[c];
      const std::uint64_t ck = mix_key(key, "morse/" + st.id + "/" + std::to_string(c));
      for (std::size_t s = 0; s < per_chart; ++s) {
        Rng rng(ck, s);
        const ChartSample smp = ch.sample_sphere(rng, eps, s, per_chart);
        if (!(smp.weight > 0.0)) continue;
        ++tried;
        Lagrange z;
        z.u = smp.u;
        try {
          const VectorXd x = ch.map(z.u);
          const MatrixXd j = ch.jacobian(z.u);
          const VectorXd g = j.transpose() * x;
          z.lambda = g.squaredNorm() > 0.0 ? (j.transpose() * v).dot(g) / g.squaredNorm() : 0.0;
          if (!lagrange_newton(ch, v, eps, z)) {
            ++failed;
            continue;
          }
        } catch (const ChartDegeneracyError&) {
          ++failed;
          continue;
        }
        const VectorXd x = ch.map(z.u);
        if (!x.allFinite()) continue;
        if (std::any_of(found.begin(), found.end(),
                        [&](const CriticalPoint& p) { return (p.position - x).norm() < dedupe; })) {
          continue;
        }
        const MatrixXd j = ch.jacobian(z.u);
        Eigen::ColPivHouseholderQR<MatrixXd> rank(j);
        if (rank.rank() < j.cols()) continue;  // chart singularity, not a point of the stratum
        CriticalPoint p;
        p.position = x;
        p.stratum = st.id;
        p.lambda = z.lambda;
        p.inward = z.lambda < 0.0;
        p.normal_index = ind_nor;
        if (std::abs(z.lambda) < 1e-6) out.degenerate = true;
        const MatrixXd hl = lagrangian_hessian(ch, v, z, x, j);
        const VectorXd g = j.transpose() * x;
        const MatrixXd zb = orthogonal_complement(g.normalized());
        if (zb.cols() > 0) {
          const MatrixXd red = zb.transpose() * hl * zb;
          const auto eig = symmetric_eigenvalues(0.5 * (red + red.transpose()), 1e-8);
          double big = 0.0;
          for (double e : eig) big = std::max(big, std::abs(e));
          for (double e : eig) {
            if (std::abs(e) < 1e-7 * std::max(big, 1.0 / eps)) out.degenerate = true;
            if (e < 0.0) ++p.morse_index;
          }
        }
        found.push_back(std::move(p));
      }
    }
    if (tried > 0 && static_cast<double>(failed) >= 0.99 * static_cast<double>(tried)) out.incomplete = true;
    for (auto& p : found) out.points.push_back(std::move(p));
  }
  std::sort(out.points.begin(), out.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.stratum != b.stratum) return a.stratum < b.stratum;
    return std::lexicographical_compare(a.position.data(), a.position.data() + a.position.size(), b.position.data(),
                                        b.position.data() + b.position.size());
  });
  return out;
}

double chi_ball(const StratifiedSpace& space) {
  const auto a = space.annotation("chi_ball");
  return a ? a->value() : 1.0;
}

double origin_index(const StratifiedSpace& space, const VectorXd& v) {
  const int v0 = space.minimal_index();
  const auto& s = space.strata[v0];
  if (s.real_dim > 0) return 0.0;
  if (s.alpha_fn) return s.alpha_fn(s.point, v);
  return stratum_weight(space, v0);
}

}  // namespace

MorseReport morse_identity(const StratifiedSpace& space, const VectorXd& v, double eps, const MorseConfig& cfg) {
  require_germ(space, eps);
  if (v.size() != space.ambient_real_dim || std::abs(v.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("morse_identity: v must be a unit vector of the ambient space");
  }
  MorseReport rep;
  rep.eps = eps;
  VectorXd dir = v;
  const std::uint64_t base = mix_key(mix_key(cfg.seed, space.name), eps_key(eps));
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t key = mix_key(base, static_cast<std::uint64_t>(attempt));
    Search s = find_critical_points(space, dir, eps, cfg, key);
    if (s.degenerate && attempt < cfg.max_resamples) {
      Rng rng(mix_key(base, "resample"), static_cast<std::uint64_t>(attempt));
      dir = sample_sphere(space.ambient_real_dim, rng);
      continue;
    }
    rep.resamples = attempt;
    rep.v = dir;
    rep.critical_points = std::move(s.points);
    rep.incomplete = s.incomplete || s.degenerate;
    break;
  }
  rep.index_at_origin = origin_index(space, rep.v);
  double sum = 0.0;
  for (const auto& p : rep.critical_points) {
    if (p.inward) sum += (p.morse_index % 2 ? -1.0 : 1.0) * p.normal_index;
  }
  rep.inward_sum = sum;
  rep.identity_lhs = chi_ball(space);
  rep.identity_rhs = rep.index_at_origin + sum;
  rep.pass = !rep.incomplete && std::abs(rep.identity_lhs - rep.identity_rhs) < 1e-9;
  return rep;
}

std::vector<VectorXd> morse_directions(const StratifiedSpace& space, std::size_t n, std::uint64_t seed) {
  std::vector<VectorXd> out;
  const std::uint64_t key = mix_key(mix_key(seed, space.name), "morse-directions");
  for (std::size_t t = 0; t < n; ++t) {
    Rng rng(key, t);
    out.push_back(sample_sphere(space.ambient_real_dim, rng));
  }
  return out;
}

IdentityReport mean_boundary_identity(const StratifiedSpace& space, double eps, std::size_t n_directions,
                                      const SamplingConfig& cfg, const MorseConfig& mcfg, const Tolerance& tol) {
  require_germ(space, eps);
  if (n_directions < 2) throw std::invalid_argument("mean_boundary_identity needs at least 2 directions");
  const auto dirs = morse_directions(space, n_directions, cfg.seed);
  std::vector<double> sums(n_directions, 0.0);
  std::vector<char> bad(n_directions, 0);
  parallel_for(n_directions, [&](std::size_t t) {
    const MorseReport r = morse_identity(space, dirs[t], eps, mcfg);
    sums[t] = r.inward_sum;
    bad[t] = r.incomplete;
  });
  if (std::any_of(bad.begin(), bad.end(), [](char b) { return b != 0; })) {
    throw IncompleteSearchError("critical point search incomplete for some direction on " + space.name);
  }
  double m = 0.0;
  for (double s : sums) m += s;
  m /= static_cast<double>(n_directions);
  double var = 0.0;
  for (double s : sums) var += (s - m) * (s - m);
  var /= static_cast<double>(n_directions - 1);
  const BoundaryMeasure bm = boundary_gb_measure(space, eps, cfg);
  IdentityReport r;
  r.identity = "mean-boundary";
  r.space = space.name;
  r.lhs = m;
  r.lhs_error = std::sqrt(var / static_cast<double>(n_directions));
  r.rhs = bm.total;
  r.rhs_error = bm.total_error;
  r.tol = tol;
  for (const auto& [id, d] : bm.per_stratum) r.terms.push_back({"boundary " + id, d.value, d.std_error});
  decide(r);
  return r;
}

}  // namespace lkcurv
