#include "lkcurv/polar.hpp"

#include <algorithm>
#include <cmath>

namespace lkcurv {

namespace {

// Complement of H: orthonormal N x k.
MatrixXd complement(const SliceSpec& s) {
  if (s.h.cols() == 0) return MatrixXd::Identity(s.v.size(), s.v.size());
  return orthogonal_complement(s.h);
}

bool newton(const Chart& ch, const MatrixXd& p, const VectorXd& target, VectorXd& u) {
  auto resid = [&](const VectorXd& w) -> VectorXd { return p.transpose() * ch.map(w) - target; };
  VectorXd f = resid(u);
  double fn = f.norm();
  const double scale = std::max(target.norm(), 1e-300);
  for (int it = 0; it < 80; ++it) {
    if (fn <= 1e-13 * scale) return true;
    const MatrixXd j = p.transpose() * ch.jacobian(u);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(j);
    if (qr.rank() < j.cols()) return false;
    const VectorXd step = qr.solve(f);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const VectorXd cand = u - t * step;
      const VectorXd fc = resid(cand);
      if (std::isfinite(fc.norm()) && fc.norm() < fn) {
        u = cand;
        f = fc;
        fn = fc.norm();
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return fn <= 1e-10 * scale;
  }
  return fn <= 1e-10 * scale;
}

}  // namespace

std::vector<VectorXd> slice_points(const StratifiedSpace& space, const SliceSpec& slice, std::size_t seeds,
                                   std::uint64_t seed) {
  const int n = space.ambient_real_dim;
  const int k = n - static_cast<int>(slice.h.cols());
  const MatrixXd p = complement(slice);
  const VectorXd target = slice.delta * (p.transpose() * slice.v);
  std::vector<VectorXd> found;
  const double tol = 1e-8 * slice.eps;
  for (const auto& st : space.strata) {
    if (st.real_dim != k) continue;
    const std::size_t per_chart = std::max<std::size_t>(8, seeds / std::max<std::size_t>(1, st.charts.size()));
    for (std::size_t c = 0; c < st.charts.size(); ++c) {
      const Chart& ch = *st.charts[c];
      const std::uint64_t key = mix_key(seed, "slice/" + st.id + "/" + std::to_string(c));
      // Seeds spread geometrically in radius from delta / 4 to eps.
      const double lo = 0.25 * slice.delta;
      const double ratio = std::pow(slice.eps / lo, 1.0 / static_cast<double>(per_chart));
      for (std::size_t s = 0; s < per_chart; ++s) {
        Rng rng(key, s);
        const double a = lo * std::pow(ratio, static_cast<double>(s));
        ChartSample smp = ch.sample_shell(rng, a, a * ratio, s, per_chart);
        if (!(smp.weight > 0.0)) continue;
        VectorXd u = smp.u;
        try {
          if (!newton(ch, p, target, u)) continue;
        } catch (const ChartDegeneracyError&) {
          continue;
        }
        const VectorXd x = ch.map(u);
        if (!(x.norm() < slice.eps) || !x.allFinite()) continue;
        const bool dup = std::any_of(found.begin(), found.end(), [&](const VectorXd& y) { return (y - x).norm() < tol; });
        if (!dup) found.push_back(x);
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const VectorXd& a, const VectorXd& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return found;
}

int slice_euler_characteristic(const StratifiedSpace& space, const SliceSpec& slice, std::size_t seeds,
                               std::uint64_t seed) {
  const int n = space.ambient_real_dim;
  const int k = n - static_cast<int>(slice.h.cols());
  if (std::abs(slice.v.norm() - 1.0) > 1e-10 || (slice.h.cols() > 0 && (slice.h.transpose() * slice.v).norm() > 1e-10)) {
    throw std::invalid_argument("slice: v must be a unit vector orthogonal to H");
  }
  if (k == 0) return 1;
  const int d = space.dim();
  if (k > d) return 0;
  if (k == d) return static_cast<int>(slice_points(space, slice, seeds, seed).size());
  const auto a = space.annotation("chi_slice_codim_" + std::to_string(k));
  if (!a || a->den != 1) {
    throw UnsupportedSliceError("no point count or chi oracle for codimension " + std::to_string(k) + " slices of " +
                                space.name);
  }
  return static_cast<int>(a->num);
}

PolarEstimate sigma(const StratifiedSpace& space, int k, const PolarConfig& cfg) {
  if (space.kind != SpaceKind::germ) throw PreconditionError("sigma needs a germ");
  const int n = space.ambient_real_dim;
  if (k < 0 || k > n) throw std::invalid_argument("sigma: k out of range");
  PolarEstimate out;
  out.k = k;
  out.eps = cfg.eps;
  out.delta_ladder = cfg.delta_factors;
  const int d = space.dim();
  if (k == 0) {
    out.sigma = 1.0;
    out.method = "convention";
    return out;
  }
  if (k > d) {
    out.method = "empty";
    return out;
  }
  if (k < d) {
    const auto a = space.annotation("chi_slice_codim_" + std::to_string(k));
    if (!a) {
      throw UnsupportedSliceError("no chi oracle for codimension " + std::to_string(k) + " slices of " + space.name);
    }
    out.sigma = a->value();
    out.method = "oracle";
    return out;
  }

  out.method = "point-count";
  out.samples = cfg.samples;
  std::vector<int> chi(cfg.samples, 0);
  std::vector<std::string> errors(cfg.samples);
  std::vector<std::pair<MatrixXd, VectorXd>> witness(cfg.samples);
  const std::uint64_t base = mix_key(mix_key(cfg.seed, space.name), "polar/" + std::to_string(k));
  parallel_for(cfg.samples, [&](std::size_t t) {
    Rng rng(base, t);
    const MatrixXd p = sample_grassmannian(n, k, rng);
    SliceSpec s;
    s.h = orthogonal_complement(p);
    s.v = p * sample_sphere(k, rng);
    s.eps = cfg.eps;
    std::vector<int> vals;
    std::vector<double> deltas = cfg.delta_factors;
    for (int extra = 0;; ++extra) {
      while (vals.size() < deltas.size()) {
        s.delta = deltas[vals.size()] * cfg.eps;
        vals.push_back(slice_euler_characteristic(space, s, cfg.seeds, mix_key(base, t)));
      }
      if (vals.size() >= 2 && vals[vals.size() - 1] == vals[vals.size() - 2]) break;
      if (extra >= cfg.max_extra_halvings) {
        errors[t] = "delta ladder did not stabilize for draw " + std::to_string(t);
        witness[t] = {s.h, s.v};
        return;
      }
      deltas.push_back(deltas.back() * 0.5);
    }
    chi[t] = vals.back();
  });
  for (std::size_t t = 0; t < cfg.samples; ++t) {
    if (!errors[t].empty()) throw StabilizationError(errors[t], witness[t].first, witness[t].second);
  }
  double m = 0.0;
  for (int c : chi) m += c;
  m /= static_cast<double>(cfg.samples);
  double var = 0.0;
  for (int c : chi) var += (c - m) * (c - m);
  if (cfg.samples > 1) var /= static_cast<double>(cfg.samples - 1);
  out.sigma = m;
  out.std_error = std::sqrt(var / static_cast<double>(std::max<std::size_t>(1, cfg.samples)));
  out.draws = std::move(chi);
  return out;
}

IdentityReport verify_curv_polar(const CurvatureEngine& eng, int k, const PolarConfig& cfg, const Tolerance& tol) {
  const PolarEstimate a = sigma(eng.space(), k, cfg);
  const PolarEstimate b = sigma(eng.space(), k + 1, cfg);
  const LimitEstimate l = limit_of(scaled_series(eng, k), "k=" + std::to_string(k));
  IdentityReport r;
  r.identity = "curv-polar";
  r.space = eng.space().name;
  r.function = "k=" + std::to_string(k);
  r.lhs = l.value;
  r.lhs_error = l.std_error;
  r.rhs = a.sigma - b.sigma;
  r.rhs_error = std::hypot(a.std_error, b.std_error);
  r.tol = tol;
  r.terms.push_back({"limit k=" + std::to_string(k), l.value, l.std_error});
  r.terms.push_back({"sigma_" + std::to_string(k) + " (" + a.method + ")", a.sigma, a.std_error});
  r.terms.push_back({"sigma_" + std::to_string(k + 1) + " (" + b.method + ")", b.sigma, b.std_error});
  decide(r);
  return r;
}

IdentityReport verify_polar_pairing(const StratifiedSpace& space, int e, const PolarConfig& cfg, const Tolerance& tol) {
  if (!space.is_complex()) throw PreconditionError("verify_polar_pairing needs a complex germ");
  const PolarEstimate a = sigma(space, 2 * e - 1, cfg);
  const PolarEstimate b = sigma(space, 2 * e, cfg);
  IdentityReport r;
  r.identity = "polar-pairing";
  r.space = space.name;
  r.function = "e=" + std::to_string(e);
  r.lhs = a.sigma;
  r.lhs_error = a.std_error;
  r.rhs = b.sigma;
  r.rhs_error = b.std_error;
  r.tol = tol;
  r.terms.push_back({"sigma_" + std::to_string(2 * e - 1) + " (" + a.method + ")", a.sigma, a.std_error});
  r.terms.push_back({"sigma_" + std::to_string(2 * e) + " (" + b.method + ")", b.sigma, b.std_error});
  decide(r);
  return r;
}

}  // namespace lkcurv
