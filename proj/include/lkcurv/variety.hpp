#pragma once

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lkcurv/mathkit.hpp"

namespace lkcurv {

using cplx = std::complex<double>;

struct LookupError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChartDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter point drawn by a chart sampler. `weight` is the reciprocal of
/// the sampling density, so mean(f(u) * weight) estimates the integral of f
/// over the sampled parameter region. weight == 0 marks a rejected draw.
struct ChartSample {
  VectorXd u;
  double weight = 0.0;
};

/// Parameterization of a stratum patch u in R^m -> R^N.
///
/// Samplers work in polar coordinates around ray_origin(): a direction is
/// drawn on S^{m-1} and the radius along the ray is located from the points
/// where |map| crosses the requested ambient radii.
class Chart {
 public:
  Chart(int intrinsic_dim, int ambient_dim, int sheet_count = 1);
  virtual ~Chart() = default;

  int dim() const { return m_; }
  int ambient_dim() const { return n_; }
  int sheet_count() const { return sheets_; }

  virtual VectorXd map(const VectorXd& u) const = 0;
  /// N x m. Default: central differences.
  virtual MatrixXd jacobian(const VectorXd& u) const;
  /// N matrices of size m x m (second derivatives of each component).
  virtual std::vector<MatrixXd> hessian(const VectorXd& u) const;
  virtual bool has_analytic_derivatives() const { return false; }

  /// Partition predicate; charts of one stratum must accept disjoint sets.
  virtual bool accepts(const VectorXd& u) const;
  virtual VectorXd ray_origin() const;
  /// Ray parameters rho > 0 with |map(origin + rho dir)| = r, ascending.
  virtual std::vector<double> radius_crossings(const VectorXd& dir, double r) const = 0;

  /// Draw from the region r_lo <= |map(u)| < r_hi. The draw is stratified:
  /// `cell` in [0, cells) selects a stratum of the direction/radius square.
  ChartSample sample_shell(Rng& rng, double r_lo, double r_hi, std::size_t cell,
                           std::size_t cells) const;

  /// Draw from the level set |map(u)| = r with the coarea weight
  /// s_{m-1} * count * rho^{m-1} / |d|map|/drho|, so that
  /// mean(f * weight) estimates the integral of f delta(|map| - r) du.
  ChartSample sample_sphere(Rng& rng, double r, std::size_t cell, std::size_t cells) const;

  /// Gram determinant sqrt(det(J^T J)).
  double gram(const VectorXd& u) const;

 protected:
  VectorXd fd_step(const VectorXd& u) const;

 private:
  int m_;
  int n_;
  int sheets_;
};

using ChartPtr = std::shared_ptr<const Chart>;

// ---------------------------------------------------------------------------
// Holomorphic polynomials with complex coefficients.

struct Monomial {
  cplx coeff;
  std::vector<int> exps;
};

class ComplexPoly {
 public:
  ComplexPoly() = default;
  ComplexPoly(int nvars, std::vector<Monomial> terms);

  int nvars() const { return nvars_; }
  int degree() const;
  const std::vector<Monomial>& terms() const { return terms_; }

  cplx eval(const std::vector<cplx>& z) const;
  std::vector<cplx> gradient(const std::vector<cplx>& z) const;
  /// Symmetric matrix of second derivatives (row-major, nvars x nvars).
  std::vector<cplx> hessian(const std::vector<cplx>& z) const;
  /// Coefficients in t of P(c + t w), lowest degree first.
  std::vector<cplx> along_line(const std::vector<cplx>& c, const std::vector<cplx>& w) const;

 private:
  int nvars_ = 0;
  std::vector<Monomial> terms_;
};

/// Parse "3*x0^2*x1 - 2i*x2 + 1" style polynomials in variables x0..x{n-1}.
ComplexPoly parse_poly(const std::string& text, int nvars);

/// Interleave complex coordinates as (Re z_0, Im z_0, Re z_1, ...).
VectorXd to_real(const std::vector<cplx>& z);
std::vector<cplx> to_complex(const VectorXd& x);

/// Explicit chart z in C^n -> (P_1(c + z), ..., P_N(c + z)) in C^N = R^{2N}.
class PolynomialChart : public Chart {
 public:
  using Predicate = std::function<bool(const std::vector<cplx>& t)>;

  PolynomialChart(std::vector<ComplexPoly> components, int sheet_count = 1,
                  std::vector<cplx> center = {}, Predicate accept = {});

  VectorXd map(const VectorXd& u) const override;
  MatrixXd jacobian(const VectorXd& u) const override;
  std::vector<MatrixXd> hessian(const VectorXd& u) const override;
  bool has_analytic_derivatives() const override { return true; }
  bool accepts(const VectorXd& u) const override;
  std::vector<double> radius_crossings(const VectorXd& dir, double r) const override;

 private:
  std::vector<cplx> shifted(const VectorXd& u) const;

  std::vector<ComplexPoly> comps_;
  std::vector<cplx> center_;
  Predicate accept_;
};

/// Branch of a complex hypersurface {f = 0} in C^n solved for one coordinate.
///
/// Parameters are the other n-1 coordinates. The roots of f in the solved
/// coordinate are sorted by argument and `branch` selects one. The chart only
/// accepts points where the solved coordinate has the largest |df/dz|, so the
/// charts of all solved coordinates and branches tile the hypersurface.
class ImplicitHypersurfaceChart : public Chart {
 public:
  ImplicitHypersurfaceChart(ComplexPoly f, int solved, int branch, bool homogeneous);

  VectorXd map(const VectorXd& u) const override;
  MatrixXd jacobian(const VectorXd& u) const override;
  std::vector<MatrixXd> hessian(const VectorXd& u) const override;
  bool has_analytic_derivatives() const override { return true; }
  bool accepts(const VectorXd& u) const override;
  std::vector<double> radius_crossings(const VectorXd& dir, double r) const override;

  int branch_count() const;

 private:
  std::vector<cplx> point(const VectorXd& u) const;
  std::vector<cplx> dz(const std::vector<cplx>& z) const;

  ComplexPoly f_;
  int solved_;
  int branch_;
  bool homogeneous_;
};

/// Real chart from callbacks. Without derivative callbacks the Chart finite
/// differences are used. Radius crossings use homogeneity when a degree is
/// given, otherwise a bracketing scan of |map| along the ray.
class FunctionChart : public Chart {
 public:
  using MapFn = std::function<VectorXd(const VectorXd&)>;
  using JacFn = std::function<MatrixXd(const VectorXd&)>;
  using HessFn = std::function<std::vector<MatrixXd>(const VectorXd&)>;

  FunctionChart(int m, int n, MapFn map, JacFn jac = {}, HessFn hess = {}, int sheet_count = 1,
                double homogeneous_degree = 0.0, double param_limit = 1e3);

  VectorXd map(const VectorXd& u) const override;
  MatrixXd jacobian(const VectorXd& u) const override;
  std::vector<MatrixXd> hessian(const VectorXd& u) const override;
  bool has_analytic_derivatives() const override { return static_cast<bool>(jac_); }
  std::vector<double> radius_crossings(const VectorXd& dir, double r) const override;

 private:
  MapFn map_;
  JacFn jac_;
  HessFn hess_;
  double degree_;
  double limit_;
};

// ---------------------------------------------------------------------------

enum class SpaceKind { germ, global };

/// alpha(x, v) for a real stratum at ambient point x and unit normal v.
using AlphaFn = std::function<double(const VectorXd& x, const VectorXd& v)>;

struct Stratum {
  std::string id;
  int real_dim = 0;
  bool is_complex = true;
  std::vector<ChartPtr> charts;
  VectorXd point;                    // dim 0 strata
  std::optional<double> alpha;       // real strata: constant index
  AlphaFn alpha_fn;                  // real strata: varying index
  std::string alpha_label;

  int complex_dim() const { return real_dim / 2; }
};

struct Annotation {
  long num = 0;
  long den = 1;
  std::string derivation;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Annotation parse_rational(const std::string& text, const std::string& derivation = {});

/// Ambient column of the link table.
inline constexpr int kAmbient = -1;

struct StratifiedSpace {
  std::string name;
  int ambient_real_dim = 0;
  SpaceKind kind = SpaceKind::germ;
  std::vector<Stratum> strata;
  /// Strict cover pairs (i, j) meaning V_i is in the closure of V_j.
  std::vector<std::pair<int, int>> closure_pairs;
  /// chi(L_{V_i} cap closure(V_j)); j == kAmbient for X.
  std::map<std::pair<int, int>, int> chi_link;
  std::map<std::string, Annotation> oracle;
  /// Global spaces: the scaled measures approach their limits in powers of
  /// R^-infinity_decay.
  double infinity_decay = 1.0;

  std::size_t size() const { return strata.size(); }
  int index_of(const std::string& id) const;
  /// Reflexive-transitive closure order: V_i contained in closure(V_j).
  bool below(int i, int j) const;
  std::vector<int> maximal() const;
  int minimal_index() const;
  int dim() const;
  bool is_complex() const;
  int chi(int i, int j) const;
  std::optional<Annotation> annotation(const std::string& key) const;

  void finalize();

 private:
  std::vector<std::vector<char>> order_;
};

struct ValidationFailure {
  std::string invariant;
  std::string witness;
};

struct ValidationReport {
  std::vector<ValidationFailure> failures;
  bool ok() const { return failures.empty(); }
  std::string summary() const;
};

ValidationReport validate(const StratifiedSpace& space);

StratifiedSpace restrict_to_closure(const StratifiedSpace& space, const std::string& id);

std::vector<std::string> builtin_names();
/// Germ builtins, in registry order.
std::vector<std::string> builtin_germs();
StratifiedSpace builtin(const std::string& name);

/// Variety-definition JSON text / file.
StratifiedSpace load_json(const std::string& text);
StratifiedSpace load(const std::string& path);

}  // namespace lkcurv
