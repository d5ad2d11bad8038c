#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lkcurv/boundary.hpp"
#include "lkcurv/polar.hpp"

namespace lkcurv {

struct ToleranceOverride {
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;
  std::optional<double> nsigma;
};

struct SuiteOptions {
  SamplingConfig sampling;
  std::optional<LadderSpec> eps_ladder;
  std::optional<LadderSpec> r_ladder;
  PolarConfig polar;
  MorseConfig morse;
  std::vector<double> morse_eps{1e-3, 5e-4};
  std::size_t morse_directions = 20;
  double mean_boundary_eps = 0.05;
  std::size_t mean_boundary_directions = 24;
  ToleranceOverride tol;
};

std::vector<std::string> suite_names();  // without "all"

/// Runs verification suites, sharing one curvature engine per space.
class SuiteRunner {
 public:
  explicit SuiteRunner(SuiteOptions opts);

  const SuiteOptions& options() const { return opts_; }
  Tolerance tolerance(const std::string& identity) const;
  LadderSpec ladder(const StratifiedSpace& space) const;
  const CurvatureEngine& engine(const StratifiedSpace& space);

  /// Reports of one suite ("all" runs every suite) on one space; suites
  /// that do not apply to the space contribute nothing. Errors become
  /// failing reports carrying the message.
  std::vector<IdentityReport> run(const std::string& suite, const StratifiedSpace& space);

 private:
  std::vector<IdentityReport> local_gb(const StratifiedSpace& space);
  std::vector<IdentityReport> main_theorem(const StratifiedSpace& space);
  std::vector<IdentityReport> euler(const StratifiedSpace& space);
  std::vector<IdentityReport> bdk(const StratifiedSpace& space);
  std::vector<IdentityReport> global(const StratifiedSpace& space);
  std::vector<IdentityReport> polar(const StratifiedSpace& space);
  std::vector<IdentityReport> fu(const StratifiedSpace& space);
  std::vector<IdentityReport> morse(const StratifiedSpace& space);

  SuiteOptions opts_;
  std::map<std::string, std::unique_ptr<CurvatureEngine>> engines_;
};

/// Aggregate of morse_identity over directions at one eps: lhs = number of
/// directions, rhs = number satisfying the identity exactly.
IdentityReport morse_suite_report(const StratifiedSpace& space, double eps, std::size_t directions,
                                  const MorseConfig& cfg, std::uint64_t seed);

}  // namespace lkcurv
