#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lkcurv/variety.hpp"

namespace lkcurv {

struct DataIncompleteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// beta = sum_i n_i 1_{V_i}; weights indexed like space.strata.
struct ConstructibleFunction {
  std::vector<long> weights;

  long at(int i) const { return weights.at(i); }
  bool operator==(const ConstructibleFunction&) const = default;
};

ConstructibleFunction zero_function(const StratifiedSpace& space);
ConstructibleFunction indicator_open(const StratifiedSpace& space, int j);
ConstructibleFunction indicator_closure(const StratifiedSpace& space, int j);
ConstructibleFunction indicator_ambient(const StratifiedSpace& space);
ConstructibleFunction combine(long a, const ConstructibleFunction& f, long b, const ConstructibleFunction& g);

/// Coefficients c_j with beta = sum_j c_j 1_{closure(V_j)} (Moebius inversion).
std::vector<long> to_closed_basis(const StratifiedSpace& space, const ConstructibleFunction& f);
ConstructibleFunction from_closed_basis(const StratifiedSpace& space, const std::vector<long>& c);

/// eta(V_i, 1_{closure(V_j)}) = 1 - chi(L_{V_i} cap closure(V_j)), 0 off the order.
long eta_closure(const StratifiedSpace& space, int i, int j);
long eta(const StratifiedSpace& space, const ConstructibleFunction& f, int i);

/// Closure of one stratum, or the union of the maximal strata, has a single
/// dimension.
bool equidimensional(const StratifiedSpace& space);

/// Eu_{closure(V_j)} for every j, from eta(V_i, Eu_j) = delta_ij.
std::vector<ConstructibleFunction> euler_obstruction_basis(const StratifiedSpace& space);
/// Eu_X as the sum of the basis elements of the maximal strata.
ConstructibleFunction euler_obstruction(const StratifiedSpace& space);
/// "Eu" for equidimensional spaces, "eta-dual basis element" otherwise.
std::string euler_obstruction_label(const StratifiedSpace& space);

struct BdkResult {
  long lhs = 0;
  long rhs = 0;
  bool pass = false;
  std::vector<long> terms;  // per stratum
};

/// phi(0) = sum_i Eu_{closure(V_i)}(0) eta(V_i, phi).
BdkResult bdk_local(const StratifiedSpace& space, const ConstructibleFunction& phi);

/// chi(V_i) from the "chi:<id>" oracle annotations.
std::vector<long> chi_strata(const StratifiedSpace& space);
long euler_characteristic(const StratifiedSpace& space, const ConstructibleFunction& phi,
                          const std::vector<long>& chi);
/// Eu(closure(V_j)) = chi(closure(V_j), Eu_{closure(V_j)}).
std::vector<long> global_euler_obstructions(const StratifiedSpace& space, const std::vector<long>& chi);
/// chi(X, phi) = sum_i Eu(closure(V_i)) eta(V_i, phi).
BdkResult bdk_global(const StratifiedSpace& space, const ConstructibleFunction& phi,
                     const std::vector<long>& chi, const std::vector<long>& global_eu);

/// 1_X, every 1_{closure(V_i)} and every Eu_{closure(V_i)}, labeled.
std::vector<std::pair<std::string, ConstructibleFunction>> corpus_functions(const StratifiedSpace& space);

/// {"<id>": weight, ..., "basis": "open" | "closed"}; missing ids weigh 0.
ConstructibleFunction parse_function(const StratifiedSpace& space, const std::string& json_text);

}  // namespace lkcurv
