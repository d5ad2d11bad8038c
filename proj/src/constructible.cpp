#include "lkcurv/constructible.hpp"

#include <json.hpp>

namespace lkcurv {

namespace {

int count(const StratifiedSpace& space) { return static_cast<int>(space.size()); }

void check_shape(const StratifiedSpace& space, const ConstructibleFunction& f) {
  if (f.weights.size() != space.size()) throw ShapeError("constructible function does not match the space");
}

}  // namespace

ConstructibleFunction zero_function(const StratifiedSpace& space) {
  return {std::vector<long>(space.size(), 0)};
}

ConstructibleFunction indicator_open(const StratifiedSpace& space, int j) {
  auto f = zero_function(space);
  f.weights.at(j) = 1;
  return f;
}

ConstructibleFunction indicator_closure(const StratifiedSpace& space, int j) {
  auto f = zero_function(space);
  for (int i = 0; i < count(space); ++i)
    if (space.below(i, j)) f.weights[i] = 1;
  return f;
}

ConstructibleFunction indicator_ambient(const StratifiedSpace& space) {
  return {std::vector<long>(space.size(), 1)};
}

ConstructibleFunction combine(long a, const ConstructibleFunction& f, long b,
                              const ConstructibleFunction& g) {
  if (f.weights.size() != g.weights.size()) throw ShapeError("combine: size mismatch");
  ConstructibleFunction out = f;
  for (std::size_t i = 0; i < f.weights.size(); ++i) out.weights[i] = a * f.weights[i] + b * g.weights[i];
  return out;
}

std::vector<long> to_closed_basis(const StratifiedSpace& space, const ConstructibleFunction& f) {
  check_shape(space, f);
  // n_i = sum_{j >= i} c_j; peel off from the top of the order.
  const int n = count(space);
  std::vector<long> c(n, 0);
  std::vector<char> done(n, 0);
  for (int round = 0; round < n; ++round) {
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      bool ready = true;
      long above = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i || !space.below(i, j)) continue;
        if (!done[j]) ready = false;
        above += c[j];
      }
      if (!ready) continue;
      c[i] = f.weights[i] - above;
      done[i] = 1;
    }
  }
  return c;
}

ConstructibleFunction from_closed_basis(const StratifiedSpace& space, const std::vector<long>& c) {
  if (c.size() != space.size()) throw ShapeError("closed-basis coefficients do not match the space");
  auto f = zero_function(space);
  for (int j = 0; j < count(space); ++j)
    for (int i = 0; i < count(space); ++i)
      if (space.below(i, j)) f.weights[i] += c[j];
  return f;
}

long eta_closure(const StratifiedSpace& space, int i, int j) {
  if (i == j) return 1;
  if (!space.below(i, j)) return 0;
  auto it = space.chi_link.find({i, j});
  if (it == space.chi_link.end()) {
    throw DataIncompleteError("link table lacks (" + space.strata[i].id + ", " + space.strata[j].id + ")");
  }
  return 1 - it->second;
}

long eta(const StratifiedSpace& space, const ConstructibleFunction& f, int i) {
  const auto c = to_closed_basis(space, f);
  long s = 0;
  for (int j = 0; j < count(space); ++j) {
    if (c[j] != 0) s += c[j] * eta_closure(space, i, j);
  }
  return s;
}

bool equidimensional(const StratifiedSpace& space) {
  const auto top = space.maximal();
  for (int t : top)
    if (space.strata[t].real_dim != space.strata[top.front()].real_dim) return false;
  return true;
}

std::vector<ConstructibleFunction> euler_obstruction_basis(const StratifiedSpace& space) {
  const int n = count(space);
  // eta(V_i, 1_{V_k}) for open indicators.
  std::vector<std::vector<long>> eo(n, std::vector<long>(n, 0));
  for (int k = 0; k < n; ++k) {
    const auto ind = indicator_open(space, k);
    for (int i = 0; i < n; ++i) eo[i][k] = eta(space, ind, i);
  }
  for (int i = 0; i < n; ++i) {
    if (eo[i][i] != 1) {
      throw SolverError("eta system is not unitriangular at row " + space.strata[i].id);
    }
  }
  std::vector<ConstructibleFunction> basis;
  for (int j = 0; j < n; ++j) {
    auto f = zero_function(space);
    std::vector<char> done(n, 0);
    // Strata of the closure of V_j, processed from the top down.
    for (int round = 0; round < n; ++round) {
      for (int i = 0; i < n; ++i) {
        if (done[i] || !space.below(i, j)) continue;
        bool ready = true;
        long s = 0;
        for (int k = 0; k < n; ++k) {
          if (k == i || !space.below(i, k) || !space.below(k, j)) continue;
          if (!done[k]) ready = false;
          s += f.weights[k] * eo[i][k];
        }
        if (!ready) continue;
        f.weights[i] = (i == j ? 1 : 0) - s;
        done[i] = 1;
      }
    }
    for (int i = 0; i < n; ++i) {
      const long e = eta(space, f, i);
      if (e != (i == j ? 1 : 0)) {
        throw SolverError("Euler obstruction basis fails at row " + space.strata[i].id);
      }
    }
    basis.push_back(std::move(f));
  }
  return basis;
}

ConstructibleFunction euler_obstruction(const StratifiedSpace& space) {
  const auto basis = euler_obstruction_basis(space);
  auto f = zero_function(space);
  for (int t : space.maximal()) f = combine(1, f, 1, basis[t]);
  return f;
}

std::string euler_obstruction_label(const StratifiedSpace& space) {
  return equidimensional(space) ? "Eu" : "eta-dual basis element";
}

BdkResult bdk_local(const StratifiedSpace& space, const ConstructibleFunction& phi) {
  check_shape(space, phi);
  const int v0 = space.minimal_index();
  const auto basis = euler_obstruction_basis(space);
  BdkResult r;
  r.lhs = phi.at(v0);
  for (int i = 0; i < count(space); ++i) {
    r.terms.push_back(basis[i].at(v0) * eta(space, phi, i));
    r.rhs += r.terms.back();
  }
  r.pass = r.lhs == r.rhs;
  return r;
}

std::vector<long> chi_strata(const StratifiedSpace& space) {
  std::vector<long> chi;
  for (const auto& s : space.strata) {
    const auto a = space.annotation("chi:" + s.id);
    if (!a || a->den != 1) throw DataIncompleteError("no integer chi annotation for stratum " + s.id);
    chi.push_back(a->num);
  }
  return chi;
}

long euler_characteristic(const StratifiedSpace& space, const ConstructibleFunction& phi,
                          const std::vector<long>& chi) {
  check_shape(space, phi);
  if (chi.size() != space.size()) throw DataIncompleteError("chi values do not cover every stratum");
  long s = 0;
  for (int i = 0; i < count(space); ++i) s += phi.at(i) * chi[i];
  return s;
}

std::vector<long> global_euler_obstructions(const StratifiedSpace& space, const std::vector<long>& chi) {
  std::vector<long> out;
  for (const auto& f : euler_obstruction_basis(space)) out.push_back(euler_characteristic(space, f, chi));
  return out;
}

BdkResult bdk_global(const StratifiedSpace& space, const ConstructibleFunction& phi,
                     const std::vector<long>& chi, const std::vector<long>& global_eu) {
  if (global_eu.size() != space.size()) throw DataIncompleteError("global Eu values do not cover every stratum");
  BdkResult r;
  r.lhs = euler_characteristic(space, phi, chi);
  for (int i = 0; i < count(space); ++i) {
    r.terms.push_back(global_eu[i] * eta(space, phi, i));
    r.rhs += r.terms.back();
  }
  r.pass = r.lhs == r.rhs;
  return r;
}

std::vector<std::pair<std::string, ConstructibleFunction>> corpus_functions(const StratifiedSpace& space) {
  std::vector<std::pair<std::string, ConstructibleFunction>> out;
  out.emplace_back("1_X", indicator_ambient(space));
  for (int i = 0; i < count(space); ++i) {
    out.emplace_back("1_cl(" + space.strata[i].id + ")", indicator_closure(space, i));
  }
  const auto basis = euler_obstruction_basis(space);
  for (int i = 0; i < count(space); ++i) out.emplace_back("Eu_cl(" + space.strata[i].id + ")", basis[i]);
  return out;
}

ConstructibleFunction parse_function(const StratifiedSpace& space, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("function: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("function must be a JSON object");
  const std::string basis = j.value("basis", std::string("open"));
  if (basis != "open" && basis != "closed") throw SchemaError("basis must be 'open' or 'closed'");
  std::vector<long> w(space.size(), 0);
  for (const auto& [key, v] : j.items()) {
    if (key == "basis") continue;
    if (!v.is_number_integer()) throw SchemaError("weight for " + key + " must be an integer");
    w.at(space.index_of(key)) = v.get<long>();
  }
  if (basis == "closed") return from_closed_basis(space, w);
  return {w};
}

}  // namespace lkcurv
