#include <doctest.h>

#include "lkcurv/constructible.hpp"

using namespace lkcurv;

namespace {
long eu0(const std::string& name) {
  const auto sp = builtin(name);
  return euler_obstruction(sp).at(sp.minimal_index());
}
}  // namespace

TEST_CASE("local Euler obstructions of the corpus") {
  CHECK(eu0("smooth_line") == 1);
  CHECK(eu0("node") == 2);
  CHECK(eu0("cusp") == 2);
  CHECK(eu0("three_lines") == 3);
  // cone over a smooth plane curve of degree d: 2d - d^2
  for (int d = 1; d <= 3; ++d) CHECK(eu0("cone_over_plane_curve_" + std::to_string(d)) == 2 * d - d * d);
}

TEST_CASE("eta is dual to the Euler obstruction basis") {
  for (const auto& n : builtin_names()) {
    const auto sp = builtin(n);
    if (!sp.is_complex()) continue;
    const auto basis = euler_obstruction_basis(sp);
    for (std::size_t i = 0; i < sp.size(); ++i)
      for (std::size_t j = 0; j < sp.size(); ++j) {
        CAPTURE(n);
        CHECK(eta(sp, basis[j], i) == (i == j ? 1 : 0));
      }
  }
}

TEST_CASE("eta on closures and linearity") {
  const auto sp = builtin("node");
  const int v0 = sp.index_of("V0"), l1 = sp.index_of("L1"), l2 = sp.index_of("L2");
  CHECK(eta_closure(sp, v0, l1) == 0);
  CHECK(eta(sp, indicator_ambient(sp), v0) == -1);
  CHECK(eta_closure(sp, l1, l2) == 0);
  const auto f = indicator_closure(sp, l1), g = indicator_open(sp, v0);
  const auto h = combine(2, f, -3, g);
  for (int i = 0; i < static_cast<int>(sp.size()); ++i) CHECK(eta(sp, h, i) == 2 * eta(sp, f, i) - 3 * eta(sp, g, i));
  CHECK(from_closed_basis(sp, to_closed_basis(sp, h)) == h);
}

TEST_CASE("local bdk holds on every corpus function") {
  for (const auto& n : builtin_names()) {
    const auto sp = builtin(n);
    if (sp.kind != SpaceKind::germ || !sp.is_complex()) continue;
    for (const auto& [label, phi] : corpus_functions(sp)) {
      CAPTURE(n);
      CAPTURE(label);
      const auto r = bdk_local(sp, phi);
      CHECK(r.pass);
      CHECK(r.lhs == r.rhs);
    }
  }
}

TEST_CASE("global Euler characteristics and bdk") {
  const auto nodal = builtin("nodal_cubic_global");
  const auto chi = chi_strata(nodal);
  CHECK(euler_characteristic(nodal, indicator_ambient(nodal), chi) == 0);
  const auto geu = global_euler_obstructions(nodal, chi);
  for (const auto& [label, phi] : corpus_functions(nodal)) {
    CAPTURE(label);
    CHECK(bdk_global(nodal, phi, chi, geu).pass);
  }
  const auto par = builtin("parabola_global");
  CHECK(euler_characteristic(par, indicator_ambient(par), chi_strata(par)) == 1);
}

TEST_CASE("function parsing") {
  const auto sp = builtin("node");
  const auto f = parse_function(sp, R"({"V0": 2, "L1": -1})");
  CHECK(f.at(sp.index_of("V0")) == 2);
  CHECK(f.at(sp.index_of("L2")) == 0);
  const auto g = parse_function(sp, R"({"L1": 1, "basis": "closed"})");
  CHECK(g == indicator_closure(sp, sp.index_of("L1")));
  CHECK(euler_obstruction_label(sp) == "Eu");
}
