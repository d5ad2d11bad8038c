#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lkcurv/constructible.hpp"
#include "lkcurv/variety.hpp"

namespace lkcurv {

// ---------------------------------------------------------------------------
// Polynomial text: sums of terms like "3*x0^2*x1", "-2i*x2", "(1+2i)*x0", "x1".

namespace {

class PolyParser {
 public:
  PolyParser(const std::string& s, int nvars) : s_(s), n_(nvars) {}

  ComplexPoly parse() {
    std::vector<Monomial> terms;
    skip();
    if (pos_ >= s_.size()) throw SchemaError("empty polynomial");
    bool first = true;
    while (pos_ < s_.size()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected + or -");
      }
      first = false;
      Monomial m = term();
      m.coeff *= sign;
      terms.push_back(std::move(m));
      skip();
    }
    return ComplexPoly(n_, std::move(terms));
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("polynomial '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }

  double number() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s_.substr(pos_), &used);
    } catch (const std::exception&) {
      fail("bad number");
    }
    pos_ += used;
    return v;
  }

  cplx factor_coeff() {
    if (peek() == '(') {
      ++pos_;
      skip();
      cplx c = 0.0;
      bool any = false;
      while (peek() != ')') {
        if (pos_ >= s_.size()) fail("unclosed parenthesis");
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') {
          sign = peek() == '-' ? -1.0 : 1.0;
          ++pos_;
          skip();
        }
        c += sign * scalar();
        any = true;
        skip();
      }
      ++pos_;
      if (!any) fail("empty parenthesis");
      return c;
    }
    return scalar();
  }

  cplx scalar() {
    if (peek() == 'i') {
      ++pos_;
      return {0.0, 1.0};
    }
    const double v = number();
    if (peek() == 'i') {
      ++pos_;
      return {0.0, v};
    }
    return {v, 0.0};
  }

  Monomial term() {
    Monomial m;
    m.coeff = 1.0;
    m.exps.assign(n_, 0);
    bool any = false;
    while (true) {
      skip();
      const char c = peek();
      if (c == 'x') {
        ++pos_;
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("variable index expected");
        int idx = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) idx = idx * 10 + (s_[pos_++] - '0');
        if (idx >= n_) fail("variable index out of range");
        int e = 1;
        skip();
        if (peek() == '^') {
          ++pos_;
          skip();
          e = 0;
          if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("exponent expected");
          while (std::isdigit(static_cast<unsigned char>(peek()))) e = e * 10 + (s_[pos_++] - '0');
        }
        m.exps[idx] += e;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(' || c == 'i') {
        m.coeff *= factor_coeff();
      } else {
        fail("unexpected character");
      }
      any = true;
      skip();
      if (peek() == '*') {
        ++pos_;
        continue;
      }
      break;
    }
    if (!any) fail("empty term");
    return m;
  }

  const std::string& s_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

ComplexPoly parse_poly(const std::string& text, int nvars) { return PolyParser(text, nvars).parse(); }

Annotation parse_rational(const std::string& text, const std::string& derivation) {
  Annotation a;
  a.derivation = derivation;
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    const std::string num = text.substr(0, slash);
    a.num = std::stol(num, &used);
    if (used != num.size()) throw SchemaError("bad rational '" + text + "'");
    if (slash != std::string::npos) {
      const std::string den = text.substr(slash + 1);
      a.den = std::stol(den, &used);
      if (used != den.size() || a.den == 0) throw SchemaError("bad rational '" + text + "'");
    }
  } catch (const std::logic_error&) {
    throw SchemaError("bad rational '" + text + "'");
  }
  if (a.den < 0) {
    a.den = -a.den;
    a.num = -a.num;
  }
  const long g = std::gcd(a.num, a.den);
  if (g > 1) {
    a.num /= g;
    a.den /= g;
  }
  return a;
}

// ---------------------------------------------------------------------------

int StratifiedSpace::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < strata.size(); ++i)
    if (strata[i].id == id) return static_cast<int>(i);
  throw LookupError("unknown stratum '" + id + "' in " + name);
}

void StratifiedSpace::finalize() {
  const std::size_t n = strata.size();
  order_.assign(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) order_[i][i] = 1;
  for (auto [i, j] : closure_pairs) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
      throw LookupError("closure pair refers to a missing stratum");
    }
    order_[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (order_[i][k] && order_[k][j]) order_[i][j] = 1;
}

bool StratifiedSpace::below(int i, int j) const {
  if (order_.size() != strata.size()) throw std::logic_error("StratifiedSpace not finalized");
  return order_[i][j] != 0;
}

std::vector<int> StratifiedSpace::maximal() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    bool top = true;
    for (std::size_t j = 0; j < strata.size(); ++j)
      if (i != j && below(i, j)) top = false;
    if (top) out.push_back(static_cast<int>(i));
  }
  return out;
}

int StratifiedSpace::minimal_index() const {
  for (std::size_t i = 0; i < strata.size(); ++i) {
    bool bottom = true;
    for (std::size_t j = 0; j < strata.size(); ++j)
      if (!below(i, j)) bottom = false;
    if (bottom) return static_cast<int>(i);
  }
  throw LookupError("space " + name + " has no least stratum");
}

int StratifiedSpace::dim() const {
  int d = 0;
  for (const auto& s : strata) d = std::max(d, s.real_dim);
  return d;
}

bool StratifiedSpace::is_complex() const {
  return std::all_of(strata.begin(), strata.end(), [](const Stratum& s) { return s.is_complex; });
}

int StratifiedSpace::chi(int i, int j) const {
  if (i == j) return 0;
  auto it = chi_link.find({i, j});
  if (it == chi_link.end()) {
    const std::string col = j == kAmbient ? "X" : strata.at(j).id;
    throw LookupError("link table has no entry for (" + strata.at(i).id + ", " + col + ")");
  }
  return it->second;
}

std::optional<Annotation> StratifiedSpace::annotation(const std::string& key) const {
  auto it = oracle.find(key);
  if (it == oracle.end()) return std::nullopt;
  return it->second;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& f : failures) os << f.invariant << ": " << f.witness << "\n";
  return os.str();
}

namespace {

std::string fmt_point(const VectorXd& x) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

ValidationReport validate(const StratifiedSpace& space) {
  ValidationReport rep;
  auto fail = [&](std::string inv, std::string w) { rep.failures.push_back({std::move(inv), std::move(w)}); };
  const int n = static_cast<int>(space.size());
  if (n == 0) {
    fail("nonempty", "space has no strata");
    return rep;
  }
  std::set<std::string> ids;
  for (const auto& s : space.strata) {
    if (!ids.insert(s.id).second) fail("unique ids", "duplicate stratum id " + s.id);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && space.below(i, j) && space.below(j, i)) {
        fail("order", "cycle between " + space.strata[i].id + " and " + space.strata[j].id);
      }
      if (i != j && space.below(i, j) && space.strata[i].real_dim >= space.strata[j].real_dim) {
        fail("frontier", space.strata[i].id + " < " + space.strata[j].id + " without a dimension drop");
      }
    }
  }
  for (const auto& s : space.strata) {
    if (s.real_dim < 0 || s.real_dim > space.ambient_real_dim) fail("dimension", s.id + " real_dim out of range");
    if (s.is_complex && s.real_dim % 2 != 0) fail("parity", s.id + " is complex with odd real_dim");
    if (!s.is_complex && !s.alpha && !s.alpha_fn) fail("alpha data", s.id + " is real without alpha data");
    if (s.real_dim == 0) {
      if (s.point.size() != space.ambient_real_dim) fail("point", s.id + " lacks an ambient point");
      continue;
    }
    if (s.charts.empty()) fail("charts", s.id + " has no chart");
    for (std::size_t c = 0; c < s.charts.size(); ++c) {
      const auto& ch = *s.charts[c];
      const std::string tag = s.id + " chart " + std::to_string(c);
      if (ch.sheet_count() < 1) fail("sheet_count", tag + " declares sheet_count < 1");
      if (ch.dim() != s.real_dim || ch.ambient_dim() != space.ambient_real_dim) {
        fail("chart dims", tag + " dimensions disagree with the stratum");
        continue;
      }
      Rng rng(mix_key(0x5A17, s.id), c);
      int found = 0;
      const double lo = space.kind == SpaceKind::germ ? 0.05 : 0.5;
      for (std::size_t k = 0; k < 32; ++k) {
        const ChartSample smp = ch.sample_shell(rng, lo, 2 * lo, k, 32);
        if (smp.weight <= 0.0) continue;
        ++found;
        if (!(ch.gram(smp.u) > 0.0)) {
          fail("rank", tag + " Jacobian rank-deficient at " + fmt_point(smp.u));
          break;
        }
      }
      if (found == 0) fail("germ closure", tag + " has no points near the base point");
    }
  }
  if (space.kind == SpaceKind::germ) {
    int minimal = 0;
    for (int i = 0; i < n; ++i) {
      bool bottom = true;
      for (int j = 0; j < n; ++j)
        if (!space.below(i, j)) bottom = false;
      if (bottom) ++minimal;
    }
    if (minimal != 1) fail("germ", "need exactly one least stratum V_0");
    for (const auto& s : space.strata) {
      if (s.real_dim == 0 && s.point.size() == space.ambient_real_dim && s.point.norm() > 1e-12) {
        fail("germ", s.id + " does not contain 0");
      }
    }
  }
  if (space.is_complex()) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && space.below(i, j) && !space.chi_link.count({i, j})) {
          fail("link table", "missing (" + space.strata[i].id + ", " + space.strata[j].id + ")");
        }
      }
      if (!space.chi_link.count({i, kAmbient})) fail("link table", "missing (" + space.strata[i].id + ", X)");
    }
    if (rep.ok()) {
      const auto one = indicator_ambient(space);
      for (int i = 0; i < n; ++i) {
        if (eta(space, one, i) != 1 - space.chi(i, kAmbient)) {
          fail("link table", "ambient column of " + space.strata[i].id + " disagrees with the closure columns");
        }
      }
    }
    for (int t : space.maximal()) {
      auto it = space.chi_link.find({t, kAmbient});
      if (it != space.chi_link.end() && it->second != 0) {
        fail("link table", "top stratum " + space.strata[t].id + " has eta(V, 1_X) != 1");
      }
    }
  }
  return rep;
}

StratifiedSpace restrict_to_closure(const StratifiedSpace& space, const std::string& id) {
  const int j = space.index_of(id);
  StratifiedSpace out;
  out.name = space.name + "|" + id;
  out.ambient_real_dim = space.ambient_real_dim;
  out.kind = space.kind;
  out.infinity_decay = space.infinity_decay;
  std::vector<int> keep, remap(space.size(), -1);
  for (int i = 0; i < static_cast<int>(space.size()); ++i) {
    if (space.below(i, j)) {
      remap[i] = static_cast<int>(keep.size());
      keep.push_back(i);
      out.strata.push_back(space.strata[i]);
    }
  }
  for (auto [a, b] : space.closure_pairs) {
    if (remap[a] >= 0 && remap[b] >= 0) out.closure_pairs.emplace_back(remap[a], remap[b]);
  }
  for (const auto& [key, v] : space.chi_link) {
    const auto [a, b] = key;
    if (b == kAmbient) continue;
    if (remap[a] >= 0 && remap[b] >= 0) out.chi_link[{remap[a], remap[b]}] = v;
  }
  for (int i : keep) {
    if (i == j) {
      out.chi_link[{remap[i], kAmbient}] = 0;
    } else if (space.chi_link.count({i, j})) {
      out.chi_link[{remap[i], kAmbient}] = space.chi_link.at({i, j});
    }
  }
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// JSON variety files.

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  return j.at(key);
}

std::vector<cplx> parse_center(const json& j, int n) {
  std::vector<cplx> c;
  for (const auto& e : j) {
    if (e.is_array() && e.size() == 2) {
      c.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      c.emplace_back(e.get<double>(), 0.0);
    }
  }
  if (static_cast<int>(c.size()) != n) throw SchemaError("chart center has the wrong length");
  return c;
}

std::vector<ChartPtr> parse_charts(const json& spec, const std::string& where) {
  const std::string type = need(spec, "type", where).get<std::string>();
  const int sheets = spec.value("sheet_count", 1);
  if (type == "explicit") {
    const int params = need(spec, "params", where).get<int>();
    std::vector<ComplexPoly> comps;
    for (const auto& c : need(spec, "components", where)) comps.push_back(parse_poly(c.get<std::string>(), params));
    std::vector<cplx> center;
    if (spec.contains("center")) center = parse_center(spec.at("center"), params);
    if (comps.empty()) throw SchemaError(where + ": explicit chart without components");
    return {std::make_shared<PolynomialChart>(std::move(comps), sheets, std::move(center))};
  }
  if (type == "implicit") {
    const int nvars = need(spec, "nvars", where).get<int>();
    ComplexPoly f = parse_poly(need(spec, "f", where).get<std::string>(), nvars);
    const bool homogeneous = spec.value("homogeneous", true);
    std::vector<int> solved;
    if (spec.contains("solve")) {
      solved.push_back(spec.at("solve").get<int>());
    } else {
      for (int a = 0; a < nvars; ++a) solved.push_back(a);
    }
    std::vector<ChartPtr> out;
    for (int c : solved) {
      ImplicitHypersurfaceChart probe(f, c, 0, homogeneous);
      std::vector<int> branches;
      if (spec.contains("branch")) {
        branches.push_back(spec.at("branch").get<int>());
      } else {
        for (int b = 0; b < probe.branch_count(); ++b) branches.push_back(b);
      }
      for (int b : branches) out.push_back(std::make_shared<ImplicitHypersurfaceChart>(f, c, b, homogeneous));
    }
    if (sheets != 1) throw SchemaError(where + ": implicit charts are single-sheeted");
    return out;
  }
  if (type == "builtin") {
    const StratifiedSpace src = builtin(need(spec, "name", where).get<std::string>());
    return src.strata.at(src.index_of(need(spec, "stratum", where).get<std::string>())).charts;
  }
  throw SchemaError(where + ": unknown chart type '" + type + "'");
}

}  // namespace

StratifiedSpace load_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("parse error: ") + e.what());
  }
  StratifiedSpace sp;
  try {
    sp.name = doc.value("name", std::string("file"));
    sp.ambient_real_dim = need(doc, "ambient_real_dim", "space").get<int>();
    const std::string kind = need(doc, "kind", "space").get<std::string>();
    if (kind == "germ") {
      sp.kind = SpaceKind::germ;
    } else if (kind == "global") {
      sp.kind = SpaceKind::global;
    } else {
      throw SchemaError("kind must be 'germ' or 'global'");
    }
    sp.infinity_decay = doc.value("infinity_decay", 1.0);
    if (!(sp.infinity_decay > 0.0)) throw SchemaError("infinity_decay must be positive");
    for (const auto& js : need(doc, "strata", "space")) {
      Stratum s;
      s.id = need(js, "id", "stratum").get<std::string>();
      const std::string where = "stratum " + s.id;
      s.real_dim = need(js, "real_dim", where).get<int>();
      s.is_complex = js.value("is_complex", true);
      if (js.contains("alpha")) {
        s.alpha = js.at("alpha").get<double>();
        s.alpha_label = "constant";
      }
      if (s.real_dim == 0) {
        s.point = VectorXd::Zero(sp.ambient_real_dim);
        if (js.contains("point")) {
          const auto& p = js.at("point");
          if (static_cast<int>(p.size()) != sp.ambient_real_dim) throw SchemaError(where + ": point length");
          for (int k = 0; k < sp.ambient_real_dim; ++k) s.point[k] = p[k].get<double>();
        }
      } else {
        const json& charts = need(js, "charts", where);
        for (const auto& c : charts) {
          for (auto& ch : parse_charts(c, where)) s.charts.push_back(std::move(ch));
        }
      }
      sp.strata.push_back(std::move(s));
    }
    if (doc.contains("closure_order")) {
      for (const auto& p : doc.at("closure_order")) {
        if (!p.is_array() || p.size() != 2) throw SchemaError("closure_order entries are pairs");
        sp.closure_pairs.emplace_back(sp.index_of(p[0].get<std::string>()), sp.index_of(p[1].get<std::string>()));
      }
    }
    sp.finalize();
    if (doc.contains("link_table")) {
      for (const auto& t : doc.at("link_table")) {
        if (!t.is_array() || t.size() != 3) throw SchemaError("link_table entries are triples");
        const int i = sp.index_of(t[0].get<std::string>());
        const std::string col = t[1].get<std::string>();
        const int j = col == "X" ? kAmbient : sp.index_of(col);
        sp.chi_link[{i, j}] = t[2].get<int>();
      }
    }
    if (doc.contains("oracle_annotations")) {
      for (const auto& [key, v] : doc.at("oracle_annotations").items()) {
        if (v.is_object()) {
          const json& val = need(v, "value", key);
          sp.oracle[key] = parse_rational(val.is_string() ? val.get<std::string>() : std::to_string(val.get<long>()),
                                          v.value("derivation", std::string()));
        } else if (v.is_string()) {
          sp.oracle[key] = parse_rational(v.get<std::string>());
        } else {
          sp.oracle[key] = parse_rational(std::to_string(v.get<long>()));
        }
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema error: ") + e.what());
  } catch (const LookupError& e) {
    throw SchemaError(std::string("schema error: ") + e.what());
  }
  if (sp.is_complex()) {
    const int n = static_cast<int>(sp.size());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && sp.below(i, j) && !sp.chi_link.count({i, j})) {
          throw SchemaError("link_table lacks (" + sp.strata[i].id + ", " + sp.strata[j].id + ")");
        }
      }
      if (!sp.chi_link.count({i, kAmbient})) throw SchemaError("link_table lacks (" + sp.strata[i].id + ", X)");
    }
  }
  const ValidationReport rep = validate(sp);
  if (!rep.ok()) throw ValidationError("validation failed:\n" + rep.summary());
  return sp;
}

StratifiedSpace load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_json(ss.str());
}

}  // namespace lkcurv
