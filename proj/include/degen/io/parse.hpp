#pragma once

// JSON input layer. Elements are coefficient vectors only; every rejection
// carries the JSON pointer of the offending value.

#include <json.hpp>

#include <optional>
#include <regex>
#include <set>
#include <string>

#include "degen/bk/structure.hpp"
#include "degen/cw_ktheory.hpp"
#include "degen/local_global.hpp"
#include "degen/spectral.hpp"

namespace degen::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : Error(ErrorKind::InvalidInput, "at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// A JSON value together with its location in the document.
struct Node {
  const Json& j;
  std::string ptr;

  Node operator[](const std::string& key) const {
    if (!j.is_object()) fail_here("expected an object");
    auto it = j.find(key);
    if (it == j.end()) Node{j, ptr + "/" + key}.fail_here("missing required field");
    return {*it, ptr + "/" + key};
  }
  Node operator[](std::size_t i) const { return {j.at(i), ptr + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key); }
  std::size_t size() const { return j.size(); }

  [[noreturn]] void fail_here(const std::string& what) const { throw SchemaError(ptr, what); }

  const Node& object(std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail_here("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!ok.count(it.key())) Node{it.value(), ptr + "/" + it.key()}.fail_here("unknown field");
    return *this;
  }
  const Node& array() const {
    if (!j.is_array()) fail_here("expected an array");
    return *this;
  }
  std::int64_t integer() const {
    if (!j.is_number_integer()) fail_here("expected an integer");
    if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      fail_here("integer out of range");
    return j.get<std::int64_t>();
  }
  int small(int lo, int hi) const {
    auto v = integer();
    if (v < lo || v > hi) fail_here("expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }
  std::size_t count(std::size_t hi = 1u << 16) const {
    auto v = integer();
    if (v < 0 || static_cast<std::size_t>(v) > hi) fail_here("expected a count in [0, " + std::to_string(hi) + "]");
    return static_cast<std::size_t>(v);
  }
  bool boolean() const {
    if (!j.is_boolean()) fail_here("expected true or false");
    return j.get<bool>();
  }
  std::string string() const {
    if (!j.is_string()) fail_here("expected a string");
    return j.get<std::string>();
  }
};

inline Node root(const Json& j) { return {j, ""}; }

inline Json parse_text(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", source + " is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// ring specs

inline std::vector<std::int64_t> parse_primes(const Node& n) {
  n.array();
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    auto p = n[i].integer();
    if (!is_prime(p)) n[i].fail_here(std::to_string(p) + " is not prime");
    if (!out.empty() && out.back() >= p) n[i].fail_here("primes must be ascending and distinct");
    out.push_back(p);
  }
  return out;
}

inline std::int64_t parse_prime(const Node& n) {
  auto p = n.integer();
  if (p < 2 || p > 1000003 || !is_prime(p)) n.fail_here(std::to_string(p) + " is not a supported prime");
  return p;
}

inline EisensteinSpec parse_eisenstein(const Node& n, std::int64_t p) {
  n.object({"coefficients"});
  auto c = n["coefficients"].array();
  EisensteinSpec E;
  for (std::size_t i = 0; i < c.size(); ++i) E.coefficients.push_back(c[i].integer());
  E.ramification_e = static_cast<int>(E.coefficients.size()) - 1;
  try {
    E.validate(p);
  } catch (const Error& e) {
    n.fail_here(e.what());
  }
  return E;
}

inline RingSpec parse_ring(const Node& n) {
  const auto family = n["family"].string();
  auto prec = [&](const char* key) { return n[key].small(1, 64); };
  RingSpec out;
  if (family == "LocalizedIntegers") {
    n.object({"family", "S"});
    out = LocalizedIntegers{parse_primes(n["S"])};
  } else if (family == "TruncatedPadic") {
    n.object({"family", "p", "N"});
    out = TruncatedPadic{parse_prime(n["p"]), prec("N")};
  } else if (family == "TruncatedPowerSeries") {
    n.object({"family", "p", "M"});
    out = TruncatedPowerSeries{parse_prime(n["p"]), prec("M")};
  } else if (family == "TruncatedBK") {
    n.object({"family", "p", "N", "M", "eisenstein"});
    auto p = parse_prime(n["p"]);
    auto E = n.has("eisenstein") ? parse_eisenstein(n["eisenstein"], p) : EisensteinSpec::linear(p);
    out = TruncatedBK{p, prec("N"), prec("M"), E};
  } else if (family == "TruncatedLambda") {
    n.object({"family", "S", "M"});
    out = TruncatedLambda{parse_primes(n["S"]), prec("M")};
  } else {
    n["family"].fail_here("unknown ring family '" + family + "'");
  }
  try {
    validate(out);
  } catch (const Error& e) {
    n.fail_here(e.what());
  }
  // moduli must fit the 64-bit residue arithmetic
  if (const auto* r = std::get_if<TruncatedPadic>(&out))
    if (r->precision_N * std::log2(double(r->p)) > 30) n.fail_here("p^N exceeds 2^30");
  if (const auto* r = std::get_if<TruncatedBK>(&out))
    if (r->precision_N * std::log2(double(r->p)) > 30) n.fail_here("p^N exceeds 2^30");
  return out;
}

// ---------------------------------------------------------------------------
// coefficients and elements

inline Json coeff_json(std::int64_t v) { return v; }

inline Json coeff_json(const BigInt& v) {
  if (v >= INT64_MIN && v <= INT64_MAX) return static_cast<std::int64_t>(v);
  return v.str();
}

inline Json coeff_json(const BigRat& v) {
  if (boost::multiprecision::denominator(v) == 1) return coeff_json(BigInt(boost::multiprecision::numerator(v)));
  return boost::multiprecision::numerator(v).str() + "/" + boost::multiprecision::denominator(v).str();
}

/// Integer or "n/d" string, exactly as written.
inline RawCoeff raw_coeff(const Node& n) {
  if (n.j.is_number_integer()) return {BigInt(n.integer()), 1};
  if (!n.j.is_string()) n.fail_here("expected an integer or a string \"n/d\"");
  static const std::regex re(R"((-?[0-9]+)(?:/([0-9]+))?)");
  std::smatch m;
  const auto s = n.string();
  if (!std::regex_match(s, m, re)) n.fail_here("malformed coefficient '" + s + "'");
  RawCoeff c{BigInt(m[1].str()), m[2].matched ? BigInt(m[2].str()) : BigInt(1)};
  if (c.den == 0) n.fail_here("zero denominator");
  return c;
}

[[noreturn]] inline void non_canonical(const Node& n, const Json& canonical) {
  n.fail_here("non-canonical coefficient " + n.j.dump() + "; write " + canonical.dump());
}

inline ZpN::elem parse_coeff(const ZpN& R, const Node& n) {
  if (!n.j.is_number_integer()) n.fail_here("expected an integer residue");
  auto c = raw_coeff(n);
  BigInt q = R.modulus();
  auto v = static_cast<std::int64_t>(((c.num % q) + q) % q);
  if (BigInt(v) != c.num) non_canonical(n, v);
  return v;
}

inline LocZ::elem parse_coeff(const LocZ& R, const Node& n) {
  auto c = raw_coeff(n);
  BigRat v(c.num, c.den);
  auto den = BigInt(boost::multiprecision::denominator(v));
  if (strip_primes(den, R.inverted()) != 1) {
    std::string S;
    for (auto p : R.inverted()) S += (S.empty() ? "" : ",") + std::to_string(p);
    n.fail_here("denominator " + den.str() + " is not invertible in Z[1/{" + S + "}]");
  }
  auto canonical = coeff_json(v);
  if (canonical != n.j) non_canonical(n, canonical);
  return v;
}

inline std::int64_t parse_fp(std::int64_t p, const Node& n) {
  if (!n.j.is_number_integer()) n.fail_here("expected an integer residue");
  auto c = n.integer();
  auto v = ((c % p) + p) % p;
  if (v != c) non_canonical(n, v);
  return v;
}

template <class Base>
AElem<Base> parse_elem(const Algebra<Base>& A, const Node& n) {
  n.array();
  if (n.size() == 0) n.fail_here("empty coefficient vector");
  if (n.size() > A.width())
    n.fail_here("coefficient vector longer than the truncation " + std::to_string(A.width()) +
                "; drop the terms of degree >= " + std::to_string(A.width()));
  auto e = A.zero();
  for (std::size_t k = 0; k < n.size(); ++k) e[k] = parse_coeff(A.base(), n[k]);
  return e;
}

/// Over F_p[[z]]/z^M the vector lists the series coefficients.
inline SeriesAlg::elem parse_elem(const SeriesAlg& A, const Node& n) {
  n.array();
  const auto& F = A.base();
  if (n.size() == 0) n.fail_here("empty coefficient vector");
  if (n.size() > static_cast<std::size_t>(F.precision()))
    n.fail_here("coefficient vector longer than the truncation " + std::to_string(F.precision()));
  auto s = F.zero();
  for (std::size_t k = 0; k < n.size(); ++k) s[k] = parse_fp(F.p(), n[k]);
  return A.constant(s);
}

template <class T>
Json trimmed(std::vector<T> v) {
  while (v.size() > 1 && v.back() == T(0)) v.pop_back();
  Json out = Json::array();
  for (const auto& c : v) out.push_back(coeff_json(c));
  return out;
}

inline Json elem_json(const PadicAlg&, const PadicAlg::elem& e) { return trimmed(e); }
inline Json elem_json(const LocAlg&, const LocAlg::elem& e) { return trimmed(e); }
inline Json elem_json(const SeriesAlg&, const SeriesAlg::elem& e) { return trimmed(e[0]); }

template <class Base>
AMat<Base> parse_matrix(const Algebra<Base>& A, const Node& n, std::optional<std::size_t> rows,
                        std::size_t cols) {
  n.array();
  if (rows && n.size() != *rows)
    n.fail_here("expected " + std::to_string(*rows) + " rows, found " + std::to_string(n.size()));
  auto out = amat(A, n.size(), cols);
  for (std::size_t i = 0; i < n.size(); ++i) {
    auto row = n[i];
    row.array();
    if (row.size() != cols)
      row.fail_here("expected " + std::to_string(cols) + " entries, found " + std::to_string(row.size()));
    for (std::size_t k = 0; k < cols; ++k) out(i, k) = parse_elem(A, row[k]);
  }
  return out;
}

template <class Base>
Json matrix_json(const Algebra<Base>& A, const AMat<Base>& X) {
  Json out = Json::array();
  for (std::size_t i = 0; i < X.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < X.cols(); ++k) row.push_back(elem_json(A, X(i, k)));
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// modules, maps, sequences

template <class Base>
Module<Base> parse_module(const Algebra<Base>& A, const Node& n) {
  n.object({"gens", "relations"});
  Module<Base> M{A, n["gens"].count(), {}};
  M.rel = n.has("relations") ? parse_matrix(A, n["relations"], std::nullopt, M.gens) : amat(A, 0, M.gens);
  return M;
}

template <class Base>
Json module_json(const Module<Base>& M) {
  return {{"gens", M.gens}, {"relations", matrix_json(M.ring, rel_or_empty(M))}};
}

/// Shape checks are pointer-tagged; well-definedness failures name the matrix.
template <class Base>
ModuleMap<Base> checked_map(const Module<Base>& src, const Module<Base>& tgt, const Node& n) {
  auto F = parse_matrix(src.ring, n, src.gens, tgt.gens);
  try {
    return make_map(src, tgt, F);
  } catch (const Error& e) {
    n.fail_here(e.what());
  }
}

template <class Base>
ModuleMap<Base> parse_map(const Algebra<Base>& A, const Node& n) {
  n.object({"source", "target", "matrix"});
  auto src = parse_module(A, n["source"]), tgt = parse_module(A, n["target"]);
  return checked_map(src, tgt, n["matrix"]);
}

template <class Base>
Json map_json(const ModuleMap<Base>& f) {
  return {{"source", module_json(f.src)}, {"target", module_json(f.tgt)}, {"matrix", matrix_json(f.src.ring, f.F)}};
}

template <class Base>
ShortExactSequence<Base> parse_ses(const Algebra<Base>& A, const Node& n) {
  n.object({"A", "B", "C", "inject", "surject"});
  auto a = parse_module(A, n["A"]), b = parse_module(A, n["B"]), c = parse_module(A, n["C"]);
  auto i = checked_map(a, b, n["inject"]);
  auto q = checked_map(b, c, n["surject"]);
  try {
    return make_ses(i, q);
  } catch (const Error& e) {
    n.fail_here(e.what());
  }
}

template <class Base>
Json ses_json(const ShortExactSequence<Base>& s) {
  const auto& A = s.B.ring;
  return {{"A", module_json(s.A)},
          {"B", module_json(s.B)},
          {"C", module_json(s.C)},
          {"inject", matrix_json(A, s.inject.F)},
          {"surject", matrix_json(A, s.surject.F)}};
}

// ---------------------------------------------------------------------------
// filtered complexes

template <class Base>
FilteredComplex<Base> parse_complex(const Algebra<Base>& A, const Node& n) {
  n.object({"lo", "hi", "wmin", "wmax", "modules", "filtration", "differentials"});
  FilteredComplex<Base> X;
  X.ring = A;
  X.lo = n["lo"].small(-64, 64);
  X.hi = n["hi"].small(X.lo, 64);
  X.wmin = n["wmin"].small(-64, 64);
  X.wmax = n["wmax"].small(X.wmin, 64);
  const auto nd = static_cast<std::size_t>(X.hi - X.lo + 1), nw = static_cast<std::size_t>(X.wmax - X.wmin + 1);
  auto mods = n["modules"].array();
  if (mods.size() != nd) mods.fail_here("expected " + std::to_string(nd) + " modules, one per degree");
  for (std::size_t k = 0; k < nd; ++k) X.C.push_back(parse_module(A, mods[k]));
  auto fil = n["filtration"].array();
  if (fil.size() != nd) fil.fail_here("expected " + std::to_string(nd) + " filtrations, one per degree");
  for (std::size_t k = 0; k < nd; ++k) {
    auto steps = fil[k].array();
    if (steps.size() != nw) steps.fail_here("expected " + std::to_string(nw) + " steps, one per weight");
    X.fil.emplace_back();
    for (std::size_t w = 0; w < nw; ++w) X.fil.back().push_back(parse_matrix(A, steps[w], std::nullopt, X.C[k].gens));
  }
  X.d.resize(nd);
  X.d[0] = amat(A, X.C[0].gens, 0);
  if (n.has("differentials")) {
    auto d = n["differentials"].array();
    if (d.size() != nd - 1) d.fail_here("expected " + std::to_string(nd - 1) + " differentials d_i, i = lo+1..hi");
    for (std::size_t k = 1; k < nd; ++k) X.d[k] = parse_matrix(A, d[k - 1], X.C[k].gens, X.C[k - 1].gens);
  } else {
    for (std::size_t k = 1; k < nd; ++k) X.d[k] = amat(A, X.C[k].gens, X.C[k - 1].gens);
  }
  try {
    return validate(std::move(X));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    n.fail_here(e.what());
  }
}

template <class Base>
Json complex_json(const FilteredComplex<Base>& X) {
  Json mods = Json::array(), fil = Json::array(), d = Json::array();
  for (int i = X.lo; i <= X.hi; ++i) {
    const auto k = static_cast<std::size_t>(i - X.lo);
    mods.push_back(module_json(X.C[k]));
    Json steps = Json::array();
    for (const auto& G : X.fil[k]) steps.push_back(matrix_json(X.ring, G));
    fil.push_back(std::move(steps));
    if (k) d.push_back(matrix_json(X.ring, X.d[k]));
  }
  return {{"lo", X.lo}, {"hi", X.hi}, {"wmin", X.wmin}, {"wmax", X.wmax},
          {"modules", mods}, {"filtration", fil}, {"differentials", d}};
}

// ---------------------------------------------------------------------------
// Breuil-Kisin modules

inline BKModule parse_bk(const PadicAlg& A, const EisensteinSpec& E, const Node& n) {
  n.object({"module", "phi", "s", "r"});
  auto M = parse_module(A, n["module"]);
  auto Phi = parse_matrix(A, n["phi"], M.gens, M.gens);
  const int r = n["r"].small(0, 64);
  const int s = n.has("s") ? n["s"].small(0, r) : 0;
  try {
    return make_bk_module(M, Phi, s, r, E);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidInput) throw;
    n.fail_here(e.what());
  }
}

inline Json bk_json(const BKModule& B) {
  return {{"module", module_json(B.M)}, {"phi", matrix_json(B.ring(), B.phi.F)}, {"s", B.s}, {"r", B.r}};
}

inline Tower parse_tower(const BKModule& B, const Node& n) {
  n.array();
  if (n.size() == 0) n.fail_here("a tower needs at least one step");
  Tower T;
  for (std::size_t i = 0; i < n.size(); ++i) T.steps.push_back(parse_matrix(B.ring(), n[i], std::nullopt, B.gens()));
  return T;
}

// ---------------------------------------------------------------------------
// CW complexes

inline CWComplex parse_cw(const Node& n) {
  n.object({"cells", "boundaries"});
  auto cells = n["cells"].array();
  if (cells.size() == 0) cells.fail_here("at least one dimension is needed");
  CWComplex X;
  for (std::size_t k = 0; k < cells.size(); ++k) X.cells.push_back(cells[k].count(64));
  auto bd = n.has("boundaries") ? std::optional<Node>(n["boundaries"].array()) : std::nullopt;
  if (bd && bd->size() != cells.size() - 1)
    bd->fail_here("expected " + std::to_string(cells.size() - 1) + " boundary matrices");
  for (std::size_t k = 1; k < cells.size(); ++k) {
    IntMat D(X.cells[k], X.cells[k - 1], 0);
    if (bd) {
      auto m = (*bd)[k - 1].array();
      if (m.size() != X.cells[k]) m.fail_here("expected one row per " + std::to_string(k) + "-cell");
      for (std::size_t i = 0; i < m.size(); ++i) {
        auto row = m[i].array();
        if (row.size() != X.cells[k - 1]) row.fail_here("expected one entry per " + std::to_string(k - 1) + "-cell");
        for (std::size_t j = 0; j < row.size(); ++j) D(i, j) = row[j].integer();
      }
    }
    X.boundaries.push_back(std::move(D));
  }
  try {
    validate(X);
  } catch (const Error& e) {
    n.fail_here(e.what());
  }
  return X;
}

inline Json cw_json(const CWComplex& X) {
  Json bd = Json::array();
  for (const auto& D : X.boundaries) {
    Json m = Json::array();
    for (std::size_t i = 0; i < D.rows(); ++i) {
      Json row = Json::array();
      for (std::size_t j = 0; j < D.cols(); ++j) row.push_back(D(i, j));
      m.push_back(std::move(row));
    }
    bd.push_back(std::move(m));
  }
  return {{"cells", X.cells}, {"boundaries", bd}};
}

}  // namespace degen::io
