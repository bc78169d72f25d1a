#pragma once

// Pushing presentations along ring maps, and the prime-by-prime picture of
// modules over the truncated Iwasawa-type ring Λ = Z_S[q]/(q-1)^M. Elements of
// Λ are stored as polynomials in t = q - 1.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "degen/module/ext.hpp"

namespace degen {

struct ZToZero {};
struct ZToUnit {
  std::int64_t u = 1;
};
struct FrobeniusTwist {};
struct LambdaCompletion {
  std::int64_t ell = 0;
  int precision_N = 1;
};
struct LocalizedToPadic {
  std::int64_t ell = 0;
  int precision_N = 1;
};

using BaseChangeSpec = std::variant<ZToZero, ZToUnit, FrobeniusTwist, LambdaCompletion, LocalizedToPadic>;

template <class Base>
struct BaseChanged {
  Module<Base> mod;
  bool exact = true;
  int trusted_z_precision = 0;  // z-degrees below this are trustworthy
  std::string note;
};

inline int ell_valuation(BigInt n, std::int64_t ell) {
  if (n == 0) return std::numeric_limits<int>::max();
  if (n < 0) n = -n;
  int v = 0;
  while (n % ell == 0) {
    n /= ell;
    ++v;
  }
  return v;
}

inline int ell_valuation(const BigRat& x, std::int64_t ell) {
  if (x == 0) return std::numeric_limits<int>::max();
  return ell_valuation(boost::multiprecision::numerator(x), ell) -
         ell_valuation(boost::multiprecision::denominator(x), ell);
}

/// Image of an S-integer in Z/ell^N, ell not in S.
inline std::int64_t residue_mod(const ZpN& T, const BigRat& x) {
  const BigInt q = T.modulus();
  BigInt n = boost::multiprecision::numerator(x) % q;
  BigInt d = boost::multiprecision::denominator(x) % q;
  if (n < 0) n += q;
  auto dn = T.from_int(static_cast<std::int64_t>(d));
  require(T.is_unit(dn), "denominator not invertible at the target prime");
  return T.mul(T.from_int(static_cast<std::int64_t>(n)), T.inv(dn));
}

namespace detail {

template <class Src, class Tgt, class F>
Module<Tgt> push_entries(const Module<Src>& M, const Algebra<Tgt>& T, F&& f) {
  Module<Tgt> out{T, M.gens, amat(T, 0, M.gens)};
  for (std::size_t r = 0; r < M.rel.rows(); ++r) {
    AVec<Tgt> row(M.gens);
    for (std::size_t j = 0; j < M.gens; ++j) row[j] = f(M.rel(r, j));
    out.rel.push_row(row);
  }
  return out;
}

}  // namespace detail

/// z |-> 0 into Z/p^N.
inline BaseChanged<ZpN> base_change(const Module<ZpN>& M, ZToZero) {
  require(M.ring.trunc() > 1, "z |-> 0 needs the two-variable ring", ErrorKind::UnsupportedRing);
  const auto& B = M.ring.base();
  auto T = make_padic(B.p(), B.precision());
  return {detail::push_entries(M, T, [&](const auto& a) { return T.constant(a[0]); }), true, 0, ""};
}

/// z |-> u into Z/p^N. The truncation z^M = 0 is not respected by a unit,
/// so only presentations with z-free relations are pushed exactly.
inline BaseChanged<ZpN> base_change(const Module<ZpN>& M, ZToUnit spec) {
  require(M.ring.trunc() > 1, "z |-> u needs the two-variable ring", ErrorKind::UnsupportedRing);
  require(M.ring.base().is_unit(M.ring.base().from_int(spec.u)), "evaluation point must be a unit");
  auto e = evaluate_module(M, spec.u);
  BaseChanged<ZpN> out{e.mod, e.constant_entries, 0, ""};
  if (!out.exact) out.note = "relations depend on z; evaluation at a unit is representative-dependent";
  return out;
}

/// Frobenius pullback: relations r(z) become r(z^p) truncated at z^M.
inline BaseChanged<ZpN> base_change(const Module<ZpN>& M, FrobeniusTwist) {
  const auto& A = M.ring;
  require(A.trunc() > 1, "Frobenius twist needs the two-variable ring", ErrorKind::UnsupportedRing);
  const int trusted = frobenius_trusted_precision(A.trunc(), A.base().p());
  BaseChanged<ZpN> out{detail::push_entries(M, A, [&](const auto& a) { return frobenius(A, a); }), true,
                       trusted, ""};
  for (std::size_t r = 0; r < M.rel.rows(); ++r)
    for (std::size_t j = 0; j < M.gens; ++j)
      if (A.zdeg_span(M.rel(r, j)) > trusted) out.exact = false;
  if (!out.exact) out.note = "relation terms of z-degree >= " + std::to_string(trusted) + " truncated away";
  return out;
}

/// Λ -> Λ_ell modeled as Z/ell^N[z]/z^M with z = q - 1.
inline BaseChanged<ZpN> base_change(const Module<LocZ>& M, LambdaCompletion spec) {
  const auto& A = M.ring;
  require(is_prime(spec.ell), "completion prime must be prime");
  require(!A.base().is_inverted(spec.ell), "completion at an inverted prime");
  require(spec.precision_N >= 1, "precision must be positive");
  auto T = make_bk(spec.ell, spec.precision_N, A.trunc());
  auto mod = detail::push_entries(M, T, [&](const auto& a) {
    auto out = T.zero();
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = residue_mod(T.base(), a[k]);
    return out;
  });
  return {mod, true, A.trunc(), ""};
}

inline BaseChanged<ZpN> base_change(const Module<LocZ>& M, LocalizedToPadic spec) {
  const auto& A = M.ring;
  require(A.trunc() == 1, "expected the localized integers", ErrorKind::UnsupportedRing);
  require(is_prime(spec.ell), "completion prime must be prime");
  require(!A.base().is_inverted(spec.ell), "completion at an inverted prime");
  require(spec.precision_N >= 1, "precision must be positive");
  auto T = make_padic(spec.ell, spec.precision_N);
  auto mod = detail::push_entries(M, T, [&](const auto& a) { return T.constant(residue_mod(T.base(), a[0])); });
  return {mod, true, 0, ""};
}

template <class Base>
AMat<ZpN> push_matrix(const Algebra<Base>& A, const AMat<Base>& F, const PadicAlg& T, std::int64_t ell) {
  auto out = amat(T, F.rows(), F.cols());
  for (std::size_t i = 0; i < F.rows(); ++i)
    for (std::size_t j = 0; j < F.cols(); ++j)
      for (std::size_t k = 0; k < A.width(); ++k) out(i, j)[k] = residue_mod(T.base(), F(i, j)[k]);
  (void)ell;
  return out;
}

// ---------------------------------------------------------------------------
// support

struct SupportPrimes {
  bool everywhere = false;           // support is every prime outside S
  std::vector<std::int64_t> primes;  // explicit support, or primes <= bound when everywhere
  bool complete = true;              // the list is the whole support (finite case)
  BigInt content = 0;                // product of invariant factors of M/(q-1)M, 0 when infinite
};

namespace detail {

/// Rank of a rational matrix with S-integral entries reduced mod ell.
inline std::size_t rank_mod(const Mat<BigRat>& R, std::int64_t ell) {
  ZpN F(ell, 1);
  Mat<std::int64_t> X(R.rows(), R.cols(), 0);
  for (std::size_t i = 0; i < R.rows(); ++i)
    for (std::size_t j = 0; j < R.cols(); ++j) X(i, j) = residue_mod(F, R(i, j));
  if (R.rows() == 0) return 0;
  std::size_t rank = 0;
  for (auto d : la::smith(F, X).divisors) rank += !F.is_zero(d);
  return rank;
}

inline Mat<BigRat> constant_terms(const Module<LocZ>& M) {
  Mat<BigRat> R(M.rel.rows(), M.gens, BigRat(0));
  for (std::size_t i = 0; i < M.rel.rows(); ++i)
    for (std::size_t j = 0; j < M.gens; ++j) R(i, j) = M.rel(i, j)[0];
  return R;
}

}  // namespace detail

/// Primes ell outside S with M/(ell, q-1)M != 0. By Nakayama this is the
/// support of M ⊗ Λ_ell. The support is read off the invariant factors of
/// M/(q-1)M and cross-checked by F_ell ranks for every ell <= bound.
inline SupportPrimes support_primes(const Module<LocZ>& M, std::int64_t bound) {
  require(bound >= 2, "search bound must be at least 2");
  const auto& L = M.ring.base();
  auto R0 = detail::constant_terms(M);
  SupportPrimes out;
  std::vector<BigRat> divisors;
  if (R0.rows() > 0) divisors = la::smith(L, R0).divisors;
  std::size_t units = 0;
  BigInt content = 1;
  std::map<std::int64_t, int> factors;
  for (const auto& d : divisors) {
    if (L.is_zero(d)) continue;
    ++units;
    content *= L.norm(d);
    for (auto [ell, e] : factorize(L.norm(d))) factors[ell] += e;
  }
  out.everywhere = units < M.gens;
  if (out.everywhere) {
    for (auto ell : primes_up_to(bound))
      if (!L.is_inverted(ell)) out.primes.push_back(ell);
    out.complete = false;
  } else {
    out.content = content;
    for (auto [ell, e] : factors) out.primes.push_back(ell);
  }
  for (auto ell : primes_up_to(bound)) {
    if (L.is_inverted(ell)) continue;
    bool by_rank = detail::rank_mod(R0, ell) < M.gens;
    bool listed = std::find(out.primes.begin(), out.primes.end(), ell) != out.primes.end();
    if (by_rank != listed)
      fail(ErrorKind::Inconsistency, "support by invariant factors disagrees with F_" + std::to_string(ell) + " rank");
  }
  return out;
}

// ---------------------------------------------------------------------------
// zero detection

struct IsZero {};
struct NonzeroAt {
  std::int64_t ell = 0;
  int precision_N = 1;  // truncated completion precision at which the witness was verified
  std::size_t row = 0;  // generator whose image survives
};
using ZeroDetect = std::variant<IsZero, NonzeroAt>;

namespace detail {

/// Smallest prime > 1 outside S.
inline std::int64_t first_prime_outside(const LocZ& L, std::int64_t from = 2) {
  for (std::int64_t ell = from;; ++ell)
    if (is_prime(ell) && !L.is_inverted(ell)) return ell;
}

}  // namespace detail

/// f == 0 is decided on the presentation. For nonzero f the witness prime is
/// read off the invariant factors of the target (restricted to Z_S): an image
/// coordinate c against divisor d survives at ell iff v_ell(c) < v_ell(d).
/// The witness is then confirmed on the truncated completion.
inline ZeroDetect zero_detect(const ModuleMap<LocZ>& f) {
  require(verify_map(f), "map is not well-defined");
  if (is_zero_map(f)) return IsZero{};
  const auto& A = f.src.ring;
  const auto& L = A.base();
  auto RB = restrict_rows(A, rel_or_empty(f.tgt));
  const std::size_t width = f.tgt.gens * A.width();
  la::Smith<LocZ> s;
  std::vector<BigRat> divisors;
  if (RB.rows() > 0) {
    s = la::smith(L, RB);
    divisors = s.divisors;
  } else {
    s.V = la::identity(L, width);
  }
  struct Candidate {
    std::int64_t ell;
    int need;
    std::size_t row;
  };
  std::optional<Candidate> best;
  auto offer = [&](std::int64_t ell, int need, std::size_t row) {
    if (!best || ell < best->ell) best = Candidate{ell, need, row};
  };
  for (std::size_t i = 0; i < f.src.gens; ++i) {
    auto c = la::vec_mul(L, expand(A, f.F.row(i)), s.V);
    for (std::size_t j = 0; j < width; ++j) {
      if (L.is_zero(c[j])) continue;
      BigRat d = j < divisors.size() ? divisors[j] : BigRat(0);
      if (L.is_zero(d)) {
        auto ell = detail::first_prime_outside(L);
        offer(ell, ell_valuation(c[j], ell) + 1, i);
        continue;
      }
      for (auto [ell, e] : factorize(L.norm(d))) {
        int vc = ell_valuation(c[j], ell);
        if (vc < e) offer(ell, e, i);
      }
    }
  }
  if (!best) fail(ErrorKind::Inconsistency, "nonzero map with no surviving coordinate");
  NonzeroAt w{best->ell, std::max(1, best->need), best->row};
  auto src = base_change(f.src, LambdaCompletion{w.ell, w.precision_N}).mod;
  auto tgt = base_change(f.tgt, LambdaCompletion{w.ell, w.precision_N}).mod;
  auto g = make_map(src, tgt, push_matrix(A, f.F, tgt.ring, w.ell));
  if (is_zero_map(g))
    fail(ErrorKind::Inconsistency, "witness prime does not survive on the truncated completion");
  return w;
}

}  // namespace degen
