#pragma once

// Ring specifications and the truncated algebras A = B[z]/(z^M) over a base
// ring B from core/rings.hpp. Every coefficient family is one of these:
//
//   TruncatedPadic        ZpN,      M = 1
//   TruncatedPowerSeries  FpSeries, M = 1 (the series variable lives in B)
//   LocalizedIntegers     LocZ,     M = 1
//   TruncatedBK           ZpN,      z-truncation M, with an Eisenstein E
//   TruncatedLambda       LocZ,     (q-1)-truncation M

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "degen/core/errors.hpp"
#include "degen/core/linalg.hpp"
#include "degen/core/primes.hpp"
#include "degen/core/rings.hpp"

namespace degen {

struct EisensteinSpec {
  std::vector<std::int64_t> coefficients;  // ascending: c_0, ..., c_e = 1
  int ramification_e = 1;

  static EisensteinSpec linear(std::int64_t p) { return {{-p, 1}, 1}; }

  void validate(std::int64_t p) const {
    require(ramification_e >= 1, "ramification index must be positive");
    require(coefficients.size() == static_cast<std::size_t>(ramification_e) + 1,
            "Eisenstein polynomial must have e+1 coefficients");
    require(coefficients.back() == 1, "Eisenstein polynomial must be monic");
    auto c0 = coefficients.front();
    require(c0 % p == 0 && (c0 / p) % p != 0,
            "Eisenstein constant term must have p-valuation exactly 1");
    for (std::size_t i = 1; i + 1 < coefficients.size(); ++i)
      require(coefficients[i] % p == 0, "Eisenstein middle coefficients must be divisible by p");
  }
  bool operator==(const EisensteinSpec&) const = default;
};

struct LocalizedIntegers {
  std::vector<std::int64_t> inverted_primes;
  bool operator==(const LocalizedIntegers&) const = default;
};
struct TruncatedPadic {
  std::int64_t p = 2;
  int precision_N = 1;
  bool operator==(const TruncatedPadic&) const = default;
};
struct TruncatedPowerSeries {
  std::int64_t p = 2;
  int precision_M = 1;
  bool operator==(const TruncatedPowerSeries&) const = default;
};
struct TruncatedBK {
  std::int64_t p = 2;
  int precision_N = 1;
  int precision_M = 1;
  EisensteinSpec eisenstein = EisensteinSpec::linear(2);
  bool operator==(const TruncatedBK&) const = default;
};
struct TruncatedLambda {
  std::vector<std::int64_t> inverted_primes;
  int precision_M = 1;
  bool operator==(const TruncatedLambda&) const = default;
};

using RingSpec = std::variant<LocalizedIntegers, TruncatedPadic, TruncatedPowerSeries,
                              TruncatedBK, TruncatedLambda>;

inline std::string family_name(const RingSpec& r) {
  static const char* names[] = {"LocalizedIntegers", "TruncatedPadic", "TruncatedPowerSeries",
                                "TruncatedBK", "TruncatedLambda"};
  return names[r.index()];
}

inline void validate_primes(const std::vector<std::int64_t>& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    require(is_prime(s[i]), "inverted primes must be prime");
    require(i == 0 || s[i - 1] < s[i], "inverted primes must be ascending and distinct");
  }
}

inline void validate(const RingSpec& spec) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LocalizedIntegers>) {
          validate_primes(r.inverted_primes);
        } else if constexpr (std::is_same_v<T, TruncatedPadic>) {
          require(is_prime(r.p), "p must be prime");
          require(r.precision_N >= 1, "precision must be positive");
        } else if constexpr (std::is_same_v<T, TruncatedPowerSeries>) {
          require(is_prime(r.p), "p must be prime");
          require(r.precision_M >= 1, "precision must be positive");
        } else if constexpr (std::is_same_v<T, TruncatedBK>) {
          require(is_prime(r.p), "p must be prime");
          require(r.precision_N >= 1 && r.precision_M >= 1, "precision must be positive");
          r.eisenstein.validate(r.p);
        } else {
          validate_primes(r.inverted_primes);
          require(r.precision_M >= 1, "precision must be positive");
        }
      },
      spec);
}

/// A = B[z]/(z^M). Elements are coefficient vectors of length M.
template <class Base>
class Algebra {
 public:
  using base_ring = Base;
  using belem = typename Base::elem;
  using elem = std::vector<belem>;

  Algebra() = default;
  Algebra(Base base, int M) : base_(std::move(base)), M_(M) {
    require(M >= 1, "precision must be positive");
  }

  const Base& base() const { return base_; }
  int trunc() const { return M_; }
  std::size_t width() const { return static_cast<std::size_t>(M_); }

  elem zero() const { return elem(width(), base_.zero()); }
  elem one() const { return constant(base_.one()); }
  elem constant(const belem& c) const {
    auto e = zero();
    e[0] = c;
    return e;
  }
  elem from_int(std::int64_t a) const { return constant(base_.from_int(a)); }
  /// c * z^k, zero when k >= M.
  elem monomial(int k, const belem& c) const {
    auto e = zero();
    if (k < M_) e[static_cast<std::size_t>(k)] = c;
    return e;
  }
  elem var() const { return monomial(1, base_.one()); }

  elem add(const elem& a, const elem& b) const {
    elem r(width());
    for (std::size_t i = 0; i < width(); ++i) r[i] = base_.add(a[i], b[i]);
    return r;
  }
  elem sub(const elem& a, const elem& b) const {
    elem r(width());
    for (std::size_t i = 0; i < width(); ++i) r[i] = base_.sub(a[i], b[i]);
    return r;
  }
  elem neg(const elem& a) const {
    elem r(width());
    for (std::size_t i = 0; i < width(); ++i) r[i] = base_.neg(a[i]);
    return r;
  }
  elem mul(const elem& a, const elem& b) const {
    auto r = zero();
    for (std::size_t i = 0; i < width(); ++i) {
      if (base_.is_zero(a[i])) continue;
      for (std::size_t j = 0; i + j < width(); ++j)
        r[i + j] = base_.add(r[i + j], base_.mul(a[i], b[j]));
    }
    return r;
  }
  elem scale(const belem& c, const elem& a) const {
    elem r(width());
    for (std::size_t i = 0; i < width(); ++i) r[i] = base_.mul(c, a[i]);
    return r;
  }
  /// Multiplication by z^k.
  elem shift(const elem& a, int k) const {
    auto r = zero();
    for (int i = 0; i + k < M_; ++i)
      r[static_cast<std::size_t>(i + k)] = a[static_cast<std::size_t>(i)];
    return r;
  }
  elem pow(const elem& a, int k) const {
    auto r = one();
    for (int i = 0; i < k; ++i) r = mul(r, a);
    return r;
  }
  bool is_zero(const elem& a) const {
    for (const auto& c : a)
      if (!base_.is_zero(c)) return false;
    return true;
  }
  bool eq(const elem& a, const elem& b) const {
    for (std::size_t i = 0; i < width(); ++i)
      if (!base_.eq(a[i], b[i])) return false;
    return true;
  }
  bool is_unit(const elem& a) const { return base_.is_unit(a[0]); }
  elem inv(const elem& a) const {
    require(is_unit(a), "element is not a unit");
    auto c0 = base_.inv(a[0]);
    auto r = zero();
    r[0] = c0;
    for (std::size_t k = 1; k < width(); ++k) {
      auto s = base_.zero();
      for (std::size_t i = 1; i <= k; ++i) s = base_.add(s, base_.mul(a[i], r[k - i]));
      r[k] = base_.mul(base_.neg(s), c0);
    }
    return r;
  }
  /// Highest k with z^k | a (M for zero).
  int zdeg_low(const elem& a) const {
    for (int i = 0; i < M_; ++i)
      if (!base_.is_zero(a[static_cast<std::size_t>(i)])) return i;
    return M_;
  }
  /// Lowest k with a in B + Bz + ... + Bz^{k-1} (0 for zero).
  int zdeg_span(const elem& a) const {
    for (int i = M_; i > 0; --i)
      if (!base_.is_zero(a[static_cast<std::size_t>(i - 1)])) return i;
    return 0;
  }

  std::string to_string(const elem& a) const {
    std::string s = "[";
    for (std::size_t i = 0; i < width(); ++i) s += (i ? "," : "") + base_.to_string(a[i]);
    return s + "]";
  }

 private:
  Base base_;
  int M_ = 1;
};

using PadicAlg = Algebra<ZpN>;
using SeriesAlg = Algebra<FpSeries>;
using LocAlg = Algebra<LocZ>;

inline PadicAlg make_padic(std::int64_t p, int N) { return {ZpN(p, N), 1}; }
inline SeriesAlg make_series(std::int64_t p, int M) { return {FpSeries(p, M), 1}; }
inline LocAlg make_localized(std::vector<std::int64_t> S) { return {LocZ(std::move(S)), 1}; }
inline PadicAlg make_bk(std::int64_t p, int N, int M) { return {ZpN(p, N), M}; }
inline LocAlg make_lambda(std::vector<std::int64_t> S, int M) { return {LocZ(std::move(S)), M}; }

inline PadicAlg algebra_of(const TruncatedPadic& r) { return make_padic(r.p, r.precision_N); }
inline SeriesAlg algebra_of(const TruncatedPowerSeries& r) { return make_series(r.p, r.precision_M); }
inline LocAlg algebra_of(const LocalizedIntegers& r) { return make_localized(r.inverted_primes); }
inline PadicAlg algebra_of(const TruncatedBK& r) { return make_bk(r.p, r.precision_N, r.precision_M); }
inline LocAlg algebra_of(const TruncatedLambda& r) { return make_lambda(r.inverted_primes, r.precision_M); }

// ---------------------------------------------------------------------------
// normalize

/// Raw coefficient data: integers or fractions num/den.
struct RawCoeff {
  BigInt num = 0;
  BigInt den = 1;
};

inline ZpN::elem normalize_coeff(const ZpN& r, const RawCoeff& c) {
  BigInt q = r.modulus();
  BigInt n = ((c.num % q) + q) % q;
  BigInt d = ((c.den % q) + q) % q;
  require(d % r.p() != 0, "denominator is not a unit mod p");
  return r.mul(static_cast<std::int64_t>(n), r.inv(static_cast<std::int64_t>(d)));
}

inline LocZ::elem normalize_coeff(const LocZ& r, const RawCoeff& c) {
  return r.from_fraction(c.num, c.den);
}

template <class Base>
typename Algebra<Base>::elem normalize(const Algebra<Base>& A, const std::vector<RawCoeff>& raw) {
  require(!raw.empty(), "empty coefficient vector");
  auto e = A.zero();
  for (std::size_t i = 0; i < raw.size() && i < A.width(); ++i)
    e[i] = normalize_coeff(A.base(), raw[i]);
  return e;
}

/// Power series over F_p: raw coefficients are the z-expansion.
inline SeriesAlg::elem normalize(const SeriesAlg& A, const std::vector<RawCoeff>& raw) {
  require(!raw.empty(), "empty coefficient vector");
  const auto& F = A.base();
  auto s = F.zero();
  for (std::size_t i = 0; i < raw.size() && i < static_cast<std::size_t>(F.precision()); ++i) {
    BigInt p = F.p();
    BigInt n = ((raw[i].num % p) + p) % p;
    BigInt d = ((raw[i].den % p) + p) % p;
    require(d != 0, "denominator is not a unit mod p");
    s[i] = static_cast<std::int64_t>(n) * mod_inverse(static_cast<std::int64_t>(d), F.p()) % F.p();
  }
  return A.constant(s);
}

// ---------------------------------------------------------------------------
// valuation

enum class Uniformizer { P, Z };

struct Valuation {
  bool at_least_precision = false;
  int value = 0;
  bool operator==(const Valuation&) const = default;
  static Valuation precision() { return {true, 0}; }
  static Valuation exact(int v) { return {false, v}; }
};

inline Valuation valuation(const PadicAlg& A, const PadicAlg::elem& x, Uniformizer u) {
  if (A.is_zero(x)) return Valuation::precision();
  if (u == Uniformizer::Z) {
    if (A.trunc() == 1)
      fail(ErrorKind::UnsupportedRing, "z is not a uniformizer of the p-adic ring");
    return Valuation::exact(A.zdeg_low(x));
  }
  int v = A.base().precision();
  for (const auto& c : x) v = std::min(v, A.base().val(c));
  return Valuation::exact(v);
}

inline Valuation valuation(const SeriesAlg& A, const SeriesAlg::elem& x, Uniformizer u) {
  if (u == Uniformizer::P)
    fail(ErrorKind::UnsupportedRing, "p is zero in the residue power series ring");
  if (A.is_zero(x)) return Valuation::precision();
  return Valuation::exact(A.base().val(x[0]));
}

inline Valuation valuation(const LocAlg&, const LocAlg::elem&, Uniformizer) {
  fail(ErrorKind::UnsupportedRing, "localized integer rings have no single uniformizer");
}

// ---------------------------------------------------------------------------
// Frobenius: identity on W = Z_p coefficients (resp. F_p), z -> z^p.

inline int frobenius_trusted_precision(int M, std::int64_t p) {
  return static_cast<int>((M + p - 1) / p);
}

inline PadicAlg::elem frobenius(const PadicAlg& A, const PadicAlg::elem& x) {
  auto p = A.base().p();
  auto r = A.zero();
  for (std::size_t i = 0; i < A.width(); ++i) {
    auto j = static_cast<std::size_t>(p) * i;
    if (j < A.width()) r[j] = x[i];
  }
  return r;
}

inline SeriesAlg::elem frobenius(const SeriesAlg& A, const SeriesAlg::elem& x) {
  const auto& F = A.base();
  auto s = F.zero();
  auto M = static_cast<std::size_t>(F.precision());
  for (std::size_t i = 0; i < M; ++i) {
    auto j = static_cast<std::size_t>(F.p()) * i;
    if (j < M) s[j] = x[0][i];
  }
  return A.constant(s);
}

template <class Base>
Mat<typename Algebra<Base>::elem> frobenius(const Algebra<Base>& A,
                                            const Mat<typename Algebra<Base>::elem>& m) {
  auto out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = frobenius(A, m(i, j));
  return out;
}

/// Keep only z-degrees below k.
template <class Base>
typename Algebra<Base>::elem truncate_z(const Algebra<Base>& A, typename Algebra<Base>::elem x,
                                        int k) {
  for (int i = std::max(k, 0); i < A.trunc(); ++i) x[static_cast<std::size_t>(i)] = A.base().zero();
  return x;
}

// ---------------------------------------------------------------------------
// Eisenstein polynomial

inline PadicAlg::elem eisenstein_poly(const PadicAlg& A, const EisensteinSpec& E) {
  auto e = A.zero();
  for (std::size_t i = 0; i < E.coefficients.size() && i < A.width(); ++i)
    e[i] = A.base().from_int(E.coefficients[i]);
  return e;
}

inline PadicAlg::elem eisenstein_eval(const PadicAlg& A, const EisensteinSpec& E, int r) {
  require(r >= 0, "power must be non-negative");
  return A.pow(eisenstein_poly(A, E), r);
}

}  // namespace degen
