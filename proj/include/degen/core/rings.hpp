#pragma once

// Base coefficient rings for all linear algebra. Each is a principal ideal
// ring exposing the same policy surface, so the Smith form and the solvers
// in linalg.hpp are written once:
//
//   ZpN      Z_p known modulo p^N   (chain ring, uniformizer p)
//   FpSeries F_p[[z]] known modulo z^M (chain ring, uniformizer z)
//   LocZ     Z[1/S]                 (PID, units are ±S-smooth rationals)
//
// Chain rings model the untruncated DVR at finite precision: a nonzero
// element is exactly nonzero, and an element that vanishes at the working
// precision is treated as zero. Consequently annihilators of nonzero
// elements are zero.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "degen/core/errors.hpp"
#include "degen/core/primes.hpp"

namespace degen {

using BigRat = boost::multiprecision::cpp_rational;

template <class E>
struct GcdEx {
  E g, s, t, u, v;  // [s t; u v] has unit determinant, s a + t b = g, u a + v b = 0
};

inline std::int64_t mod_inverse(std::int64_t a, std::int64_t m) {
  std::int64_t g = m, x = 0, x1 = 1, a1 = ((a % m) + m) % m;
  while (a1 != 0) {
    std::int64_t q = g / a1;
    std::int64_t t = g - q * a1; g = a1; a1 = t;
    t = x - q * x1; x = x1; x1 = t;
  }
  require(g == 1, "element is not a unit");
  return ((x % m) + m) % m;
}

class ZpN {
 public:
  using elem = std::int64_t;

  ZpN() = default;
  ZpN(std::int64_t p, int N) : p_(p), N_(N), q_(ipow(p, N)) {
    require(is_prime(p), "p must be prime");
    require(N >= 1, "precision must be positive");
    require(q_ < (std::int64_t{1} << 31), "p^N too large for this backend");
  }

  std::int64_t p() const { return p_; }
  int precision() const { return N_; }
  std::int64_t modulus() const { return q_; }

  elem zero() const { return 0; }
  elem one() const { return 1 % q_; }
  elem from_int(std::int64_t a) const { return ((a % q_) + q_) % q_; }
  elem add(elem a, elem b) const { return (a + b) % q_; }
  elem sub(elem a, elem b) const { return (a - b + q_) % q_; }
  elem neg(elem a) const { return (q_ - a) % q_; }
  elem mul(elem a, elem b) const { return (a * b) % q_; }
  bool is_zero(elem a) const { return a == 0; }
  bool eq(elem a, elem b) const { return a == b; }

  /// p-adic valuation; N for zero (meaning "at least the precision").
  int val(elem a) const {
    if (a == 0) return N_;
    int v = 0;
    while (a % p_ == 0) { a /= p_; ++v; }
    return v;
  }
  bool is_unit(elem a) const { return a % p_ != 0; }
  elem inv(elem a) const { return mod_inverse(a, q_); }

  bool pivot_less(elem a, elem b) const { return val(a) < val(b); }
  bool divides(elem a, elem b) const { return val(a) <= val(b); }
  elem quo(elem b, elem a) const {
    if (b == 0) return 0;
    int v = val(a);
    std::int64_t pv = ipow(p_, v);
    return mul(b / pv, inv(a / pv));
  }
  GcdEx<elem> gcdex(elem a, elem b) const {
    if (divides(a, b)) return {a, one(), zero(), neg(quo(b, a)), one()};
    return {b, zero(), one(), one(), neg(quo(a, b))};
  }
  /// a = canonical * unit with canonical = p^val (or 0).
  std::pair<elem, elem> associate(elem a) const {
    if (a == 0) return {0, one()};
    int v = val(a);
    std::int64_t pv = ipow(p_, v);
    return {pv % q_, from_int(a / pv)};
  }
  std::string to_string(elem a) const { return std::to_string(a); }

  bool operator==(const ZpN& o) const { return p_ == o.p_ && N_ == o.N_; }

 private:
  std::int64_t p_ = 2;
  int N_ = 1;
  std::int64_t q_ = 2;
};

class FpSeries {
 public:
  using elem = std::vector<std::int64_t>;

  FpSeries() = default;
  FpSeries(std::int64_t p, int M) : p_(p), M_(M) {
    require(is_prime(p), "p must be prime");
    require(M >= 1, "precision must be positive");
    require(p < (std::int64_t{1} << 31), "p too large");
  }

  std::int64_t p() const { return p_; }
  int precision() const { return M_; }

  elem zero() const { return elem(static_cast<std::size_t>(M_), 0); }
  elem one() const { auto e = zero(); e[0] = 1 % p_; return e; }
  elem from_int(std::int64_t a) const { auto e = zero(); e[0] = ((a % p_) + p_) % p_; return e; }
  elem monomial(int k, std::int64_t c = 1) const {
    auto e = zero();
    if (k < M_) e[static_cast<std::size_t>(k)] = ((c % p_) + p_) % p_;
    return e;
  }
  elem add(const elem& a, const elem& b) const {
    elem r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] + b[i]) % p_;
    return r;
  }
  elem sub(const elem& a, const elem& b) const {
    elem r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] - b[i] + p_) % p_;
    return r;
  }
  elem neg(const elem& a) const {
    elem r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = (p_ - a[i]) % p_;
    return r;
  }
  elem mul(const elem& a, const elem& b) const {
    elem r = zero();
    for (int i = 0; i < M_; ++i) {
      if (a[static_cast<std::size_t>(i)] == 0) continue;
      for (int j = 0; i + j < M_; ++j)
        r[static_cast<std::size_t>(i + j)] =
            (r[static_cast<std::size_t>(i + j)] +
             a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)]) % p_;
    }
    return r;
  }
  bool is_zero(const elem& a) const {
    for (auto c : a) if (c != 0) return false;
    return true;
  }
  bool eq(const elem& a, const elem& b) const { return a == b; }

  /// z-adic valuation; M for zero.
  int val(const elem& a) const {
    for (int i = 0; i < M_; ++i) if (a[static_cast<std::size_t>(i)] != 0) return i;
    return M_;
  }
  bool is_unit(const elem& a) const { return a[0] != 0; }
  elem inv(const elem& a) const {
    require(is_unit(a), "element is not a unit");
    elem r = zero();
    std::int64_t c0 = mod_inverse(a[0], p_);
    r[0] = c0;
    for (int k = 1; k < M_; ++k) {
      std::int64_t s = 0;
      for (int i = 1; i <= k; ++i)
        s = (s + a[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(k - i)]) % p_;
      r[static_cast<std::size_t>(k)] = ((p_ - s) % p_) * c0 % p_;
    }
    return r;
  }
  bool pivot_less(const elem& a, const elem& b) const { return val(a) < val(b); }
  bool divides(const elem& a, const elem& b) const { return val(a) <= val(b); }
  elem shift_down(const elem& a, int v) const {
    elem r = zero();
    for (int i = v; i < M_; ++i) r[static_cast<std::size_t>(i - v)] = a[static_cast<std::size_t>(i)];
    return r;
  }
  elem shift_up(const elem& a, int v) const {
    elem r = zero();
    for (int i = 0; i + v < M_; ++i) r[static_cast<std::size_t>(i + v)] = a[static_cast<std::size_t>(i)];
    return r;
  }
  elem quo(const elem& b, const elem& a) const {
    if (is_zero(b)) return zero();
    int v = val(a), w = val(b);
    return shift_up(mul(shift_down(b, w), inv(shift_down(a, v))), w - v);
  }
  GcdEx<elem> gcdex(const elem& a, const elem& b) const {
    if (divides(a, b)) return {a, one(), zero(), neg(quo(b, a)), one()};
    return {b, zero(), one(), one(), neg(quo(a, b))};
  }
  std::pair<elem, elem> associate(const elem& a) const {
    if (is_zero(a)) return {zero(), one()};
    int v = val(a);
    return {monomial(v), shift_down(a, v)};
  }
  std::string to_string(const elem& a) const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    os << "]";
    return os.str();
  }

  bool operator==(const FpSeries& o) const { return p_ == o.p_ && M_ == o.M_; }

 private:
  std::int64_t p_ = 2;
  int M_ = 1;
};

class LocZ {
 public:
  using elem = BigRat;

  LocZ() = default;
  explicit LocZ(std::vector<std::int64_t> inverted) : S_(std::move(inverted)) {
    for (std::size_t i = 0; i < S_.size(); ++i) {
      require(is_prime(S_[i]), "inverted primes must be prime");
      require(i == 0 || S_[i - 1] < S_[i], "inverted primes must be sorted and distinct");
    }
  }

  const std::vector<std::int64_t>& inverted() const { return S_; }
  bool is_inverted(std::int64_t p) const {
    for (auto s : S_) if (s == p) return true;
    return false;
  }

  elem zero() const { return 0; }
  elem one() const { return 1; }
  elem from_int(std::int64_t a) const { return a; }
  /// Validates that the denominator only involves inverted primes.
  elem from_fraction(const BigInt& num, const BigInt& den) const {
    require(den != 0, "zero denominator");
    elem r(num, den);
    require(strip_primes(boost::multiprecision::denominator(r), S_) == 1,
            "denominator contains a prime that is not inverted");
    return r;
  }
  elem add(const elem& a, const elem& b) const { return a + b; }
  elem sub(const elem& a, const elem& b) const { return a - b; }
  elem neg(const elem& a) const { return -a; }
  elem mul(const elem& a, const elem& b) const { return a * b; }
  bool is_zero(const elem& a) const { return a == 0; }
  bool eq(const elem& a, const elem& b) const { return a == b; }

  /// |numerator| with inverted primes removed: the size used for pivoting.
  BigInt norm(const elem& a) const {
    return strip_primes(boost::multiprecision::numerator(a), S_);
  }
  bool is_unit(const elem& a) const { return a != 0 && norm(a) == 1; }
  elem inv(const elem& a) const {
    require(is_unit(a), "element is not a unit");
    return 1 / a;
  }
  bool pivot_less(const elem& a, const elem& b) const {
    if (a == 0) return false;
    if (b == 0) return true;
    return norm(a) < norm(b);
  }
  bool divides(const elem& a, const elem& b) const {
    if (b == 0) return true;
    if (a == 0) return false;
    return norm(b) % norm(a) == 0;
  }
  elem quo(const elem& b, const elem& a) const { return b == 0 ? elem(0) : b / a; }
  GcdEx<elem> gcdex(const elem& a, const elem& b) const {
    if (divides(a, b)) return {a, 1, 0, -quo(b, a), 1};
    if (divides(b, a)) return {b, 0, 1, 1, -quo(a, b)};
    BigInt na = norm(a), nb = norm(b);
    elem ua = a / elem(na), ub = b / elem(nb);
    // Integer extended gcd on the S-free parts.
    BigInt r0 = na, r1 = nb, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
    while (r1 != 0) {
      BigInt q = r0 / r1;
      BigInt tmp = r0 - q * r1; r0 = r1; r1 = tmp;
      tmp = s0 - q * s1; s0 = s1; s1 = tmp;
      tmp = t0 - q * t1; t0 = t1; t1 = tmp;
    }
    BigInt g = r0;
    return {elem(g), elem(s0) / ua, elem(t0) / ub, -elem(nb / g) / ua, elem(na / g) / ub};
  }
  std::pair<elem, elem> associate(const elem& a) const {
    if (a == 0) return {0, 1};
    BigInt n = norm(a);
    return {elem(n), a / elem(n)};
  }
  std::string to_string(const elem& a) const {
    std::ostringstream os;
    os << a;
    return os.str();
  }

  bool operator==(const LocZ& o) const { return S_ == o.S_; }

 private:
  std::vector<std::int64_t> S_;
};

}  // namespace degen
