#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

namespace degen {

using BigInt = boost::multiprecision::cpp_int;

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::int64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

inline std::vector<std::int64_t> primes_up_to(std::int64_t bound) {
  std::vector<std::int64_t> out;
  for (std::int64_t n = 2; n <= bound; ++n)
    if (is_prime(n)) out.push_back(n);
  return out;
}

/// Prime factorization by trial division; fine for the desk-scale contents
/// that show up in presentations. Keys are primes, values multiplicities.
inline std::map<std::int64_t, int> factorize(BigInt n) {
  std::map<std::int64_t, int> out;
  if (n < 0) n = -n;
  if (n < 2) return out;
  for (std::int64_t d = 2; BigInt(d) * d <= n; d += (d == 2 ? 1 : 2)) {
    while (n % d == 0) {
      ++out[d];
      n /= d;
    }
  }
  if (n > 1) {
    // Leftover factor is prime; desk-scale inputs keep it within int64.
    out[static_cast<std::int64_t>(n)] += 1;
  }
  return out;
}

/// Removes every factor of the listed primes from n (sign dropped).
inline BigInt strip_primes(BigInt n, const std::vector<std::int64_t>& primes) {
  if (n < 0) n = -n;
  if (n == 0) return n;
  for (auto p : primes)
    while (n % p == 0) n /= p;
  return n;
}

inline std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace degen
