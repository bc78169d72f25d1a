#pragma once

// Brute-force Ext^1 order by enumerating cochains; only for tiny instances.

#include <algorithm>
#include <set>

#include "degen/module/ext.hpp"

namespace degen::ext_oracle {

using Poly = std::vector<std::int64_t>;

// Truncated polynomial arithmetic mod (q, z^M), written out by hand.
inline Poly pmul(const Poly& a, const Poly& b, std::int64_t q) {
  Poly c(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % q;
  return c;
}

inline Poly padd(const Poly& a, const Poly& b, std::int64_t q) {
  Poly c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = (a[i] + b[i]) % q;
  return c;
}

inline Poly to_poly(const PadicAlg::elem& a, std::int64_t q) {
  Poly out;
  for (auto c : a) out.push_back(((c % q) + q) % q);
  return out;
}

/// |Ext^1(C, A/q)| for q = p^b as |Z^1| / |B^1|, enumerating all
// cochains in Hom(F1, X) = X^r with X = (Z/q)[z]/z^M.
inline std::int64_t ext_order_by_cocycles(const Module<ZpN>& C, std::int64_t q) {
  const auto& A = C.ring;
  const std::size_t M = A.width(), r = C.rel.rows(), g = C.gens;
  auto Syz = kernel_into(A, C.rel, amat(A, 0, g));
  auto all_elems = [&] {
    std::vector<Poly> xs{Poly(M, 0)};
    for (std::size_t k = 0; k < M; ++k) {
      std::vector<Poly> next;
      for (const auto& x : xs)
        for (std::int64_t c = 0; c < q; ++c) {
          auto y = x;
          y[k] = c;
          next.push_back(y);
        }
      xs = std::move(next);
    }
    return xs;
  }();
  auto tuples = [&](std::size_t n) {
    std::vector<std::vector<Poly>> out{{}};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::vector<Poly>> next;
      for (const auto& t : out)
        for (const auto& x : all_elems) {
          auto u = t;
          u.push_back(x);
          next.push_back(u);
        }
      out = std::move(next);
    }
    return out;
  };
  std::int64_t cocycles = 0;
  for (const auto& phi : tuples(r)) {
    bool ok = true;
    for (std::size_t l = 0; l < Syz.rows() && ok; ++l) {
      Poly acc(M, 0);
      for (std::size_t k = 0; k < r; ++k) acc = padd(acc, pmul(to_poly(Syz(l, k), q), phi[k], q), q);
      ok = std::all_of(acc.begin(), acc.end(), [](auto c) { return c == 0; });
    }
    cocycles += ok;
  }
  std::set<std::vector<Poly>> bounds;
  for (const auto& psi : tuples(g)) {
    std::vector<Poly> img;
    for (std::size_t k = 0; k < r; ++k) {
      Poly acc(M, 0);
      for (std::size_t j = 0; j < g; ++j) acc = padd(acc, pmul(to_poly(C.rel(k, j), q), psi[j], q), q);
      img.push_back(acc);
    }
    bounds.insert(img);
  }
  return cocycles / static_cast<std::int64_t>(bounds.size());
}

}  // namespace degen::ext_oracle
