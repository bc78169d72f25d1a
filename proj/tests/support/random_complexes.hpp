#pragma once

// Random filtered complexes over Z/p^3 whose modules are killed by p^2, so
// the exhaustive oracle applies.

#include <random>

#include "degen/spectral.hpp"

namespace degen::testing {

inline FilteredComplex<ZpN> random_filtered_complex(std::int64_t p, std::mt19937& rng) {
  auto A = make_padic(p, 3);
  const std::int64_t q = p * p;
  std::uniform_int_distribution<int> coin(0, 1), wtop(1, 2), gens(1, 2), three(0, 2);
  std::uniform_int_distribution<std::int64_t> coef(0, q - 1);
  for (;;) {
    FilteredComplex<ZpN> X;
    X.ring = A;
    X.lo = 0;
    X.hi = three(rng) == 0 ? 2 : 1;
    X.wmin = 0;
    X.wmax = wtop(rng);
    std::vector<std::vector<int>> expo;
    for (int i = X.lo; i <= X.hi; ++i) {
      auto g = static_cast<std::size_t>(gens(rng));
      Module<ZpN> C = free_module(A, g);
      std::vector<int> e;
      for (std::size_t j = 0; j < g; ++j) {
        e.push_back(1 + coin(rng));
        auto r = azero_vec(A, g);
        r[j] = A.from_int(ipow(p, e.back()));
        C.rel.push_row(r);
      }
      expo.push_back(e);
      X.C.push_back(C);
      std::vector<AMat<ZpN>> fil(static_cast<std::size_t>(X.wmax + 1));
      fil[0] = aidentity(A, g);
      AMat<ZpN> acc = amat(A, 0, g);
      for (int n = X.wmax; n >= 1; --n) {
        if (coin(rng)) {
          auto r = azero_vec(A, g);
          for (auto& x : r) x = A.from_int(coef(rng));
          acc.push_row(r);
        }
        fil[static_cast<std::size_t>(n)] = acc;
      }
      X.fil.push_back(fil);
    }
    X.d.resize(X.C.size());
    for (int i = X.lo + 1; i <= X.hi; ++i) {
      const auto k = static_cast<std::size_t>(i - X.lo);
      auto D = amat(A, X.C[k].gens, X.C[k - 1].gens);
      if (three(rng) != 0)
        for (std::size_t r = 0; r < D.rows(); ++r)
          for (std::size_t c = 0; c < D.cols(); ++c) {
            int need = std::max(0, expo[k - 1][c] - expo[k][r]);
            D(r, c) = A.from_int(coef(rng) * ipow(p, need) % q);
          }
      X.d[k] = D;
    }
    try {
      return validate(X);
    } catch (const Error&) {
    }
  }
}

}  // namespace degen::testing
