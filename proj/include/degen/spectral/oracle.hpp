#pragma once

// Ground truth by brute force: every C_i is enumerated as a finite abelian
// group, and all verdicts are recomputed from element sets. Splitting is
// decided by purity, which for finite abelian p-groups is equivalent to being
// a direct summand.

#include <cmath>
#include <functional>
#include <vector>

#include "degen/spectral/filtered.hpp"

namespace degen {

struct OracleReport {
  bool degenerate = true;
  bool saturated = true;
  bool split = true;
  std::vector<int> homology_length;  // log_p |H_i|, one per degree
  std::vector<int> graded_length;    // sum over n of log_p |E_1^n|
};

namespace oracle_detail {

using Set = std::vector<char>;

struct Group {
  std::int64_t q = 1;
  std::size_t g = 0;
  std::vector<int> id_of;                       // ambient code -> coset id
  std::vector<std::vector<std::int64_t>> rep;   // coset id -> representative

  std::size_t code(const std::vector<std::int64_t>& v) const {
    std::size_t c = 0;
    for (auto x : v) c = c * static_cast<std::size_t>(q) + static_cast<std::size_t>(((x % q) + q) % q);
    return c;
  }
  std::size_t order() const { return rep.size(); }
  int add(int a, int b) const {
    auto v = rep[static_cast<std::size_t>(a)];
    for (std::size_t j = 0; j < g; ++j) v[j] += rep[static_cast<std::size_t>(b)][j];
    return id_of[code(v)];
  }
  int scale(int a, std::int64_t c) const {
    auto v = rep[static_cast<std::size_t>(a)];
    for (auto& x : v) x = (x * c) % q;
    return id_of[code(v)];
  }
  int of(const std::vector<std::int64_t>& v) const { return id_of[code(v)]; }
};

inline Group enumerate(const Module<ZpN>& M, std::size_t ambient_limit) {
  Group G;
  G.q = M.ring.base().modulus();
  G.g = M.gens;
  std::size_t total = 1;
  for (std::size_t j = 0; j < G.g; ++j) {
    total *= static_cast<std::size_t>(G.q);
    require(total <= ambient_limit, "instance too large for the oracle");
  }
  std::vector<std::vector<std::int64_t>> all(total, std::vector<std::int64_t>(G.g));
  for (std::size_t c = 0; c < total; ++c) {
    auto t = c;
    for (std::size_t j = G.g; j-- > 0;) {
      all[c][j] = static_cast<std::int64_t>(t % static_cast<std::size_t>(G.q));
      t /= static_cast<std::size_t>(G.q);
    }
  }
  // span of the relations
  std::vector<char> in_span(total, 0);
  std::vector<std::size_t> span{0}, frontier{0};
  in_span[0] = 1;
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (auto c : frontier)
      for (std::size_t r = 0; r < M.rel.rows(); ++r) {
        auto v = all[c];
        for (std::size_t j = 0; j < G.g; ++j) v[j] += M.rel(r, j)[0];
        auto w = G.code(v);
        if (!in_span[w]) {
          in_span[w] = 1;
          span.push_back(w);
          next.push_back(w);
        }
      }
    frontier = std::move(next);
  }
  G.id_of.assign(total, -1);
  for (std::size_t c = 0; c < total; ++c) {
    if (G.id_of[c] >= 0) continue;
    int id = static_cast<int>(G.rep.size());
    G.rep.push_back(all[c]);
    for (auto s : span) {
      auto v = all[c];
      for (std::size_t j = 0; j < G.g; ++j) v[j] += all[s][j];
      G.id_of[G.code(v)] = id;
    }
  }
  return G;
}

inline Set closure(const Group& G, const std::vector<int>& gens) {
  Set s(G.order(), 0);
  s[0] = 1;  // the zero vector has code 0 and id 0
  std::vector<int> frontier{0};
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int a : frontier)
      for (int b : gens) {
        int c = G.add(a, b);
        if (!s[static_cast<std::size_t>(c)]) {
          s[static_cast<std::size_t>(c)] = 1;
          next.push_back(c);
        }
      }
    frontier = std::move(next);
  }
  return s;
}

inline std::size_t count(const Set& s) {
  std::size_t n = 0;
  for (char c : s) n += c != 0;
  return n;
}

inline Set meet(const Set& a, const Set& b) {
  Set s(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] && b[i];
  return s;
}

inline Set sum(const Group& G, const Set& a, const Set& b) {
  std::vector<int> gens;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] || b[i]) gens.push_back(static_cast<int>(i));
  return closure(G, gens);
}

inline Set image(const Group& G, const Set& a, const std::function<int(int)>& f, std::size_t tgt_order) {
  Set s(tgt_order, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i]) s[static_cast<std::size_t>(f(static_cast<int>(i)))] = 1;
  (void)G;
  return s;
}

inline int log_p(std::size_t n, std::int64_t p) {
  int k = 0;
  while (n > 1) {
    require(n % static_cast<std::size_t>(p) == 0, "group order is not a prime power", ErrorKind::Inconsistency);
    n /= static_cast<std::size_t>(p);
    ++k;
  }
  return k;
}

}  // namespace oracle_detail

/// Requires TruncatedPadic coefficients and every module killed by p^(N-1),
/// so that residues mod p^N describe honest finite groups.
inline OracleReport oracle(const FilteredComplex<ZpN>& X, std::size_t max_elements = 4096,
                           std::size_t ambient_limit = std::size_t{1} << 20) {
  using namespace oracle_detail;
  const auto& A = X.ring;
  require(A.trunc() == 1, "oracle needs a single-variable ring", ErrorKind::UnsupportedRing);
  const auto p = A.base().p();
  const auto top = ipow(p, A.base().precision() - 1);
  std::vector<Group> G;
  for (int i = X.lo; i <= X.hi; ++i) {
    G.push_back(enumerate(X.module(i), ambient_limit));
    require(G.back().order() <= max_elements, "instance too large for the oracle");
    for (std::size_t a = 0; a < G.back().order(); ++a)
      require(G.back().scale(static_cast<int>(a), top) == 0,
              "module not killed by p^(N-1); outside the oracle's exact range");
  }
  auto grp = [&](int i) -> const Group& { return G[static_cast<std::size_t>(i - X.lo)]; };
  auto to_ids = [&](int i, const AMat<ZpN>& M) {
    std::vector<int> ids;
    for (std::size_t r = 0; r < M.rows(); ++r) {
      std::vector<std::int64_t> v;
      for (std::size_t j = 0; j < M.cols(); ++j) v.push_back(M(r, j)[0]);
      ids.push_back(grp(i).of(v));
    }
    return ids;
  };
  auto fil = [&](int i, int n) { return closure(grp(i), to_ids(i, X.fil_gens(i, n))); };
  auto empty = [&](int i) {
    Set s(grp(i).order(), 0);
    s[0] = 1;
    return s;
  };
  auto dmap = [&](int i) {
    return [&, i](int a) {
      if (!X.in_range(i - 1)) return 0;
      const auto& v = grp(i).rep[static_cast<std::size_t>(a)];
      auto D = X.diff(i);
      std::vector<std::int64_t> w(D.cols(), 0);
      for (std::size_t r = 0; r < D.rows(); ++r)
        for (std::size_t j = 0; j < D.cols(); ++j) w[j] += v[r] * D(r, j)[0];
      return grp(i - 1).of(w);
    };
  };
  auto preimage_in = [&](int i, const Set& S, const Set& target) {
    // elements of S whose differential lands in target
    Set out(S.size(), 0);
    auto d = dmap(i);
    for (std::size_t a = 0; a < S.size(); ++a)
      if (S[a]) out[a] = X.in_range(i - 1) ? target[static_cast<std::size_t>(d(static_cast<int>(a)))] : 1;
    return out;
  };
  auto bound = [&](int i, const Set& S_next) {
    if (!X.in_range(i + 1)) return empty(i);
    return image(grp(i + 1), S_next, dmap(i + 1), grp(i).order());
  };

  OracleReport out;
  for (int i = X.lo; i <= X.hi; ++i) {
    const auto& Gi = grp(i);
    auto lower_zero = X.in_range(i - 1) ? empty(i - 1) : Set{};
    auto cyc = [&](const Set& S) { return X.in_range(i - 1) ? preimage_in(i, S, lower_zero) : S; };
    auto all = fil(i, X.wmin);
    auto Z = cyc(all);
    auto B = bound(i, X.in_range(i + 1) ? fil(i + 1, X.wmin) : Set{});
    out.homology_length.push_back(log_p(count(Z) / count(B), p));

    int graded = 0;
    for (int n = X.wmin; n <= X.wmax; ++n) {
      auto Fn = fil(i, n);
      auto Fn1 = fil(i, n + 1);
      auto Z1 = X.in_range(i - 1) ? preimage_in(i, Fn, fil(i - 1, n + 1)) : Fn;
      auto den = sum(Gi, Fn1, bound(i, X.in_range(i + 1) ? fil(i + 1, n) : Set{}));
      auto den_in = meet(den, Z1);
      graded += log_p(count(Z1) / count(den_in), p);
    }
    out.graded_length.push_back(graded);

    for (int n = X.wmin + 1; n <= X.wmax; ++n) {
      auto Zn = cyc(fil(i, n));
      auto Bn = bound(i, X.in_range(i + 1) ? fil(i + 1, n) : Set{});
      // H_i(fil^n) -> H_i injective iff Zn ∩ B = Bn
      if (meet(Zn, B) != Bn) {
        out.degenerate = false;
        continue;
      }
      // image A = (Zn + B)/B inside H = Z/B; A is a summand iff pure
      auto AB = sum(Gi, Zn, B);
      for (int k = 1; k < A.base().precision(); ++k) {
        auto pk = ipow(p, k);
        std::vector<int> pz, pa;
        for (std::size_t a = 0; a < Z.size(); ++a) {
          if (Z[a]) pz.push_back(Gi.scale(static_cast<int>(a), pk));
          if (AB[a]) pa.push_back(Gi.scale(static_cast<int>(a), pk));
        }
        auto pkH = sum(Gi, closure(Gi, pz), B);
        auto pkA = sum(Gi, closure(Gi, pa), B);
        if (meet(AB, pkH) != pkA) out.split = false;
      }
    }
  }
  // finite modules have no torsion-free part: saturation is degeneracy
  out.saturated = out.degenerate;
  out.split = out.split && out.degenerate;
  return out;
}

}  // namespace degen
