#pragma once

// Cellular cohomology of finite CW complexes and their K-theory after
// inverting M! with M = floor((d+1)/2): reduced K^0 and K^-1 are read off as
// even and odd reduced cohomology. The skeletal trace re-derives the answer
// from the cofiber sequences of consecutive skeleta with actual induced maps.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "degen/module_algebra.hpp"

namespace degen {

using IntMat = Mat<std::int64_t>;

struct CWComplex {
  std::vector<std::size_t> cells;  // cells[k] = number of k-cells
  std::vector<IntMat> boundaries;  // boundaries[k-1] = ∂_k, rows k-cells, cols (k-1)-cells

  int dim() const {
    int d = 0;
    for (std::size_t k = 0; k < cells.size(); ++k)
      if (cells[k] > 0) d = static_cast<int>(k);
    return d;
  }
  std::size_t count(int k) const {
    return k >= 0 && static_cast<std::size_t>(k) < cells.size() ? cells[static_cast<std::size_t>(k)] : 0;
  }
  /// ∂_k with the right shape, zero when k is out of range.
  IntMat boundary(int k) const {
    if (k >= 1 && static_cast<std::size_t>(k) <= boundaries.size()) return boundaries[static_cast<std::size_t>(k - 1)];
    return IntMat(count(k), count(k - 1), 0);
  }
};

inline void validate(const CWComplex& X) {
  require(!X.cells.empty() && X.cells[0] >= 1, "a CW complex needs at least one 0-cell");
  require(X.boundaries.size() + 1 == X.cells.size(), "expected one boundary matrix per positive dimension");
  for (std::size_t k = 1; k < X.cells.size(); ++k) {
    const auto& D = X.boundaries[k - 1];
    require(D.rows() == X.cells[k] && D.cols() == X.cells[k - 1],
            "boundary matrix in dimension " + std::to_string(k) + " has the wrong shape");
  }
  // the augmentation counts as ∂_0
  for (std::size_t i = 0; i < X.count(1); ++i) {
    BigInt s = 0;
    for (std::size_t j = 0; j < X.cells[0]; ++j) s += X.boundaries[0](i, j);
    require(s == 0, "boundary of a 1-cell must have total degree zero");
  }
  for (std::size_t k = 2; k < X.cells.size(); ++k) {
    const auto& P = X.boundaries[k - 1];
    const auto& Q = X.boundaries[k - 2];
    for (std::size_t i = 0; i < P.rows(); ++i)
      for (std::size_t j = 0; j < Q.cols(); ++j) {
        BigInt s = 0;
        for (std::size_t t = 0; t < P.cols(); ++t) s += BigInt(P(i, t)) * Q(t, j);
        require(s == 0, "boundary composed with boundary is nonzero in dimension " + std::to_string(k));
      }
  }
}

// ---------------------------------------------------------------------------
// builders

inline CWComplex make_cw(std::vector<std::size_t> cells) {
  CWComplex X;
  X.cells = std::move(cells);
  for (std::size_t k = 1; k < X.cells.size(); ++k) X.boundaries.emplace_back(X.cells[k], X.cells[k - 1], 0);
  return X;
}

inline CWComplex point() { return make_cw({1}); }

inline CWComplex sphere(int d) {
  require(d >= 0, "sphere dimension must be non-negative");
  if (d == 0) return make_cw({2});
  std::vector<std::size_t> c(static_cast<std::size_t>(d) + 1, 0);
  c[0] = 1;
  c.back() = 1;
  return make_cw(c);
}

inline CWComplex real_projective_space(int n) {
  require(n >= 0, "dimension must be non-negative");
  auto X = make_cw(std::vector<std::size_t>(static_cast<std::size_t>(n) + 1, 1));
  for (int k = 1; k <= n; ++k) X.boundaries[static_cast<std::size_t>(k - 1)](0, 0) = k % 2 ? 0 : 2;
  return X;
}

inline CWComplex complex_projective_space(int n) {
  require(n >= 0, "dimension must be non-negative");
  std::vector<std::size_t> c(2 * static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t k = 0; k < c.size(); k += 2) c[k] = 1;
  return make_cw(c);
}

/// One-point union along the first 0-cell of each.
inline CWComplex wedge(const CWComplex& X, const CWComplex& Y) {
  validate(X);
  validate(Y);
  const std::size_t top = std::max(X.cells.size(), Y.cells.size());
  std::vector<std::size_t> c(top, 0);
  for (std::size_t k = 0; k < top; ++k) c[k] = X.count(static_cast<int>(k)) + Y.count(static_cast<int>(k));
  c[0] -= 1;
  auto W = make_cw(c);
  for (std::size_t k = 1; k < top; ++k) {
    const int ki = static_cast<int>(k);
    auto DX = X.boundary(ki), DY = Y.boundary(ki);
    auto& D = W.boundaries[k - 1];
    const std::size_t rx = X.count(ki), cx = X.count(ki - 1);
    for (std::size_t i = 0; i < DX.rows(); ++i)
      for (std::size_t j = 0; j < DX.cols(); ++j) D(i, j) = DX(i, j);
    for (std::size_t i = 0; i < DY.rows(); ++i)
      for (std::size_t j = 0; j < DY.cols(); ++j) {
        if (k == 1 && j == 0) {
          D(rx + i, 0) += DY(i, 0);
          continue;
        }
        D(rx + i, (k == 1 ? cx - 1 : cx) + j) = DY(i, j);
      }
  }
  return W;
}

/// Reduced suspension: the first 0-cell stays the basepoint and every other
/// k-cell becomes a (k+1)-cell.
inline CWComplex reduced_suspension(const CWComplex& X) {
  validate(X);
  std::vector<std::size_t> c{1, X.cells[0] - 1};
  for (std::size_t k = 1; k < X.cells.size(); ++k) c.push_back(X.cells[k]);
  auto S = make_cw(c);
  if (X.cells.size() > 1) {
    const auto& D1 = X.boundaries[0];
    for (std::size_t i = 0; i < D1.rows(); ++i)
      for (std::size_t j = 1; j < D1.cols(); ++j) S.boundaries[1](i, j - 1) = D1(i, j);
  }
  for (std::size_t k = 2; k < X.cells.size(); ++k) S.boundaries[k] = X.boundaries[k - 1];
  return S;
}

// ---------------------------------------------------------------------------
// localized abelian groups

struct LocalizedAbelianGroup {
  std::size_t rank = 0;
  std::vector<BigInt> torsion;  // invariant factors, each dividing the next

  bool is_zero() const { return rank == 0 && torsion.empty(); }
  bool operator==(const LocalizedAbelianGroup&) const = default;
};

/// Invariant-factor chain of the cyclic groups Z/d, d in divs, with the
/// inverted primes stripped and trivial factors dropped.
inline std::vector<BigInt> canonical_chain(const std::vector<BigInt>& divs, const std::vector<std::int64_t>& inverted) {
  std::map<std::int64_t, std::vector<int>> powers;
  for (const auto& d0 : divs) {
    require(d0 > 0, "torsion divisors must be positive");
    for (auto [p, e] : factorize(strip_primes(d0, inverted))) powers[p].push_back(e);
  }
  std::size_t len = 0;
  for (auto& [p, es] : powers) {
    std::sort(es.begin(), es.end(), std::greater<>());
    len = std::max(len, es.size());
  }
  // the largest factor collects the top power of every prime
  std::vector<BigInt> out(len, 1);
  for (const auto& [p, es] : powers)
    for (std::size_t i = 0; i < es.size(); ++i) out[len - 1 - i] *= boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(es[i]));
  return out;
}

inline LocalizedAbelianGroup make_group(std::size_t rank, const std::vector<BigInt>& divs,
                                        const std::vector<std::int64_t>& inverted = {}) {
  return {rank, canonical_chain(divs, inverted)};
}

inline LocalizedAbelianGroup direct_sum(const LocalizedAbelianGroup& a, const LocalizedAbelianGroup& b) {
  auto d = a.torsion;
  d.insert(d.end(), b.torsion.begin(), b.torsion.end());
  return make_group(a.rank + b.rank, d);
}

inline std::string to_string(const LocalizedAbelianGroup& g) {
  if (g.is_zero()) return "0";
  std::string s;
  if (g.rank) s = g.rank == 1 ? "Z" : "Z^" + std::to_string(g.rank);
  for (const auto& d : g.torsion) s += (s.empty() ? "" : " + ") + std::string("Z/") + d.str();
  return s;
}

inline std::ostream& operator<<(std::ostream& os, const LocalizedAbelianGroup& g) { return os << to_string(g); }

/// Group underlying a module over a localization of Z.
inline LocalizedAbelianGroup group_of(const Module<LocZ>& m) {
  auto s = module_smith(m);
  std::size_t nonzero = 0;
  std::vector<BigInt> divs;
  for (const auto& d : s.divisors) {
    if (d == 0) continue;
    ++nonzero;
    auto n = m.ring.base().norm(d);
    if (n != 1) divs.push_back(n);
  }
  return make_group(m.gens - nonzero, divs);
}

// ---------------------------------------------------------------------------
// denominators and cohomology

struct DenominatorBound {
  int M = 0;
  BigInt factorial = 1;
  std::vector<std::int64_t> inverted;
};

inline DenominatorBound denominator_bound(int d) {
  require(d >= 0, "dimension must be non-negative");
  DenominatorBound b;
  b.M = (d + 1) / 2;
  for (int i = 2; i <= b.M; ++i) b.factorial *= i;
  b.inverted = primes_up_to(b.M);
  return b;
}

inline la::Matrix<LocZ> to_loc(const IntMat& D) {
  la::Matrix<LocZ> out(D.rows(), D.cols(), BigRat(0));
  for (std::size_t i = 0; i < D.rows(); ++i)
    for (std::size_t j = 0; j < D.cols(); ++j) out(i, j) = D(i, j);
  return out;
}

/// H~^k(X; Z[1/S]) for k = 0..dim X: integer Smith forms of the boundaries,
/// then the inverted primes stripped from the divisors.
inline std::vector<LocalizedAbelianGroup> reduced_cohomology(const CWComplex& X,
                                                             const std::vector<std::int64_t>& inverted) {
  validate(X);
  const int d = X.dim();
  const LocZ Z;
  std::vector<std::size_t> rank(static_cast<std::size_t>(d) + 2, 0);
  std::vector<std::vector<BigInt>> divs(static_cast<std::size_t>(d) + 1);
  rank[0] = 1;  // augmentation
  for (int k = 1; k <= d; ++k) {
    auto s = la::smith(Z, to_loc(X.boundary(k)));
    for (const auto& v : s.divisors) {
      if (v == 0) continue;
      ++rank[static_cast<std::size_t>(k)];
      auto n = Z.norm(v);
      if (n != 1) divs[static_cast<std::size_t>(k)].push_back(n);
    }
  }
  std::vector<LocalizedAbelianGroup> out;
  for (int k = 0; k <= d; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out.push_back(make_group(X.count(k) - rank[ku] - rank[ku + 1], divs[ku], inverted));
  }
  return out;
}

// ---------------------------------------------------------------------------
// cochain level: reduced cochain complexes as presented modules

/// Augmented cochains, level j holds C^(j-1) so that level 0 is the augmentation R.
struct Cochains {
  LocAlg A;
  std::vector<Module<LocZ>> level;
  std::vector<AMat<LocZ>> delta;  // delta[j] : level j -> level j+1
};

inline AMat<LocZ> loc_matrix(const LocAlg& A, const IntMat& D, bool transposed) {
  auto out = transposed ? amat(A, D.cols(), D.rows()) : amat(A, D.rows(), D.cols());
  for (std::size_t i = 0; i < D.rows(); ++i)
    for (std::size_t j = 0; j < D.cols(); ++j) (transposed ? out(j, i) : out(i, j)) = A.from_int(D(i, j));
  return out;
}

/// Reduced cochains of the k-skeleton, padded with zero levels up to dimension `top`.
inline Cochains skeleton_cochains(const LocAlg& A, const CWComplex& X, int k, int top) {
  Cochains C{A, {}, {}};
  auto n = [&](int j) { return j == -1 ? std::size_t{1} : (j <= k ? X.count(j) : std::size_t{0}); };
  for (int j = -1; j <= top; ++j) C.level.push_back(free_module(A, n(j)));
  for (int j = -1; j < top; ++j) {
    if (j == -1) {
      auto e = amat(A, 1, n(0));
      for (std::size_t i = 0; i < n(0); ++i) e(0, i) = A.one();
      C.delta.push_back(e);
    } else if (j + 1 <= k) {
      C.delta.push_back(loc_matrix(A, X.boundary(j + 1), true));
    } else {
      C.delta.push_back(amat(A, n(j), 0));
    }
  }
  return C;
}

/// Reduced cochains of X^(k)/X^(k-1): the k-cells alone.
inline Cochains cofiber_cochains(const LocAlg& A, const CWComplex& X, int k, int top) {
  Cochains C{A, {}, {}};
  for (int j = -1; j <= top; ++j) C.level.push_back(free_module(A, j == k ? X.count(k) : 0));
  for (int j = -1; j < top; ++j)
    C.delta.push_back(amat(A, C.level[static_cast<std::size_t>(j + 1)].gens, C.level[static_cast<std::size_t>(j + 2)].gens));
  return C;
}

inline std::vector<Homology<LocZ>> cohomology_modules(const Cochains& C) {
  const auto& A = C.A;
  std::vector<Homology<LocZ>> out;
  const auto L = C.level.size();
  for (std::size_t j = 0; j < L; ++j) {
    auto in = j ? make_map(C.level[j - 1], C.level[j], C.delta[j - 1])
                : make_map(zero_module(A), C.level[j], amat(A, 0, C.level[j].gens));
    auto outm = j + 1 < L ? make_map(C.level[j], C.level[j + 1], C.delta[j])
                          : make_map(C.level[j], zero_module(A), amat(A, C.level[j].gens, 0));
    out.push_back(homology(in, outm));
  }
  return out;
}

/// Map on cohomology induced by the cochain map X (level src -> level tgt).
inline AMat<LocZ> induced_on_cohomology(const LocAlg& A, const Homology<LocZ>& hs, const Homology<LocZ>& ht,
                                        const AMat<LocZ>& X, const AMat<LocZ>& incoming) {
  auto F = amat(A, hs.mod.gens, ht.mod.gens);
  auto span = vstack(ht.reps.rows() ? ht.reps : amat(A, 0, X.cols()), incoming.rows() ? incoming : amat(A, 0, X.cols()));
  for (std::size_t i = 0; i < hs.mod.gens; ++i) {
    auto v = X.cols() ? avec_mul(A, hs.reps.row(i), X) : AVec<LocZ>{};
    if (X.cols() == 0) continue;
    auto w = solve_in_span(A, span, v);
    require(w.has_value(), "cochain map does not carry cocycles to cocycles", ErrorKind::Inconsistency);
    F.set_row(i, AVec<LocZ>(w->begin(), w->begin() + static_cast<std::ptrdiff_t>(ht.mod.gens)));
  }
  return F;
}

// ---------------------------------------------------------------------------
// skeletal verification

struct LesNode {
  std::string name;
  bool exact = false;
};

struct SkeletalStep {
  int k = 0;
  std::size_t cells = 0;
  LocalizedAbelianGroup cofiber_K0, cofiber_K1;   // X^(k) / X^(k-1)
  LocalizedAbelianGroup skeleton_K0, skeleton_K1; // X^(k)
  LocalizedAbelianGroup sub_K0, sub_K1;           // X^(k-1)
  std::vector<LesNode> nodes;
  bool wedge_matches_spheres = false;
};

namespace detail {

/// Even or odd part of a graded cohomology, as one module with block offsets.
struct ParitySum {
  Module<LocZ> mod;
  std::vector<std::size_t> offset;  // per level, meaningful for levels of the parity
};

inline ParitySum parity_sum(const LocAlg& A, const std::vector<Homology<LocZ>>& H, int parity) {
  ParitySum s{zero_module(A), std::vector<std::size_t>(H.size(), 0)};
  for (std::size_t lv = 0; lv < H.size(); ++lv) {
    const int deg = static_cast<int>(lv) - 1;
    if (((deg % 2) + 2) % 2 != parity) continue;
    s.offset[lv] = s.mod.gens;
    s.mod = direct_sum(s.mod, H[lv].mod);
  }
  if (s.mod.rel.rows() == 0) s.mod.rel = amat(A, 0, s.mod.gens);
  return s;
}

}  // namespace detail

/// Six-term sequence of the pair (X^(k), X^(k-1)) for k = 1..d in reduced
/// even/odd cohomology over R = Z[1/M!], M taken from the full dimension:
///   K^0(X/A) -> K^0(X) -> K^0(A) -> K^1(X/A) -> K^1(X) -> K^1(A) -> K^0(X/A).
/// Exactness is checked on the induced maps; the cofiber is a wedge of
/// k-spheres whose values are compared with those of spheres.
inline std::vector<SkeletalStep> skeletal_verification(const CWComplex& X) {
  validate(X);
  const int d = X.dim();
  require(reduced_cohomology(X, {})[0].rank == 0, "the skeletal trace needs a connected complex");
  const auto A = make_localized(denominator_bound(d).inverted);
  std::vector<SkeletalStep> trace;
  for (int k = 1; k <= d; ++k) {
    auto CQ = cofiber_cochains(A, X, k, d);
    auto CX = skeleton_cochains(A, X, k, d);
    auto CA = skeleton_cochains(A, X, k - 1, d);
    auto HQ = cohomology_modules(CQ), HX = cohomology_modules(CX), HA = cohomology_modules(CA);
    const auto L = CX.level.size();
    auto incoming = [&](const Cochains& C, std::size_t lv) {
      return lv ? C.delta[lv - 1] : amat(A, 0, C.level[lv].gens);
    };
    // cochain maps per level
    std::vector<AMat<LocZ>> q(L), i(L), delta(L);
    for (std::size_t lv = 0; lv < L; ++lv) {
      const int deg = static_cast<int>(lv) - 1;
      q[lv] = deg == k ? aidentity(A, X.count(k)) : amat(A, 0, CX.level[lv].gens);
      i[lv] = deg < k ? aidentity(A, CX.level[lv].gens) : amat(A, CX.level[lv].gens, 0);
      if (lv + 1 < L)
        delta[lv] = deg == k - 1 ? loc_matrix(A, X.boundary(k), true)
                                 : amat(A, CA.level[lv].gens, CQ.level[lv + 1].gens);
    }
    detail::ParitySum KQ[2], KX[2], KA[2];
    for (int e = 0; e < 2; ++e) {
      KQ[e] = detail::parity_sum(A, HQ, e);
      KX[e] = detail::parity_sum(A, HX, e);
      KA[e] = detail::parity_sum(A, HA, e);
    }
    auto assemble = [&](const detail::ParitySum& S, const detail::ParitySum& T, int e, int shift,
                        const std::vector<Homology<LocZ>>& Hs, const std::vector<Homology<LocZ>>& Ht,
                        const Cochains& Ct, const std::vector<AMat<LocZ>>& maps) {
      auto F = amat(A, S.mod.gens, T.mod.gens);
      for (std::size_t lv = 0; lv < L; ++lv) {
        const int deg = static_cast<int>(lv) - 1;
        const auto tl = lv + static_cast<std::size_t>(shift);
        if (((deg % 2) + 2) % 2 != e || tl >= L || Hs[lv].mod.gens == 0 || Ht[tl].mod.gens == 0) continue;
        auto B = induced_on_cohomology(A, Hs[lv], Ht[tl], maps[lv], incoming(Ct, tl));
        for (std::size_t r = 0; r < B.rows(); ++r)
          for (std::size_t c = 0; c < B.cols(); ++c) F(S.offset[lv] + r, T.offset[tl] + c) = B(r, c);
      }
      return make_map(S.mod, T.mod, F);
    };
    std::vector<ModuleMap<LocZ>> ring_maps;
    std::vector<std::string> names;
    for (int e = 0; e < 2; ++e) {
      ring_maps.push_back(assemble(KQ[e], KX[e], e, 0, HQ, HX, CX, q));
      names.push_back("K^" + std::to_string(e) + "(X/A)");
      ring_maps.push_back(assemble(KX[e], KA[e], e, 0, HX, HA, CA, i));
      names.push_back("K^" + std::to_string(e) + "(X)");
      ring_maps.push_back(assemble(KA[e], KQ[1 - e], e, 1, HA, HQ, CQ, delta));
      names.push_back("K^" + std::to_string(e) + "(A)");
    }
    SkeletalStep st;
    st.k = k;
    st.cells = X.count(k);
    for (std::size_t n = 0; n < 6; ++n) {
      const auto& in = ring_maps[(n + 5) % 6];
      const auto& out = ring_maps[n];
      st.nodes.push_back({names[n], is_zero_module(homology(in, out).mod)});
      require(st.nodes.back().exact, "long exact sequence fails at " + names[n] + " for the " + std::to_string(k) +
                                          "-skeleton", ErrorKind::Inconsistency);
    }
    st.cofiber_K0 = group_of(KQ[0].mod);
    st.cofiber_K1 = group_of(KQ[1].mod);
    st.skeleton_K0 = group_of(KX[0].mod);
    st.skeleton_K1 = group_of(KX[1].mod);
    st.sub_K0 = group_of(KA[0].mod);
    st.sub_K1 = group_of(KA[1].mod);
    LocalizedAbelianGroup spheres{X.count(k), {}};
    st.wedge_matches_spheres = (k % 2 ? st.cofiber_K1 : st.cofiber_K0) == spheres &&
                               (k % 2 ? st.cofiber_K0 : st.cofiber_K1).is_zero();
    require(st.wedge_matches_spheres, "cofiber of the " + std::to_string(k) + "-skeleton is not a wedge of spheres",
            ErrorKind::Inconsistency);
    trace.push_back(std::move(st));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// K-theory

struct EvenOdd {
  std::vector<LocalizedAbelianGroup> graded;  // H~^k over R
  LocalizedAbelianGroup even, odd;
};

struct KTheoryResult {
  int d = 0;
  int M = 0;
  std::vector<std::int64_t> inverted;
  LocalizedAbelianGroup K0, K1;  // reduced K^0 and K^-1, tensored with R
  EvenOdd even_odd;
  std::vector<SkeletalStep> skeletal_trace;
};

inline EvenOdd even_odd_split(const std::vector<LocalizedAbelianGroup>& H) {
  EvenOdd out{H, {}, {}};
  for (std::size_t k = 0; k < H.size(); ++k) (k % 2 ? out.odd : out.even) = direct_sum(k % 2 ? out.odd : out.even, H[k]);
  return out;
}

/// K~^0 ⊗ R and K~^-1 ⊗ R through the Chern character, R = Z[1/M!].
/// The skeletal trace needs a connected complex; for disconnected input it is left empty.
inline KTheoryResult ktheory(const CWComplex& X) {
  validate(X);
  KTheoryResult out;
  out.d = X.dim();
  auto b = denominator_bound(out.d);
  out.M = b.M;
  out.inverted = b.inverted;
  out.even_odd = even_odd_split(reduced_cohomology(X, b.inverted));
  out.K0 = out.even_odd.even;
  out.K1 = out.even_odd.odd;
  require(out.K0 == out.even_odd.even && out.K1 == out.even_odd.odd, "K-theory disagrees with its parity split",
          ErrorKind::Inconsistency);
  if (reduced_cohomology(X, {})[0].rank == 0) {
    out.skeletal_trace = skeletal_verification(X);
    if (!out.skeletal_trace.empty()) {
      const auto& top = out.skeletal_trace.back();
      require(top.skeleton_K0 == out.K0 && top.skeleton_K1 == out.K1,
              "skeletal trace disagrees with the cellular computation", ErrorKind::Inconsistency);
    }
  }
  return out;
}

}  // namespace degen
