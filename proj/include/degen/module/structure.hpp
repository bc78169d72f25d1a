#pragma once

// Torsion, elementary divisors and the decomposition of modules over the
// bi-truncated ring W[z]/(p^N, z^M) into cyclic p-power pieces plus a free part.

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "degen/module/presented.hpp"

namespace degen {

// length of B/(d) for a canonical divisor d
inline int divisor_length(const ZpN& R, std::int64_t d) { return R.val(d); }
inline int divisor_length(const FpSeries& R, const FpSeries::elem& d) { return R.val(d); }
inline int divisor_length(const LocZ& R, const BigRat& d) {
  int n = 0;
  for (auto [p, k] : factorize(R.norm(d))) n += k;
  return n;
}

template <class Base>
void require_snf_capable(const Algebra<Base>& A) {
  if (A.trunc() != 1)
    fail(ErrorKind::UnsupportedRing,
         "operation needs a ring with Smith normal form; use decompose_over_S or restriction of scalars");
}

/// Smith form of the relation matrix of a module over an SNF-capable ring.
template <class Base>
la::Smith<Base> module_smith(const Module<Base>& m) {
  require_snf_capable(m.ring);
  BMat<Base> R;
  R.set_cols(m.gens);
  for (std::size_t i = 0; i < m.rel.rows(); ++i) R.push_row(expand(m.ring, m.rel.row(i)));
  if (R.rows() == 0) R.set_cols(m.gens);
  return la::smith(m.ring.base(), R);
}

template <class Base>
la::Smith<Base> smith_normal_form(const Algebra<Base>& A, const AMat<Base>& mat) {
  Module<Base> m{A, mat.cols(), mat};
  return module_smith(m);
}

// ---------------------------------------------------------------------------
// torsion

template <class Base>
struct TorsionPart {
  Module<Base> tors;
  ModuleMap<Base> incl;      // tors -> M
  Module<Base> quotient;     // M / tors
  ModuleMap<Base> proj;      // M -> quotient
  typename Base::elem annihilator;  // kills tors (p^K, z^K, or an integer)
  bool from_decomposition = false;
};

namespace detail {

// Torsion rows from the Smith form over the base ring after restriction of
// scalars. Over exact base rings the torsion submodule is canonical and hence
// z-stable; over Z/p^N with z-truncation it is only canonical when M has no
// free part, which is why torsion_part prefers the decomposition there.
template <class Base>
TorsionPart<Base> torsion_by_smith(const Module<Base>& M) {
  const auto& A = M.ring;
  const auto& B = A.base();
  auto RB = restrict_rows(A, M.rel.rows() ? M.rel : amat(A, 0, M.gens));
  auto s = la::smith(B, RB);
  AMat<Base> T;
  T.set_cols(M.gens);
  auto ann = B.one();
  for (std::size_t t = 0; t < s.divisors.size(); ++t) {
    const auto& d = s.divisors[t];
    if (B.is_zero(d) || B.is_unit(d)) continue;
    auto v = collapse(A, s.Vinv.row(t));
    if (!is_zero_elem(M, v)) T.push_row(v);
    ann = d;  // divisors increase in the divisibility order
  }
  if (T.rows() == 0) T.set_cols(M.gens);
  auto [sub, incl] = submodule(M, T);
  auto simp = simplify(sub);
  TorsionPart<Base> out;
  out.tors = simp.mod;
  out.incl = make_map(simp.mod, M, amul(A, simp.from, incl.F));
  auto [q, proj] = quotient(M, T);
  out.quotient = q;
  out.proj = proj;
  out.annihilator = ann;
  return out;
}

}  // namespace detail

template <class Base>
int torsion_length(const Module<Base>& M) {
  auto s = module_smith(M);
  int n = 0;
  for (const auto& d : s.divisors)
    if (!M.ring.base().is_zero(d)) n += divisor_length(M.ring.base(), d);
  return n;
}

// ---------------------------------------------------------------------------
// elementary decomposition over SNF-capable rings

/// M ≅ ⊕ R/(d_i) ⊕ R^m. The model lists torsion generators first.
template <class Base>
struct ElementaryDecomposition {
  std::size_t free_rank = 0;
  std::vector<int> torsion_exponents;
  std::vector<typename Base::elem> divisors;
  Module<Base> model;
  ModuleMap<Base> to_model;    // M -> model
  ModuleMap<Base> from_model;  // model -> M
};

template <class Base>
Module<Base> elementary_model(const Algebra<Base>& A, const std::vector<typename Base::elem>& divs,
                              std::size_t free_rank) {
  Module<Base> m = free_module(A, divs.size() + free_rank);
  for (std::size_t i = 0; i < divs.size(); ++i) {
    auto r = azero_vec(A, m.gens);
    r[i] = A.constant(divs[i]);
    m.rel.push_row(r);
  }
  if (m.rel.rows() == 0) m.rel = amat(A, 0, m.gens);
  return m;
}

template <class Base>
bool verify_decomposition(const Module<Base>& M, const ElementaryDecomposition<Base>& d) {
  return verify_map(d.to_model) && verify_map(d.from_model) &&
         maps_equal(compose(d.to_model, d.from_model), identity_map(M)) &&
         maps_equal(compose(d.from_model, d.to_model), identity_map(d.model));
}

template <class Base>
ElementaryDecomposition<Base> decompose_elementary(const Module<Base>& M) {
  const auto& A = M.ring;
  const auto& B = A.base();
  auto s = module_smith(M);
  std::vector<std::size_t> tors_idx, free_idx;
  ElementaryDecomposition<Base> out;
  for (std::size_t t = 0; t < M.gens; ++t) {
    if (t < s.divisors.size() && !B.is_zero(s.divisors[t])) {
      if (B.is_unit(s.divisors[t])) continue;
      tors_idx.push_back(t);
      out.divisors.push_back(s.divisors[t]);
      out.torsion_exponents.push_back(divisor_length(B, s.divisors[t]));
    } else {
      free_idx.push_back(t);
    }
  }
  out.free_rank = free_idx.size();
  out.model = elementary_model(A, out.divisors, out.free_rank);
  std::vector<std::size_t> keep = tors_idx;
  keep.insert(keep.end(), free_idx.begin(), free_idx.end());
  auto to = amat(A, M.gens, keep.size());
  auto from = amat(A, keep.size(), M.gens);
  for (std::size_t c = 0; c < keep.size(); ++c)
    for (std::size_t j = 0; j < M.gens; ++j) {
      to(j, c) = A.constant(s.V(j, keep[c]));
      from(c, j) = A.constant(s.Vinv(keep[c], j));
    }
  out.to_model = make_map(M, out.model, to);
  out.from_model = make_map(out.model, M, from);
  if (!verify_decomposition(M, out))
    fail(ErrorKind::Inconsistency, "elementary decomposition witness failed verification");
  return out;
}

// ---------------------------------------------------------------------------
// p-adic graded pieces over the residue power series ring

inline FpSeries::elem reduce_mod_p(const PadicAlg& A, const PadicAlg::elem& x, const FpSeries& k) {
  auto out = k.zero();
  for (std::size_t i = 0; i < A.width(); ++i) out[i] = x[i] % A.base().p();
  return out;
}

inline PadicAlg::elem lift_from_fp(const PadicAlg& A, const FpSeries::elem& x) {
  auto out = A.zero();
  for (std::size_t i = 0; i < A.width(); ++i) out[i] = x[i];
  return out;
}

inline SeriesAlg residue_algebra(const PadicAlg& A) { return make_series(A.base().p(), A.trunc()); }

struct GrSlice {
  Module<FpSeries> mod;       // over F_p[z]/(z^M), simplified
  bool free = false;
  std::size_t rank = 0;       // free rank when free
  // when not free: a nonzero element (in generators p^j e_i) killed by z^k
  int witness_z_exponent = -1;
  std::vector<FpSeries::elem> witness_vector;
};

template <class Base>
AMat<Base> scalar_matrix(const Algebra<Base>& A, std::size_t n, const AElem<Base>& c) {
  auto D = amat(A, n, n);
  for (std::size_t i = 0; i < n; ++i) D(i, i) = c;
  return D;
}

template <class Base>
AMat<Base> rel_or_empty(const Module<Base>& M) {
  return M.rel.rows() ? M.rel : amat(M.ring, 0, M.gens);
}

/// Unsimplified presentation of p^j M / p^{j+1} M on the generators p^j e_i.
inline Module<FpSeries> gr_presentation(const Module<ZpN>& M, int j) {
  const auto& A = M.ring;
  require(j >= 0, "graded index must be non-negative");
  const int N = A.base().precision();
  if (j >= N) fail(ErrorKind::PrecisionLimited, "graded index must be below the p-adic precision");
  auto k = residue_algebra(A);
  const std::int64_t p = A.base().p();
  auto pj = A.from_int(ipow(p, j));
  auto pj1 = A.from_int(j + 1 < N ? ipow(p, j + 1) : 0);
  auto K = kernel_into(A, scalar_matrix(A, M.gens, pj),
                       vstack(rel_or_empty(M), scalar_matrix(A, M.gens, pj1)));
  Module<FpSeries> out = free_module(k, M.gens);
  for (std::size_t r = 0; r < K.rows(); ++r) {
    AVec<FpSeries> row(M.gens);
    for (std::size_t i = 0; i < M.gens; ++i) row[i] = k.constant(reduce_mod_p(A, K(r, i), k.base()));
    if (!avec_is_zero(k, row)) out.rel.push_row(row);
  }
  if (out.rel.rows() == 0) out.rel = amat(k, 0, M.gens);
  return out;
}

/// p^j M / p^{j+1} M as a module over F_p[z]/(z^M), with a freeness flag.
inline GrSlice gr_p(const Module<ZpN>& M, int j) {
  GrSlice out;
  auto G = gr_presentation(M, j);
  const auto& F = G.ring.base();
  auto s = module_smith(G);
  out.free = true;
  std::size_t units = 0;
  for (std::size_t t = 0; t < s.divisors.size(); ++t) {
    const auto& d = s.divisors[t];
    if (F.is_zero(d)) continue;
    if (F.is_unit(d)) {
      ++units;
      continue;
    }
    if (out.free) {
      out.free = false;
      out.witness_z_exponent = F.val(d);
      for (std::size_t c = 0; c < G.gens; ++c) out.witness_vector.push_back(s.Vinv(t, c));
    }
  }
  out.rank = out.free ? G.gens - units : 0;
  out.mod = simplify(G).mod;
  return out;
}

// ---------------------------------------------------------------------------
// decomposition over the bi-truncated ring

struct NotElementary {
  int failing_j = 0;
  int z_exponent = 0;                          // witness killed by z^k
  std::vector<FpSeries::elem> witness;         // in generators p^j e_i
};

using DecompositionResult = std::variant<ElementaryDecomposition<ZpN>, NotElementary>;

namespace detail {

struct FreeBasis {
  la::Smith<FpSeries> s;
  std::vector<std::size_t> idx;  // basis positions among SNF columns
};

// Coordinates of a free module over F_p[z]/(z^M) presented as k^g / Rel.
inline FreeBasis free_basis(const Module<FpSeries>& G) {
  FreeBasis fb{module_smith(G), {}};
  const auto& F = G.ring.base();
  for (std::size_t t = 0; t < G.gens; ++t)
    if (t >= fb.s.divisors.size() || F.is_zero(fb.s.divisors[t])) fb.idx.push_back(t);
  return fb;
}

inline std::vector<FpSeries::elem> to_basis_coords(const FpSeries& F, const FreeBasis& fb,
                                                   const std::vector<FpSeries::elem>& v) {
  auto y = la::vec_mul(F, v, fb.s.V);
  std::vector<FpSeries::elem> out;
  for (auto i : fb.idx) out.push_back(y[i]);
  return out;
}

inline std::vector<FpSeries::elem> from_basis_coords(const FpSeries& F, const FreeBasis& fb,
                                                     const std::vector<FpSeries::elem>& c) {
  auto out = la::zero_vec(F, fb.s.Vinv.cols());
  for (std::size_t a = 0; a < fb.idx.size(); ++a)
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = F.add(out[j], F.mul(c[a], fb.s.Vinv(fb.idx[a], j)));
  return out;
}

// Extend a basis of a direct summand K (rows of Bcur) to a basis of the
// direct summand spanned by K and W, inside F^n. Returns the new rows.
inline la::Matrix<FpSeries> extend_summand_basis(const FpSeries& F, const la::Matrix<FpSeries>& Bcur,
                                                 const la::Matrix<FpSeries>& W, std::size_t n) {
  la::Matrix<FpSeries> out;
  out.set_cols(n);
  la::Matrix<FpSeries> V = la::identity(F, n), Vinv = la::identity(F, n);
  std::size_t b = Bcur.rows();
  if (b > 0) {
    auto s = la::smith(F, Bcur);
    for (std::size_t t = 0; t < b; ++t)
      require(F.is_unit(s.divisors[t]), "kernel flag is not a direct summand", ErrorKind::Inconsistency);
    V = s.V;
    Vinv = s.Vinv;
  }
  if (W.rows() == 0 || b == n) return out;
  la::Matrix<FpSeries> Wp;
  Wp.set_cols(n - b);
  for (std::size_t r = 0; r < W.rows(); ++r) {
    auto y = la::vec_mul(F, W.row(r), V);
    Wp.push_row(std::vector<FpSeries::elem>(y.begin() + static_cast<std::ptrdiff_t>(b), y.end()));
  }
  auto s2 = la::smith(F, Wp);
  for (std::size_t t = 0; t < s2.divisors.size(); ++t) {
    if (F.is_zero(s2.divisors[t])) continue;
    require(F.is_unit(s2.divisors[t]), "kernel flag is not a direct summand", ErrorKind::Inconsistency);
    auto y = la::zero_vec(F, n);
    for (std::size_t j = 0; j < n - b; ++j) y[b + j] = s2.Vinv(t, j);
    out.push_row(la::vec_mul(F, y, Vinv));
  }
  return out;
}

}  // namespace detail

/// Decomposes M ≅ ⊕ A/p^{a_i} ⊕ A^m when every gr_p^j M is free over
/// F_p[z]/(z^M); otherwise reports the first failing j with a z-torsion
/// element as certificate.
///
/// A basis of gr^0 M is chosen adapted to the kernels K_j of x |-> p^j x;
/// an element first killed at level j < N lifts to a generator of A/p^j,
/// one that survives to level N lifts to a free generator. At precision N a
/// free summand is indistinguishable from p-power torsion of exponent >= N,
/// so torsion exponents must stay below N.
inline DecompositionResult decompose_over_S(const Module<ZpN>& M) {
  const auto& A = M.ring;
  const int N = A.base().precision();
  const std::int64_t p = A.base().p();
  const auto kres = residue_algebra(A);
  const auto& F = kres.base();

  for (int j = 0; j < N; ++j) {
    auto g = gr_p(M, j);
    if (!g.free) return NotElementary{j, g.witness_z_exponent, g.witness_vector};
  }

  auto Mrel = rel_or_empty(M);
  auto reduce_rows = [&](const AMat<ZpN>& X) {
    la::Matrix<FpSeries> out;
    out.set_cols(M.gens);
    for (std::size_t r = 0; r < X.rows(); ++r) {
      std::vector<FpSeries::elem> row(M.gens);
      for (std::size_t i = 0; i < M.gens; ++i) row[i] = reduce_mod_p(A, X(r, i), F);
      out.push_row(row);
    }
    if (out.rows() == 0) out.set_cols(M.gens);
    return out;
  };
  auto fb = detail::free_basis(gr_presentation(M, 0));
  const std::size_t r0 = fb.idx.size();

  std::vector<AVec<ZpN>> gens;  // lifted and corrected, in M coordinates
  std::vector<int> exps;        // N marks a free generator
  la::Matrix<FpSeries> basis;   // in gr^0 basis coordinates
  basis.set_cols(r0);
  for (int j = 1; j <= N && basis.rows() < r0; ++j) {
    auto pj = scalar_matrix(A, M.gens, A.from_int(j < N ? ipow(p, j) : 0));
    auto pj1 = scalar_matrix(A, M.gens, A.from_int(j + 1 < N ? ipow(p, j + 1) : 0));
    la::Matrix<FpSeries> W;
    W.set_cols(r0);
    if (j < N) {
      auto Kj = reduce_rows(kernel_into(A, pj, vstack(Mrel, pj1)));
      for (std::size_t r = 0; r < Kj.rows(); ++r) W.push_row(detail::to_basis_coords(F, fb, Kj.row(r)));
    } else {
      for (std::size_t r = 0; r < r0; ++r) {
        auto e = la::zero_vec(F, r0);
        e[r] = F.one();
        W.push_row(e);
      }
    }
    if (W.rows() == 0) W.set_cols(r0);
    auto fresh = detail::extend_summand_basis(F, basis, W, r0);
    for (std::size_t r = 0; r < fresh.rows(); ++r) {
      basis.push_row(fresh.row(r));
      auto v = detail::from_basis_coords(F, fb, fresh.row(r));
      AVec<ZpN> x(M.gens);
      for (std::size_t i = 0; i < M.gens; ++i) x[i] = lift_from_fp(A, v[i]);
      if (j < N) {
        // correct x so that p^j x = 0 exactly, from p^j x = p^{j+1} y
        auto pjx = avec_scale(A, A.from_int(ipow(p, j)), x);
        auto y = solve_in_span(A, vstack(pj1, Mrel), pjx);
        if (!y) fail(ErrorKind::PrecisionLimited, "precision insufficient to correct a torsion lift");
        AVec<ZpN> ycoef(y->begin(), y->begin() + static_cast<std::ptrdiff_t>(M.gens));
        x = avec_sub(A, x, avec_scale(A, A.from_int(p), ycoef));
      }
      gens.push_back(x);
      exps.push_back(j);
    }
  }
  require(basis.rows() == r0, "adapted basis is incomplete", ErrorKind::Inconsistency);

  // assemble ⊕ A/p^{a_i} ⊕ A^m -> M, torsion first by exponent, then free
  std::vector<std::size_t> order(exps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return exps[a] < exps[b]; });
  ElementaryDecomposition<ZpN> out;
  const std::size_t n = exps.size();
  auto X = amat(A, n, M.gens);
  for (std::size_t row = 0; row < n; ++row) {
    auto i = order[row];
    X.set_row(row, gens[i]);
    if (exps[i] < N) {
      out.torsion_exponents.push_back(exps[i]);
      out.divisors.push_back(A.base().from_int(ipow(p, exps[i])));
    } else {
      ++out.free_rank;
    }
  }
  out.model = elementary_model(A, out.divisors, out.free_rank);
  out.from_model = make_map(out.model, M, X);
  if (!is_surjective(out.from_model) || !is_injective(out.from_model))
    fail(ErrorKind::Inconsistency, "assembled decomposition is not an isomorphism");
  auto inv = amat(A, M.gens, n);
  auto span = vstack(X, Mrel);
  for (std::size_t j = 0; j < M.gens; ++j) {
    auto c = solve_in_span(A, span, unit_vec(A, M.gens, j));
    require(c.has_value(), "generator not reached by decomposition", ErrorKind::Inconsistency);
    for (std::size_t i = 0; i < n; ++i) inv(j, i) = (*c)[i];
  }
  out.to_model = make_map(M, out.model, inv);
  if (!verify_decomposition(M, out))
    fail(ErrorKind::Inconsistency, "decomposition witness failed verification");
  return out;
}

/// The p-power torsion submodule (for localized integers: all torsion),
/// its inclusion, and the quotient by it.
template <class Base>
TorsionPart<Base> torsion_part(const Module<Base>& M) {
  if constexpr (std::is_same_v<Base, ZpN>) {
    if (M.ring.trunc() > 1) {
      auto r = decompose_over_S(M);
      if (auto* d = std::get_if<ElementaryDecomposition<ZpN>>(&r)) {
        const auto& A = M.ring;
        auto T = amat(A, d->divisors.size(), M.gens);
        for (std::size_t i = 0; i < d->divisors.size(); ++i) T.set_row(i, d->from_model.F.row(i));
        Module<ZpN> tors{A, T.rows(), amat(A, 0, T.rows())};
        for (std::size_t i = 0; i < d->divisors.size(); ++i) {
          auto row = azero_vec(A, T.rows());
          row[i] = A.constant(d->divisors[i]);
          tors.rel.push_row(row);
        }
        if (tors.rel.rows() == 0) tors.rel = amat(A, 0, T.rows());
        TorsionPart<ZpN> out;
        out.tors = tors;
        out.incl = make_map(tors, M, T);
        auto [q, proj] = quotient(M, T);
        out.quotient = q;
        out.proj = proj;
        out.annihilator = d->divisors.empty() ? A.base().one() : d->divisors.back();
        out.from_decomposition = true;
        return out;
      }
    }
  }
  return detail::torsion_by_smith(M);
}

}  // namespace degen
