#pragma once

// Ext^1 from a length-two free resolution, short exact sequences, and
// splitting: sections are found by solving one linear system over the base
// ring, so failure comes with the system's inconsistency witness.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "degen/module/structure.hpp"

namespace degen {

// ---------------------------------------------------------------------------
// Hom-valued linear systems

/// Inconsistency of a linear system: coordinate `index` of the transformed
/// right-hand side is not divisible by the divisor there.
struct Obstruction {
  std::size_t index = 0;
  std::string divisor;
  std::string residue;
};

template <class Base>
struct HomSolve {
  std::optional<AMat<Base>> Y;
  Obstruction obstruction;
};

/// Finds Y (m x n over A) such that for every constraint row r,
/// lin(Y)[r] - rhs[r] lies in the row span of rels[r]. `lin` must be A-linear.
template <class Base>
HomSolve<Base> solve_hom(const Algebra<Base>& A, std::size_t m, std::size_t n,
                         const std::function<std::vector<AVec<Base>>(const AMat<Base>&)>& lin,
                         const std::vector<AVec<Base>>& rhs, const std::vector<AMat<Base>>& rels) {
  const auto& B = A.base();
  const std::size_t M = A.width();
  auto flatten = [&](const std::vector<AVec<Base>>& rows) {
    BVec<Base> out;
    for (const auto& r : rows) {
      auto e = expand(A, r);
      out.insert(out.end(), e.begin(), e.end());
    }
    return out;
  };
  std::size_t width = 0;
  for (const auto& r : rhs) width += r.size() * M;

  BMat<Base> L;
  L.set_cols(width);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t k = 0; k < M; ++k) {
        auto Y = amat(A, m, n);
        Y(a, b) = A.monomial(static_cast<int>(k), B.one());
        L.push_row(flatten(lin(Y)));
      }
  // relation spans, block diagonal over constraint rows
  std::size_t offset = 0;
  for (std::size_t r = 0; r < rhs.size(); ++r) {
    auto RB = restrict_rows(A, rels[r].rows() ? rels[r] : amat(A, 0, rhs[r].size()));
    for (std::size_t i = 0; i < RB.rows(); ++i) {
      BVec<Base> row(width, B.zero());
      for (std::size_t j = 0; j < RB.cols(); ++j) row[offset + j] = RB(i, j);
      L.push_row(row);
    }
    offset += rhs[r].size() * M;
  }
  if (L.rows() == 0) L.set_cols(width);
  auto rep = la::solve_left_report(B, L, flatten(rhs));
  HomSolve<Base> out;
  if (!rep.x) {
    out.obstruction = {rep.index, B.to_string(rep.divisor), B.to_string(rep.residue)};
    return out;
  }
  auto Y = amat(A, m, n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t k = 0; k < M; ++k) Y(a, b)[k] = (*rep.x)[(a * n + b) * M + k];
  out.Y = Y;
  return out;
}

/// Some map g: src -> tgt with h = g then f (f: tgt -> base, h: src -> base), if one exists.
template <class Base>
HomSolve<Base> lift_through(const ModuleMap<Base>& h, const ModuleMap<Base>& f) {
  const auto& A = h.src.ring;
  const auto& S = h.src;
  const auto& T = f.src;
  const auto& C = f.tgt;
  std::vector<AVec<Base>> rhs;
  std::vector<AMat<Base>> rels;
  for (std::size_t r = 0; r < S.rel.rows(); ++r) {
    rhs.push_back(azero_vec(A, T.gens));
    rels.push_back(T.rel);
  }
  for (std::size_t i = 0; i < S.gens; ++i) {
    rhs.push_back(h.F.row(i));
    rels.push_back(C.rel);
  }
  auto lin = [&](const AMat<Base>& Y) {
    std::vector<AVec<Base>> out;
    auto RY = amul(A, S.rel, Y);
    for (std::size_t r = 0; r < RY.rows(); ++r) out.push_back(RY.row(r));
    auto YF = amul(A, Y, f.F);
    for (std::size_t i = 0; i < YF.rows(); ++i) out.push_back(YF.row(i));
    return out;
  };
  return solve_hom<Base>(A, S.gens, T.gens, lin, rhs, rels);
}

// ---------------------------------------------------------------------------
// Ext^1

template <class Base>
struct Ext1 {
  Module<Base> ext;
  AMat<Base> reps;         // cocycle representatives in Hom(F1, X) = X^r
  AMat<Base> resolution;   // relations of C: F1 -> F0
  AMat<Base> syzygies;     // F2 -> F1
};

template <class Base>
Module<Base> hom_from_free(const Module<Base>& X, std::size_t rank) {
  const auto& A = X.ring;
  Module<Base> H = free_module(A, rank * X.gens);
  for (std::size_t j = 0; j < rank; ++j)
    for (std::size_t r = 0; r < X.rel.rows(); ++r) {
      auto row = azero_vec(A, H.gens);
      for (std::size_t i = 0; i < X.gens; ++i) row[j * X.gens + i] = X.rel(r, i);
      H.rel.push_row(row);
    }
  if (H.rel.rows() == 0) H.rel = amat(A, 0, H.gens);
  return H;
}

/// Hom(F_a, X) -> Hom(F_b, X) induced by d: F_b -> F_a (rows of d are the
/// images of F_b's basis).
template <class Base>
AMat<Base> hom_dual(const Algebra<Base>& A, const AMat<Base>& d, std::size_t rank_a, std::size_t gx) {
  auto out = amat(A, rank_a * gx, d.rows() * gx);
  for (std::size_t j = 0; j < rank_a; ++j)
    for (std::size_t k = 0; k < d.rows(); ++k)
      for (std::size_t i = 0; i < gx; ++i) out(j * gx + i, k * gx + i) = d(k, j);
  return out;
}

template <class Base>
Ext1<Base> ext1(const Module<Base>& C, const Module<Base>& X) {
  const auto& A = C.ring;
  Ext1<Base> out;
  out.resolution = rel_or_empty(C);
  const std::size_t r = out.resolution.rows();
  out.syzygies = kernel_into(A, out.resolution, amat(A, 0, C.gens));
  const std::size_t r2 = out.syzygies.rows();
  auto H0 = hom_from_free(X, C.gens), H1 = hom_from_free(X, r), H2 = hom_from_free(X, r2);
  auto d0 = make_map(H0, H1, hom_dual(A, out.resolution, C.gens, X.gens));
  auto d1 = make_map(H1, H2, r2 ? hom_dual(A, out.syzygies, r, X.gens) : amat(A, H1.gens, 0));
  auto h = homology(d0, d1);
  out.ext = h.mod;
  out.reps = h.reps;
  return out;
}

/// Multiset of torsion exponents and free rank, via the decomposition that
/// fits the ring family.
struct ElementaryShape {
  std::size_t free_rank = 0;
  std::vector<int> exponents;
  bool operator==(const ElementaryShape&) const = default;
};

inline std::optional<ElementaryShape> elementary_shape(const Module<ZpN>& M) {
  if (M.ring.trunc() == 1) {
    auto d = decompose_elementary(M);
    return ElementaryShape{d.free_rank, d.torsion_exponents};
  }
  auto r = decompose_over_S(M);
  if (auto* d = std::get_if<ElementaryDecomposition<ZpN>>(&r))
    return ElementaryShape{d->free_rank, d->torsion_exponents};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// base change z |-> u into Z/p^N

/// Evaluates z at u. On the truncated ring this is only a ring map on
/// elements of z-degree < 1 unless u is nilpotent, so callers flag
/// entries that are not constant in z.
inline ZpN::elem eval_at(const PadicAlg& A, const PadicAlg::elem& a, std::int64_t u) {
  const auto& B = A.base();
  auto acc = B.zero(), pw = B.one();
  auto ub = B.from_int(u);
  for (std::size_t k = 0; k < A.width(); ++k) {
    acc = B.add(acc, B.mul(a[k], pw));
    pw = B.mul(pw, ub);
  }
  return acc;
}

struct Evaluated {
  Module<ZpN> mod;
  bool constant_entries = true;
};

inline AMat<ZpN> eval_matrix(const PadicAlg& A, const PadicAlg& T, const AMat<ZpN>& X, std::int64_t u,
                             bool* constant) {
  auto out = amat(T, X.rows(), X.cols());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j) {
      out(i, j) = T.constant(eval_at(A, X(i, j), u));
      if (A.zdeg_span(X(i, j)) > 1 && constant) *constant = false;
    }
  return out;
}

inline Evaluated evaluate_module(const Module<ZpN>& M, std::int64_t u) {
  const auto& A = M.ring;
  auto T = make_padic(A.base().p(), A.base().precision());
  Evaluated out;
  out.mod = {T, M.gens, eval_matrix(A, T, rel_or_empty(M), u, &out.constant_entries)};
  return out;
}

struct Ext1Injectivity {
  bool injective = false;
  ElementaryShape source_shape, target_shape;
  Ext1<ZpN> source, target;
  AMat<ZpN> comparison;  // images of source Ext generators in target Ext generators
};

/// Compares Ext^1 over the bi-truncated ring with Ext^1 after z |-> u.
inline Ext1Injectivity ext1_base_change_inject(const Module<ZpN>& C, const Module<ZpN>& X, std::int64_t u) {
  const auto& A = C.ring;
  require(A.base().is_unit(A.base().from_int(u)), "evaluation point must be a unit");
  auto cs = elementary_shape(C), xs = elementary_shape(X);
  require(cs.has_value() && xs.has_value(), "modules not of cyclic-sum shape");
  auto Ce = evaluate_module(C, u), Xe = evaluate_module(X, u);
  require(Ce.constant_entries && Xe.constant_entries,
          "modules not of cyclic-sum shape (relations depend on z)");
  Ext1Injectivity out;
  out.source = ext1(C, X);
  out.target = ext1(Ce.mod, Xe.mod);
  auto ss = elementary_shape(out.source.ext);
  auto ts = elementary_shape(out.target.ext);
  require(ss.has_value() && ts.has_value(), "Ext module is not elementary", ErrorKind::Inconsistency);
  out.source_shape = *ss;
  out.target_shape = *ts;
  // push cocycle representatives through z |-> u, then express them in the
  // target's Ext generators modulo coboundaries and the relations of X
  const auto& T = Ce.mod.ring;
  auto reps = eval_matrix(A, T, out.source.reps, u, nullptr);
  auto H1 = hom_from_free(Xe.mod, Ce.mod.rel.rows());
  auto bound = hom_dual(T, out.target.resolution, Ce.mod.gens, Xe.mod.gens);
  auto span = vstack(vstack(out.target.reps, rel_or_empty(H1)), bound);
  out.comparison = amat(T, reps.rows(), out.target.reps.rows());
  for (std::size_t i = 0; i < reps.rows(); ++i) {
    auto c = solve_in_span(T, span, reps.row(i));
    require(c.has_value(), "evaluated cocycle is not a cocycle", ErrorKind::Inconsistency);
    for (std::size_t j = 0; j < out.target.reps.rows(); ++j) out.comparison(i, j) = (*c)[j];
  }
  out.injective = out.source_shape.exponents == out.target_shape.exponents &&
                  out.source_shape.free_rank == 0 && out.target_shape.free_rank == 0;
  return out;
}

// ---------------------------------------------------------------------------
// short exact sequences and splitting

template <class Base>
struct ShortExactSequence {
  Module<Base> A, B, C;
  ModuleMap<Base> inject, surject;
};

template <class Base>
bool is_exact_at_middle(const ModuleMap<Base>& f, const ModuleMap<Base>& g) {
  if (!is_zero_map(compose(f, g))) return false;
  const auto& A = g.src.ring;
  auto K = kernel_into(A, g.F, g.tgt.rel);
  auto span = vstack(f.F.rows() ? f.F : amat(A, 0, g.src.gens), rel_or_empty(g.src));
  for (std::size_t i = 0; i < K.rows(); ++i)
    if (!in_span(A, span, K.row(i))) return false;
  return true;
}

template <class Base>
ShortExactSequence<Base> make_ses(const ModuleMap<Base>& inject, const ModuleMap<Base>& surject,
                                  ErrorKind kind = ErrorKind::InvalidInput) {
  require(verify_map(inject) && verify_map(surject), "sequence maps fail verification", kind);
  require(is_injective(inject), "first map of the sequence is not injective", kind);
  require(is_surjective(surject), "second map of the sequence is not surjective", kind);
  require(is_exact_at_middle(inject, surject), "sequence is not exact in the middle", kind);
  return {inject.src, inject.tgt, surject.tgt, inject, surject};
}

/// 0 -> X -> X ⊕ Y -> Y -> 0.
template <class Base>
ShortExactSequence<Base> direct_sum_sequence(const Module<Base>& X, const Module<Base>& Y) {
  const auto& A = X.ring;
  auto S = direct_sum(X, Y);
  auto i = amat(A, X.gens, S.gens), q = amat(A, S.gens, Y.gens);
  for (std::size_t k = 0; k < X.gens; ++k) i(k, k) = A.one();
  for (std::size_t k = 0; k < Y.gens; ++k) q(X.gens + k, k) = A.one();
  return make_ses(make_map(X, S, i), make_map(S, Y, q));
}

template <class Base>
struct SplitResult {
  bool split = false;
  std::optional<ModuleMap<Base>> section;  // C -> B
  Obstruction obstruction;
};

template <class Base>
SplitResult<Base> split_test(const ShortExactSequence<Base>& s) {
  auto lifted = lift_through(identity_map(s.C), s.surject);
  SplitResult<Base> out;
  if (!lifted.Y) {
    out.obstruction = lifted.obstruction;
    return out;
  }
  auto sec = make_map(s.C, s.B, *lifted.Y);
  if (!maps_equal(compose(sec, s.surject), identity_map(s.C)))
    fail(ErrorKind::Inconsistency, "computed section does not split the sequence");
  out.split = true;
  out.section = sec;
  return out;
}

/// Coordinates of an element x of M (which must lie in the image of
/// `incl`) in terms of incl's source generators.
template <class Base>
AVec<Base> preimage(const ModuleMap<Base>& incl, const AVec<Base>& x) {
  const auto& A = incl.src.ring;
  auto span = vstack(incl.F.rows() ? incl.F : amat(A, 0, incl.tgt.gens), rel_or_empty(incl.tgt));
  auto c = solve_in_span(A, span, x);
  require(c.has_value(), "element is not in the image", ErrorKind::Inconsistency);
  return AVec<Base>(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(incl.src.gens));
}

/// The induced sequence of torsion submodules. Throws HypothesisUnmet when
/// it is not exact.
template <class Base>
struct TorsionSequence {
  TorsionPart<Base> tA, tB, tC;
  ShortExactSequence<Base> ses;
};

template <class Base>
TorsionSequence<Base> torsion_sequence(const ShortExactSequence<Base>& s) {
  const auto& A = s.A.ring;
  TorsionSequence<Base> out{torsion_part(s.A), torsion_part(s.B), torsion_part(s.C), {}};
  auto induced = [&](const TorsionPart<Base>& src, const TorsionPart<Base>& tgt, const ModuleMap<Base>& f) {
    auto F = amat(A, src.tors.gens, tgt.tors.gens);
    auto img = amul(A, src.incl.F, f.F);
    for (std::size_t i = 0; i < src.tors.gens; ++i) F.set_row(i, preimage(tgt.incl, img.row(i)));
    return make_map(src.tors, tgt.tors, F);
  };
  out.ses = make_ses(induced(out.tA, out.tB, s.inject), induced(out.tB, out.tC, s.surject),
                     ErrorKind::HypothesisUnmet);
  return out;
}

/// Section of beta built as s(x, y) = s_tors(x) + lift(y) on C ≅ C_tors ⊕ C_tf.
/// `torsion_section` maps tC.tors (the torsion part of C) into B and splits
/// the torsion sequence; `free_witness` decomposes C with free torsion-free part.
template <class Base>
ModuleMap<Base> glue_splitting(const ShortExactSequence<Base>& s, const TorsionPart<Base>& tC,
                               const ModuleMap<Base>& torsion_section,
                               const ElementaryDecomposition<Base>& free_witness) {
  const auto& A = s.A.ring;
  require(verify_map(torsion_section) && torsion_section.src.gens == tC.tors.gens &&
              maps_equal(compose(torsion_section, s.surject), tC.incl),
          "torsion section fails verification");
  require(verify_decomposition(s.C, free_witness), "free part witness fails verification");
  const std::size_t t = free_witness.divisors.size();
  const std::size_t n = t + free_witness.free_rank;
  auto rows = amat(A, n, s.B.gens);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = free_witness.from_model.F.row(i);
    if (i < t) {
      rows.set_row(i, avec_mul(A, preimage(tC.incl, x), torsion_section.F));
    } else {
      rows.set_row(i, preimage(s.surject, x));
    }
  }
  auto sec = make_map(s.C, s.B, amul(A, free_witness.to_model.F, rows));
  if (!maps_equal(compose(sec, s.surject), identity_map(s.C)))
    fail(ErrorKind::Inconsistency, "glued section does not split the sequence");
  return sec;
}

}  // namespace degen
