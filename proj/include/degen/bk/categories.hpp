#pragma once

// Category membership for Breuil-Kisin modules, certified by explicit
// towers 0 = M_0 ⊂ M_1 ⊂ ... ⊂ M_k = M of φ-stable submodules whose layers
// are verified one by one.

#include <string>
#include <vector>

#include "degen/bk/module.hpp"

namespace degen {

enum class CategoryTag { ModS1, ModSinf, BarModS1, BarModSinf };

inline std::string to_string(CategoryTag t) {
  switch (t) {
    case CategoryTag::ModS1: return "Mod_S1";
    case CategoryTag::ModSinf: return "Mod_Sinf";
    case CategoryTag::BarModS1: return "BarMod_S1";
    case CategoryTag::BarModSinf: return "BarMod_Sinf";
  }
  return "?";
}

enum class LayerKind { ModS1, FreeS };

/// steps[i] generates M_(i+1), rows in the ambient module's generators.
struct Tower {
  std::vector<AMat<ZpN>> steps;
};

struct CategoryMembership {
  CategoryTag tag = CategoryTag::ModS1;
  Tower tower;
  std::vector<LayerKind> layers;
  std::vector<HeightCertificate> heights;
};

inline Tower trivial_tower(const BKModule& B) { return {{aidentity(B.ring(), B.gens())}}; }

struct LayerCheck {
  bool ok = false;
  std::string reason;
  std::optional<HeightCertificate> height;
};

inline LayerCheck check_mod_s1(const BKModule& L, int r) {
  const auto& A = L.ring();
  const auto p = A.from_int(A.base().p());
  for (std::size_t i = 0; i < L.gens(); ++i) {
    auto v = azero_vec(A, L.gens());
    v[i] = p;
    if (!is_zero_elem(L.M, v)) return {false, "not killed by p", {}};
  }
  if (!gr_p(L.M, 0).free) return {false, "not free over S/p", {}};
  auto h = check_height(L, 0, r);
  if (auto* f = std::get_if<HeightFailure>(&h)) return {false, "height exceeds " + std::to_string(r) + ": " + f->message, {}};
  return {true, "", std::get<HeightCertificate>(h)};
}

inline LayerCheck check_free_over_S(const BKModule& L, int r) {
  auto d = decompose_over_S(L.M);
  auto* e = std::get_if<ElementaryDecomposition<ZpN>>(&d);
  if (!e) return {false, "not elementary", {}};
  if (!e->torsion_exponents.empty()) return {false, "has torsion", {}};
  auto h = check_height(L, 0, r);
  if (auto* f = std::get_if<HeightFailure>(&h)) return {false, "height exceeds " + std::to_string(r) + ": " + f->message, {}};
  return {true, "", std::get<HeightCertificate>(h)};
}

/// Verifies every layer of the tower; free layers are allowed only when
/// `allow_free`. Throws `kind` naming the first failing layer.
inline CategoryMembership verify_tower(const BKModule& B, const Tower& T, int r, bool allow_free,
                                       ErrorKind kind = ErrorKind::InvalidInput) {
  const auto& A = B.ring();
  require(!T.steps.empty(), "tower has no steps", kind);
  auto rel = rel_or_empty(B.M);
  CategoryMembership out;
  out.tower = T;
  bool any_free = false;
  AMat<ZpN> prev = amat(A, 0, B.gens());
  for (std::size_t i = 0; i < T.steps.size(); ++i) {
    const auto& S = T.steps[i];
    const auto tag = "tower layer " + std::to_string(i + 1);
    require(S.cols() == B.gens() || (S.rows() == 0), tag + " has the wrong width", kind);
    auto Sx = S.rows() ? S : amat(A, 0, B.gens());
    auto span = vstack(Sx, rel);
    for (std::size_t k = 0; k < prev.rows(); ++k)
      require(in_span(A, span, prev.row(k)), tag + " does not contain the previous step", kind);
    BKModule L;
    try {
      L = bk_subquotient(B, Sx, prev, kind);
    } catch (const Error& e) {
      fail(kind, tag + " fails verification: " + e.what());
    }
    auto c = check_mod_s1(L, r);
    LayerKind lk = LayerKind::ModS1;
    if (!c.ok && allow_free) {
      auto f = check_free_over_S(L, r);
      if (f.ok) {
        c = f;
        lk = LayerKind::FreeS;
        any_free = true;
      } else {
        c.reason += "; and as a free layer: " + f.reason;
      }
    }
    require(c.ok, tag + " fails verification: " + c.reason, kind);
    out.layers.push_back(lk);
    out.heights.push_back(*c.height);
    prev = Sx;
  }
  for (std::size_t j = 0; j < B.gens(); ++j)
    require(in_span(A, vstack(prev, rel), unit_vec(A, B.gens(), j)), "tower does not reach the whole module", kind);
  const bool single = T.steps.size() == 1;
  out.tag = any_free ? (single ? CategoryTag::BarModS1 : CategoryTag::BarModSinf)
                     : (single ? CategoryTag::ModS1 : CategoryTag::ModSinf);
  return out;
}

/// Tower steps of a submodule (given by generator rows G of B) rewritten in the submodule's generators.
inline Tower restrict_tower(const BKModule& B, const AMat<ZpN>& G, const Tower& T, std::size_t count) {
  Tower out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& S = T.steps[i];
    auto R = amat(B.ring(), S.rows(), G.rows());
    for (std::size_t k = 0; k < S.rows(); ++k) {
      auto c = coords_in(B, G, S.row(k));
      require(c.has_value(), "tower step leaves the submodule", ErrorKind::Inconsistency);
      R.set_row(k, *c);
    }
    out.steps.push_back(R);
  }
  return out;
}

// ---------------------------------------------------------------------------
// kernels and cokernels in Mod_S1

struct KernelCokernel {
  BKModule kernel, cokernel;
  AMat<ZpN> kernel_rows;  // generators of the kernel in source coordinates
  LayerCheck kernel_check, cokernel_check;
  bool hypothesis_met = false;  // e * r < p - 1
};

inline bool low_ramification(const BKModule& B, int e, int r) { return e * r < B.ring().base().p() - 1; }

/// Module-level kernel and cokernel of f : Q -> N in Mod_S1 with induced
/// Frobenius and re-certified heights. Outside e*r < p-1 the result is
/// returned with the failing checks recorded instead of raising.
inline KernelCokernel bk_kernel_cokernel(const BKModule& Q, const BKModule& N, const AMat<ZpN>& F, int e, int r) {
  const auto& A = Q.ring();
  KernelCokernel out;
  out.hypothesis_met = low_ramification(Q, e, r);
  for (const auto* X : {&Q, &N}) {
    auto c = check_mod_s1(*X, r);
    if (!c.ok && out.hypothesis_met)
      fail(ErrorKind::InvalidInput, std::string(X == &Q ? "source" : "target") + " is not in Mod_S1: " + c.reason);
  }
  auto f = bk_morphism(Q, N, F);
  out.kernel_rows = kernel_into(A, f.F, rel_or_empty(N.M));
  out.kernel = bk_subquotient(Q, out.kernel_rows, {});
  out.cokernel = bk_subquotient(N, aidentity(A, N.gens()), f.F);
  out.kernel_check = check_mod_s1(out.kernel, r);
  out.cokernel_check = check_mod_s1(out.cokernel, r);
  if (out.hypothesis_met && !(out.kernel_check.ok && out.cokernel_check.ok))
    fail(ErrorKind::Inconsistency, "kernel or cokernel left Mod_S1 although e*r < p-1");
  return out;
}

// ---------------------------------------------------------------------------
// image and cokernel of Q -> N with N an iterated extension

struct ClosureResult {
  BKModule image;      // presented on the images of Q's generators
  Tower image_tower;
  BKModule cokernel;   // presented on N's generators
  Tower cokernel_tower;
};

/// Induction along N's tower: with N' the penultimate step and N'' = N/N',
/// the snake lemma for g : Q -> N'' and h : ker g -> N' gives
/// 0 -> Im h -> Im f -> Im g -> 0 and 0 -> Coker h -> Coker f -> Coker g -> 0.
/// Layer failures raise `kind`.
inline ClosureResult closure_check(const BKModule& Q, const BKModule& N, const AMat<ZpN>& F, const Tower& T, int r,
                                   ErrorKind kind = ErrorKind::Inconsistency) {
  const auto& A = Q.ring();
  require(!T.steps.empty(), "target tower has no steps", kind);
  auto f = bk_morphism(Q, N, F, kind);
  ClosureResult out;
  auto Fx = f.F.rows() ? f.F : amat(A, 0, N.gens());
  out.image = bk_subquotient(N, Fx, {}, kind);
  out.cokernel = bk_subquotient(N, aidentity(A, N.gens()), Fx, kind);
  const auto k = T.steps.size();
  if (k == 1) {
    out.image_tower = trivial_tower(out.image);
    out.cokernel_tower = trivial_tower(out.cokernel);
  } else {
    const auto& G = T.steps[k - 2];
    auto Np = bk_subquotient(N, G, {}, kind);
    auto Tp = restrict_tower(N, G, T, k - 1);
    auto K = kernel_into(A, Fx, vstack(G, rel_or_empty(N.M)));
    if (K.rows() == 0) K = amat(A, 0, Q.gens());
    auto Kmod = bk_subquotient(Q, K, {}, kind);
    auto img = amul(A, K, Fx);
    auto H = amat(A, K.rows(), G.rows());
    for (std::size_t i = 0; i < img.rows(); ++i) {
      auto c = coords_in(N, G, img.row(i));
      require(c.has_value(), "kernel of the projection does not land in the subobject", ErrorKind::Inconsistency);
      H.set_row(i, *c);
    }
    auto sub = closure_check(Kmod, Np, H, Tp, r, kind);
    for (const auto& S : sub.image_tower.steps)
      out.image_tower.steps.push_back(S.rows() ? amul(A, S, K) : amat(A, 0, Q.gens()));
    out.image_tower.steps.push_back(aidentity(A, Q.gens()));
    for (const auto& S : sub.cokernel_tower.steps)
      out.cokernel_tower.steps.push_back(S.rows() ? amul(A, S, G) : amat(A, 0, N.gens()));
    out.cokernel_tower.steps.push_back(aidentity(A, N.gens()));
  }
  verify_tower(out.image, out.image_tower, r, false, kind);
  verify_tower(out.cokernel, out.cokernel_tower, r, false, kind);
  return out;
}

}  // namespace degen
