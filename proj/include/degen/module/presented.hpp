#pragma once

// Finitely presented modules over A = B[z]/(z^M). Everything A-linear is
// done by restriction of scalars to B: A^g becomes B^{gM} with coordinate
// i*M + k holding the z^k coefficient of entry i. Kernels computed over B are
// z-stable, so collapsing their generators back gives A-generators.

#include <optional>
#include <utility>
#include <vector>

#include "degen/core/errors.hpp"
#include "degen/core/linalg.hpp"
#include "degen/ring_core.hpp"

namespace degen {

template <class Base>
using AElem = typename Algebra<Base>::elem;
template <class Base>
using AVec = std::vector<AElem<Base>>;
template <class Base>
using AMat = Mat<AElem<Base>>;
template <class Base>
using BVec = la::Vec<Base>;
template <class Base>
using BMat = la::Matrix<Base>;

template <class Base>
struct Module {
  Algebra<Base> ring;
  std::size_t gens = 0;
  AMat<Base> rel;  // rows are relations, cols == gens
};

/// Row i of F is the image of source generator i. cert satisfies
/// src.rel * F == cert * tgt.rel.
template <class Base>
struct ModuleMap {
  Module<Base> src, tgt;
  AMat<Base> F;
  AMat<Base> cert;
};

// ---------------------------------------------------------------------------
// small matrix helpers over A

template <class Base>
AMat<Base> amat(const Algebra<Base>& A, std::size_t m, std::size_t n) {
  AMat<Base> out(m, n, A.zero());
  if (m == 0) out.set_cols(n);
  return out;
}

template <class Base>
AMat<Base> aidentity(const Algebra<Base>& A, std::size_t n) {
  auto out = amat(A, n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = A.one();
  return out;
}

template <class Base>
AVec<Base> azero_vec(const Algebra<Base>& A, std::size_t n) {
  return AVec<Base>(n, A.zero());
}

template <class Base>
AVec<Base> unit_vec(const Algebra<Base>& A, std::size_t n, std::size_t i) {
  auto v = azero_vec(A, n);
  v[i] = A.one();
  return v;
}

template <class Base>
AMat<Base> amul(const Algebra<Base>& A, const AMat<Base>& x, const AMat<Base>& y) {
  auto out = amat(A, x.rows(), y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < x.cols(); ++k) {
      if (A.is_zero(x(i, k))) continue;
      for (std::size_t j = 0; j < y.cols(); ++j)
        out(i, j) = A.add(out(i, j), A.mul(x(i, k), y(k, j)));
    }
  return out;
}

template <class Base>
AVec<Base> avec_mul(const Algebra<Base>& A, const AVec<Base>& x, const AMat<Base>& y) {
  auto out = azero_vec(A, y.cols());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (A.is_zero(x[k])) continue;
    for (std::size_t j = 0; j < y.cols(); ++j) out[j] = A.add(out[j], A.mul(x[k], y(k, j)));
  }
  return out;
}

template <class Base>
AMat<Base> asub(const Algebra<Base>& A, const AMat<Base>& x, const AMat<Base>& y) {
  auto out = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = A.sub(x(i, j), y(i, j));
  return out;
}

template <class Base>
AVec<Base> avec_sub(const Algebra<Base>& A, const AVec<Base>& x, const AVec<Base>& y) {
  AVec<Base> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = A.sub(x[i], y[i]);
  return out;
}

template <class Base>
AVec<Base> avec_add(const Algebra<Base>& A, const AVec<Base>& x, const AVec<Base>& y) {
  AVec<Base> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = A.add(x[i], y[i]);
  return out;
}

template <class Base>
AVec<Base> avec_scale(const Algebra<Base>& A, const AElem<Base>& c, const AVec<Base>& x) {
  AVec<Base> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = A.mul(c, x[i]);
  return out;
}

template <class Base>
bool avec_is_zero(const Algebra<Base>& A, const AVec<Base>& x) {
  for (const auto& e : x)
    if (!A.is_zero(e)) return false;
  return true;
}

template <class Base>
bool amat_is_zero(const Algebra<Base>& A, const AMat<Base>& x) {
  for (std::size_t i = 0; i < x.rows(); ++i)
    if (!avec_is_zero(A, x.row(i))) return false;
  return true;
}

template <class Base>
bool amat_eq(const Algebra<Base>& A, const AMat<Base>& x, const AMat<Base>& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (!A.eq(x(i, j), y(i, j))) return false;
  return true;
}

template <class Base>
AMat<Base> hstack(const Algebra<Base>& A, const AMat<Base>& x, const AMat<Base>& y) {
  auto out = amat(A, x.rows(), x.cols() + y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) out(i, x.cols() + j) = y(i, j);
  }
  return out;
}

template <class Base>
AMat<Base> block_diag(const Algebra<Base>& A, const AMat<Base>& x, const AMat<Base>& y) {
  auto out = amat(A, x.rows() + y.rows(), x.cols() + y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) out(x.rows() + i, x.cols() + j) = y(i, j);
  return out;
}

template <class Base>
AMat<Base> transpose(const Algebra<Base>& A, const AMat<Base>& x) {
  auto out = amat(A, x.cols(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// restriction of scalars

template <class Base>
BVec<Base> expand(const Algebra<Base>& A, const AVec<Base>& v) {
  BVec<Base> out;
  out.reserve(v.size() * A.width());
  for (const auto& e : v)
    for (const auto& c : e) out.push_back(c);
  return out;
}

template <class Base>
AVec<Base> collapse(const Algebra<Base>& A, const BVec<Base>& v) {
  const std::size_t M = A.width();
  AVec<Base> out(v.size() / M, A.zero());
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = 0; k < M; ++k) out[i][k] = v[i * M + k];
  return out;
}

template <class Base>
AVec<Base> shift_vec(const Algebra<Base>& A, const AVec<Base>& v, int k) {
  AVec<Base> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = A.shift(v[i], k);
  return out;
}

/// Rows z^s * G_i for every row i and s < M, in order (i, s).
template <class Base>
BMat<Base> restrict_rows(const Algebra<Base>& A, const AMat<Base>& G) {
  BMat<Base> out;
  out.set_cols(G.cols() * A.width());
  for (std::size_t i = 0; i < G.rows(); ++i) {
    auto row = G.row(i);
    for (int s = 0; s < A.trunc(); ++s) out.push_row(expand(A, shift_vec(A, row, s)));
  }
  if (out.rows() == 0) out.set_cols(G.cols() * A.width());
  return out;
}

/// B-coefficients y indexed (i, s) back to an A-vector w with w_i = sum_s y_{i,s} z^s.
template <class Base>
AVec<Base> collapse_coeffs(const Algebra<Base>& A, const BVec<Base>& y) {
  return collapse(A, y);
}

/// Some w with w * G == v, or nullopt.
template <class Base>
std::optional<AVec<Base>> solve_in_span(const Algebra<Base>& A, const AMat<Base>& G,
                                        const AVec<Base>& v) {
  auto y = la::solve_left(A.base(), restrict_rows(A, G), expand(A, v));
  if (!y) return std::nullopt;
  return collapse_coeffs(A, *y);
}

template <class Base>
bool in_span(const Algebra<Base>& A, const AMat<Base>& G, const AVec<Base>& v) {
  if (avec_is_zero(A, v)) return true;
  if (G.rows() == 0) return false;
  return solve_in_span(A, G, v).has_value();
}

/// Generators of { a in A^k : a * F lies in the row span of Rel } (F is k x n,
/// Rel is r x n). Redundant generators are dropped.
template <class Base>
AMat<Base> kernel_into(const Algebra<Base>& A, const AMat<Base>& F, const AMat<Base>& Rel) {
  const std::size_t k = F.rows();
  AMat<Base> out;
  out.set_cols(k);
  if (k == 0) return out;
  auto stacked = vstack(restrict_rows(A, F), restrict_rows(A, Rel));
  auto K = la::left_kernel(A.base(), stacked);
  const std::size_t kw = k * A.width();
  for (std::size_t i = 0; i < K.rows(); ++i) {
    auto row = K.row(i);
    row.resize(kw);
    auto v = collapse(A, row);
    if (avec_is_zero(A, v)) continue;
    if (out.rows() > 0 && in_span(A, out, v)) continue;
    out.push_row(v);
  }
  if (out.rows() == 0) out.set_cols(k);
  return out;
}

// ---------------------------------------------------------------------------
// modules

template <class Base>
Module<Base> free_module(const Algebra<Base>& A, std::size_t g) {
  return {A, g, amat(A, 0, g)};
}

template <class Base>
Module<Base> zero_module(const Algebra<Base>& A) {
  return free_module(A, 0);
}

/// A / (a) as a one-generator module.
template <class Base>
Module<Base> cyclic_module(const Algebra<Base>& A, const AElem<Base>& a) {
  auto m = free_module(A, 1);
  m.rel.push_row({a});
  return m;
}

template <class Base>
Module<Base> direct_sum(const Module<Base>& x, const Module<Base>& y) {
  return {x.ring, x.gens + y.gens, block_diag(x.ring, x.rel, y.rel)};
}

template <class Base>
bool is_zero_elem(const Module<Base>& N, const AVec<Base>& v) {
  return in_span(N.ring, N.rel, v);
}

template <class Base>
bool is_zero_module(const Module<Base>& N) {
  for (std::size_t i = 0; i < N.gens; ++i)
    if (!is_zero_elem(N, unit_vec(N.ring, N.gens, i))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// maps

template <class Base>
ModuleMap<Base> make_map(const Module<Base>& src, const Module<Base>& tgt, const AMat<Base>& F) {
  const auto& A = src.ring;
  require(F.rows() == src.gens && (F.cols() == tgt.gens || src.gens == 0),
          "map matrix has the wrong shape");
  AMat<Base> Fx = F;
  if (src.gens == 0) Fx = amat(A, 0, tgt.gens);
  auto image = amul(A, src.rel, Fx);
  auto cert = amat(A, src.rel.rows(), tgt.rel.rows());
  for (std::size_t i = 0; i < image.rows(); ++i) {
    auto row = image.row(i);
    if (avec_is_zero(A, row)) continue;
    auto w = tgt.rel.rows() ? solve_in_span(A, tgt.rel, row) : std::nullopt;
    require(w.has_value(), "map is not well defined: a relation does not map to zero");
    cert.set_row(i, *w);
  }
  return {src, tgt, Fx, cert};
}

template <class Base>
bool verify_map(const ModuleMap<Base>& f) {
  const auto& A = f.src.ring;
  return amat_eq(A, amul(A, f.src.rel, f.F), amul(A, f.cert, f.tgt.rel));
}

template <class Base>
ModuleMap<Base> identity_map(const Module<Base>& m) {
  return {m, m, aidentity(m.ring, m.gens), aidentity(m.ring, m.rel.rows())};
}

template <class Base>
ModuleMap<Base> zero_map(const Module<Base>& src, const Module<Base>& tgt) {
  return {src, tgt, amat(src.ring, src.gens, tgt.gens), amat(src.ring, src.rel.rows(), tgt.rel.rows())};
}

/// f then g.
template <class Base>
ModuleMap<Base> compose(const ModuleMap<Base>& f, const ModuleMap<Base>& g) {
  const auto& A = f.src.ring;
  return {f.src, g.tgt, amul(A, f.F, g.F), amul(A, f.cert, g.cert)};
}

template <class Base>
bool is_zero_map(const ModuleMap<Base>& f) {
  for (std::size_t i = 0; i < f.F.rows(); ++i)
    if (!is_zero_elem(f.tgt, f.F.row(i))) return false;
  return true;
}

template <class Base>
bool maps_equal(const ModuleMap<Base>& f, const ModuleMap<Base>& g) {
  const auto& A = f.src.ring;
  for (std::size_t i = 0; i < f.F.rows(); ++i)
    if (!is_zero_elem(f.tgt, avec_sub(A, f.F.row(i), g.F.row(i)))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Tietze pruning: eliminate generators that occur with a unit coefficient in
// some relation, then drop zero relations.

template <class Base>
struct Pruned {
  Module<Base> mod;
  AMat<Base> to;    // old generators in new coordinates (g_old x g_new)
  AMat<Base> from;  // new generators in old coordinates (g_new x g_old)
};

template <class Base>
Pruned<Base> prune(const Module<Base>& m) {
  const auto& A = m.ring;
  AMat<Base> R = m.rel;
  if (R.rows() == 0) R = amat(A, 0, m.gens);
  AMat<Base> to = aidentity(A, m.gens);
  std::vector<std::size_t> alive(m.gens);
  for (std::size_t j = 0; j < m.gens; ++j) alive[j] = j;  // current col -> old gen

  for (;;) {
    bool found = false;
    std::size_t ri = 0, cj = 0;
    for (std::size_t i = 0; i < R.rows() && !found; ++i)
      for (std::size_t j = 0; j < R.cols(); ++j)
        if (A.is_unit(R(i, j))) {
          ri = i;
          cj = j;
          found = true;
          break;
        }
    if (!found) break;
    // e_j = sum_k c_k e_k with c_k = -u^{-1} R(ri, k)
    auto uinv = A.inv(R(ri, cj));
    std::vector<AElem<Base>> c(R.cols());
    for (std::size_t k = 0; k < R.cols(); ++k)
      c[k] = k == cj ? A.zero() : A.neg(A.mul(uinv, R(ri, k)));
    auto substitute = [&](AMat<Base>& X) {
      AMat<Base> Y = amat(A, X.rows(), X.cols() - 1);
      for (std::size_t r = 0; r < X.rows(); ++r) {
        std::size_t out = 0;
        for (std::size_t k = 0; k < X.cols(); ++k) {
          if (k == cj) continue;
          Y(r, out++) = A.add(X(r, k), A.mul(X(r, cj), c[k]));
        }
      }
      X = std::move(Y);
    };
    AMat<Base> R2;
    R2.set_cols(R.cols());
    for (std::size_t r = 0; r < R.rows(); ++r)
      if (r != ri) R2.push_row(R.row(r));
    if (R2.rows() == 0) R2.set_cols(R.cols());
    R = std::move(R2);
    substitute(R);
    substitute(to);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(cj));
  }
  AMat<Base> clean;
  clean.set_cols(R.cols());
  for (std::size_t r = 0; r < R.rows(); ++r)
    if (!avec_is_zero(A, R.row(r))) clean.push_row(R.row(r));
  if (clean.rows() == 0) clean.set_cols(R.cols());

  auto from = amat(A, alive.size(), m.gens);
  for (std::size_t j = 0; j < alive.size(); ++j) from(j, alive[j]) = A.one();
  return {{A, alive.size(), clean}, to, from};
}

/// Prunes after making every generator that is zero in the module an
/// explicit unit relation, so zero summands disappear entirely.
template <class Base>
Pruned<Base> simplify(const Module<Base>& m) {
  auto first = prune(m);
  Module<Base> x = first.mod;
  bool changed = false;
  for (std::size_t i = 0; i < x.gens; ++i) {
    auto e = unit_vec(x.ring, x.gens, i);
    if (is_zero_elem(x, e)) {
      x.rel.push_row(e);
      changed = true;
    }
  }
  if (!changed) return first;
  auto second = prune(x);
  const auto& A = m.ring;
  return {second.mod, amul(A, first.to, second.to), amul(A, second.from, first.from)};
}

/// Module map m -> simplify(m) and back, as verified maps.
template <class Base>
struct Simplified {
  Module<Base> mod;
  ModuleMap<Base> to, from;
};

template <class Base>
Simplified<Base> simplify_with_maps(const Module<Base>& m) {
  auto p = simplify(m);
  return {p.mod, make_map(m, p.mod, p.to), make_map(p.mod, m, p.from)};
}

// ---------------------------------------------------------------------------
// submodules, quotients, subquotients

/// The submodule of N generated by the rows of G, with its inclusion.
template <class Base>
std::pair<Module<Base>, ModuleMap<Base>> submodule(const Module<Base>& N, const AMat<Base>& G) {
  const auto& A = N.ring;
  Module<Base> S{A, G.rows(), kernel_into(A, G, N.rel)};
  AMat<Base> Gx = G;
  if (G.rows() == 0) Gx = amat(A, 0, N.gens);
  return {S, make_map(S, N, Gx)};
}

/// N / <rows of G>, with the projection.
template <class Base>
std::pair<Module<Base>, ModuleMap<Base>> quotient(const Module<Base>& N, const AMat<Base>& G) {
  Module<Base> Q{N.ring, N.gens, vstack(N.rel, G)};
  if (Q.rel.rows() == 0) Q.rel = amat(N.ring, 0, N.gens);
  return {Q, make_map(N, Q, aidentity(N.ring, N.gens))};
}

template <class Base>
struct Subquotient {
  Module<Base> kernel, image, cokernel;
  ModuleMap<Base> kernel_incl;  // kernel -> source
  ModuleMap<Base> coimage;      // source -> image
  ModuleMap<Base> image_incl;   // image -> target
  ModuleMap<Base> coker_proj;   // target -> cokernel
};

template <class Base>
Subquotient<Base> subquotient(const ModuleMap<Base>& f) {
  require(verify_map(f), "malformed map certificate");
  const auto& A = f.src.ring;
  Subquotient<Base> out;
  // kernel: source vectors mapping into the target relations
  auto K = kernel_into(A, f.F, f.tgt.rel);
  auto [kmod, kincl] = submodule(f.src, K);
  auto ks = simplify(kmod);
  out.kernel = ks.mod;
  out.kernel_incl = make_map(ks.mod, f.src, amul(A, ks.from, kincl.F));

  auto [imod, iincl] = submodule(f.tgt, f.F);
  auto is = simplify(imod);
  out.image = is.mod;
  out.coimage = make_map(f.src, is.mod, is.to);
  out.image_incl = make_map(is.mod, f.tgt, amul(A, is.from, f.F));

  auto [cmod, cproj] = quotient(f.tgt, f.F);
  auto cs = simplify(cmod);
  out.cokernel = cs.mod;
  out.coker_proj = make_map(f.tgt, cs.mod, cs.to);
  return out;
}

template <class Base>
struct Homology {
  Module<Base> mod;
  AMat<Base> reps;  // generator representatives in the middle term
};

/// Homology ker(g) / im(f) at the middle of X --f--> Y --g--> Z.
template <class Base>
Homology<Base> homology(const ModuleMap<Base>& f, const ModuleMap<Base>& g) {
  const auto& A = g.src.ring;
  auto K = kernel_into(A, g.F, g.tgt.rel);
  Module<Base> Yq{A, g.src.gens, vstack(g.src.rel, f.F)};
  if (Yq.rel.rows() == 0) Yq.rel = amat(A, 0, g.src.gens);
  auto [H, incl] = submodule(Yq, K);
  auto s = simplify(H);
  return {s.mod, amul(A, s.from, incl.F)};
}

template <class Base>
bool is_injective(const ModuleMap<Base>& f) {
  auto K = kernel_into(f.src.ring, f.F, f.tgt.rel);
  for (std::size_t i = 0; i < K.rows(); ++i)
    if (!is_zero_elem(f.src, K.row(i))) return false;
  return true;
}

template <class Base>
bool is_surjective(const ModuleMap<Base>& f) {
  const auto& A = f.src.ring;
  auto G = vstack(f.tgt.rel, f.F.rows() ? f.F : amat(A, 0, f.tgt.gens));
  for (std::size_t i = 0; i < f.tgt.gens; ++i)
    if (!in_span(A, G, unit_vec(A, f.tgt.gens, i))) return false;
  return true;
}

}  // namespace degen
