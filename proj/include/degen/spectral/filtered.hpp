#pragma once

// Filtered chain complexes of presented modules and the pieces cut out of
// them: approximate cycles, spectral pages, homology with its induced
// filtration. Every piece is a subquotient num / den of one ambient C_i,
// presented on the rows of num.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "degen/module_algebra.hpp"

namespace degen {

template <class Base>
struct FilteredComplex {
  Algebra<Base> ring;
  int lo = 0, hi = 0;    // degrees
  int wmin = 0, wmax = 0;  // fil^wmin = C, fil^(wmax+1) = 0
  std::vector<Module<Base>> C;                 // C[i - lo]
  std::vector<std::vector<AMat<Base>>> fil;    // fil[i - lo][n - wmin], rows in C_i coordinates
  std::vector<AMat<Base>> d;                   // d[i - lo] : C_i -> C_(i-1); d[0] is ignored

  bool in_range(int i) const { return i >= lo && i <= hi; }

  Module<Base> module(int i) const { return in_range(i) ? C[static_cast<std::size_t>(i - lo)] : zero_module(ring); }
  std::size_t gens(int i) const { return in_range(i) ? module(i).gens : 0; }

  /// Generators of fil^n C_i.
  AMat<Base> fil_gens(int i, int n) const {
    if (!in_range(i) || n > wmax) return amat(ring, 0, gens(i));
    if (n <= wmin) return aidentity(ring, gens(i));
    return fil[static_cast<std::size_t>(i - lo)][static_cast<std::size_t>(n - wmin)];
  }

  /// Matrix of d : C_i -> C_(i-1) (zero outside the degree range).
  AMat<Base> diff(int i) const {
    if (!in_range(i) || !in_range(i - 1)) return amat(ring, gens(i), gens(i - 1));
    return d[static_cast<std::size_t>(i - lo)];
  }
};

template <class Base>
FilteredComplex<Base> validate(FilteredComplex<Base> X) {
  const auto& A = X.ring;
  require(X.lo <= X.hi, "empty degree range");
  require(X.wmin <= X.wmax, "empty weight range");
  const auto nd = static_cast<std::size_t>(X.hi - X.lo + 1);
  const auto nw = static_cast<std::size_t>(X.wmax - X.wmin + 1);
  require(X.C.size() == nd, "expected one module per degree");
  require(X.fil.size() == nd, "expected one filtration per degree");
  if (X.d.size() < nd) X.d.resize(nd);
  for (int i = X.lo; i <= X.hi; ++i) {
    const auto k = static_cast<std::size_t>(i - X.lo);
    const auto& Ci = X.C[k];
    const auto tag = " in degree " + std::to_string(i);
    if (Ci.rel.rows() == 0) X.C[k].rel = amat(A, 0, Ci.gens);
    require(X.fil[k].size() == nw, "expected one filtration step per weight" + tag);
    for (auto& G : X.fil[k]) {
      if (G.rows() == 0) G = amat(A, 0, Ci.gens);
      require(G.cols() == Ci.gens, "filtration generators have the wrong width" + tag);
    }
    auto span0 = vstack(X.fil[k][0], rel_or_empty(Ci));
    for (std::size_t j = 0; j < Ci.gens; ++j)
      require(in_span(A, span0, unit_vec(A, Ci.gens, j)), "lowest filtration step is not the whole module" + tag);
    for (std::size_t w = 0; w + 1 < nw; ++w) {
      auto big = vstack(X.fil[k][w], rel_or_empty(Ci));
      const auto& small = X.fil[k][w + 1];
      for (std::size_t r = 0; r < small.rows(); ++r)
        require(in_span(A, big, small.row(r)),
                "filtration not nested at weight " + std::to_string(X.wmin + static_cast<int>(w) + 1) + tag);
    }
    if (i > X.lo) {
      auto& D = X.d[k];
      const auto& Cj = X.C[k - 1];
      if (D.rows() == 0 && D.cols() == 0) D = amat(A, Ci.gens, Cj.gens);
      require(D.rows() == Ci.gens && D.cols() == Cj.gens, "differential has the wrong shape" + tag);
      try {
        make_map(Ci, X.module(i - 1), D);
      } catch (const Error&) {
        fail(ErrorKind::InvalidInput, "differential is not well-defined" + tag);
      }
    }
  }
  for (int i = X.lo + 2; i <= X.hi; ++i) {
    auto dd = amul(A, X.diff(i), X.diff(i - 1));
    auto tgt = X.module(i - 2);
    for (std::size_t r = 0; r < dd.rows(); ++r)
      require(is_zero_elem(tgt, dd.row(r)), "d o d != 0 in degree " + std::to_string(i));
  }
  for (int i = X.lo + 1; i <= X.hi; ++i)
    for (int n = X.wmin + 1; n <= X.wmax; ++n) {
      auto img = amul(A, X.fil_gens(i, n), X.diff(i));
      auto span = vstack(X.fil_gens(i - 1, n), rel_or_empty(X.module(i - 1)));
      for (std::size_t r = 0; r < img.rows(); ++r)
        require(in_span(A, span, img.row(r)),
                "filtration violated by d at weight " + std::to_string(n) + " in degree " + std::to_string(i));
    }
  return X;
}

// ---------------------------------------------------------------------------
// subquotients of one C_i

template <class Base>
struct Piece {
  int degree = 0;
  AMat<Base> num, den;  // ambient rows
  Module<Base> mod;     // presented on the rows of num
};

template <class Base>
Piece<Base> make_piece(const FilteredComplex<Base>& X, int i, AMat<Base> num, AMat<Base> den) {
  const auto& A = X.ring;
  const auto g = X.gens(i);
  if (num.rows() == 0) num = amat(A, 0, g);
  if (den.rows() == 0) den = amat(A, 0, g);
  auto Q = quotient(X.module(i), den).first;
  auto mod = submodule(Q, num).first;
  return {i, std::move(num), std::move(den), std::move(mod)};
}

/// Coordinates of an ambient vector in the generators of a piece, or throws.
template <class Base>
AVec<Base> piece_coords(const FilteredComplex<Base>& X, const Piece<Base>& P, const AVec<Base>& v) {
  const auto& A = X.ring;
  auto span = vstack(vstack(P.num, P.den), rel_or_empty(X.module(P.degree)));
  auto c = solve_in_span(A, span, v);
  require(c.has_value(), "element not in the expected subquotient", ErrorKind::Inconsistency);
  return AVec<Base>(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(P.num.rows()));
}

/// The map of pieces induced by an ambient matrix (identity when F is empty).
template <class Base>
ModuleMap<Base> piece_map(const FilteredComplex<Base>& X, const Piece<Base>& src, const Piece<Base>& tgt,
                          const AMat<Base>* ambient) {
  const auto& A = X.ring;
  auto img = ambient ? amul(A, src.num, *ambient) : src.num;
  auto F = amat(A, src.num.rows(), tgt.num.rows());
  for (std::size_t r = 0; r < img.rows(); ++r) F.set_row(r, piece_coords(X, tgt, img.row(r)));
  return make_map(src.mod, tgt.mod, F);
}

/// Z_r^n in degree i: x in fil^n with dx in fil^(n+r).
template <class Base>
AMat<Base> approx_cycles(const FilteredComplex<Base>& X, int i, int n, int r) {
  const auto& A = X.ring;
  auto G = X.fil_gens(i, n);
  if (!X.in_range(i - 1) || G.rows() == 0) return G;
  auto target = vstack(X.fil_gens(i - 1, n + r), rel_or_empty(X.module(i - 1)));
  auto K = kernel_into(A, amul(A, G, X.diff(i)), target);
  if (K.rows() == 0) return amat(A, 0, X.gens(i));
  return amul(A, K, G);
}

/// Genuine cycles in fil^n.
template <class Base>
AMat<Base> cycles(const FilteredComplex<Base>& X, int i, int n) {
  return approx_cycles(X, i, n, X.wmax - std::max(n, X.wmin) + 2);
}

template <class Base>
AMat<Base> boundaries_of(const FilteredComplex<Base>& X, int i, const AMat<Base>& rows_in_next) {
  if (rows_in_next.rows() == 0) return amat(X.ring, 0, X.gens(i));
  return amul(X.ring, rows_in_next, X.diff(i + 1));
}

template <class Base>
Piece<Base> homology_piece(const FilteredComplex<Base>& X, int i) {
  return make_piece(X, i, cycles(X, i, X.wmin), boundaries_of(X, i, X.fil_gens(i + 1, X.wmin)));
}

/// H_i(fil^n C).
template <class Base>
Piece<Base> filtered_homology_piece(const FilteredComplex<Base>& X, int i, int n) {
  return make_piece(X, i, cycles(X, i, n), boundaries_of(X, i, X.fil_gens(i + 1, n)));
}

/// F^n H_i = image of H_i(fil^n) in H_i.
template <class Base>
Piece<Base> induced_filtration_piece(const FilteredComplex<Base>& X, int i, int n) {
  return make_piece(X, i, cycles(X, i, n), boundaries_of(X, i, X.fil_gens(i + 1, X.wmin)));
}

template <class Base>
Piece<Base> graded_homology_piece(const FilteredComplex<Base>& X, int i, int n) {
  return make_piece(X, i, cycles(X, i, n),
                    vstack(cycles(X, i, n + 1), boundaries_of(X, i, X.fil_gens(i + 1, X.wmin))));
}

/// E_r^n in total degree i: Z_r^n / (Z_(r-1)^(n+1) + d Z_(r-1)^(n-r+1)).
template <class Base>
Piece<Base> page_piece(const FilteredComplex<Base>& X, int r, int n, int i) {
  auto den = vstack(approx_cycles(X, i, n + 1, r - 1),
                    boundaries_of(X, i, approx_cycles(X, i + 1, n - r + 1, r - 1)));
  return make_piece(X, i, approx_cycles(X, i, n, r), den);
}

// ---------------------------------------------------------------------------
// pages

template <class Base>
struct SpectralPage {
  int r = 1;
  std::map<std::pair<int, int>, Piece<Base>> entries;             // (n, i)
  std::map<std::pair<int, int>, ModuleMap<Base>> differentials;   // from (n, i) to (n + r, i - 1)
};

template <class Base>
SpectralPage<Base> page(const FilteredComplex<Base>& X, int r) {
  require(r >= 1, "page index must be at least 1");
  SpectralPage<Base> P;
  P.r = r;
  for (int n = X.wmin; n <= X.wmax; ++n)
    for (int i = X.lo; i <= X.hi; ++i) P.entries.emplace(std::pair{n, i}, page_piece(X, r, n, i));
  for (const auto& [key, src] : P.entries) {
    auto [n, i] = key;
    auto it = P.entries.find({n + r, i - 1});
    if (it == P.entries.end()) continue;
    auto D = X.diff(i);
    P.differentials.emplace(key, piece_map(X, src, it->second, &D));
  }
  return P;
}

/// Page index from which everything is stable.
template <class Base>
int stable_page(const FilteredComplex<Base>& X) {
  return X.wmax - X.wmin + 2;
}

template <class Base>
struct FilteredHomology {
  Piece<Base> H;
  std::map<int, Piece<Base>> F;   // n -> F^n H
  std::map<int, Piece<Base>> gr;  // n -> gr^n H
};

template <class Base>
FilteredHomology<Base> homology_filtered(const FilteredComplex<Base>& X, int i) {
  FilteredHomology<Base> out{homology_piece(X, i), {}, {}};
  for (int n = X.wmin; n <= X.wmax; ++n) {
    out.F.emplace(n, induced_filtration_piece(X, i, n));
    out.gr.emplace(n, graded_homology_piece(X, i, n));
  }
  return out;
}

}  // namespace degen
