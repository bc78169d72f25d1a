#pragma once

// Breuil-Kisin modules over Z/p^N[z]/(z^M). The Frobenius is stored as an
// honest linear map phi : φ*M -> M out of the twisted presentation, so no
// semilinear matrices appear: phi(1 ⊗ e_i) is row i of phi.F, and for an
// element x of M, phi(1 ⊗ x) = φ(x) * phi.F with φ applied coefficientwise.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "degen/module_algebra.hpp"

namespace degen {

struct BKModule {
  Module<ZpN> M;
  ModuleMap<ZpN> phi;  // φ*M -> M
  int s = 0, r = 0;    // height window
  EisensteinSpec eisenstein;
  // computed by the library from gated data, so never re-gated
  bool derived = false;

  const PadicAlg& ring() const { return M.ring; }
  std::size_t gens() const { return M.gens; }
};

inline Module<ZpN> twisted(const Module<ZpN>& M) { return base_change(M, FrobeniusTwist{}).mod; }

inline AVec<ZpN> frobenius_vec(const PadicAlg& A, const AVec<ZpN>& x) {
  AVec<ZpN> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = frobenius(A, x[i]);
  return out;
}

/// phi(1 ⊗ x) for x in generator coordinates.
inline AVec<ZpN> apply_phi(const BKModule& B, const AVec<ZpN>& x) {
  const auto& A = B.ring();
  if (B.gens() == 0) return {};
  return avec_mul(A, frobenius_vec(A, x), B.phi.F);
}

inline AElem<ZpN> eisenstein_power(const BKModule& B, int k) { return eisenstein_eval(B.ring(), B.eisenstein, k); }

/// Inputs must keep every z-degree below the trusted precision ⌈M/p⌉, or
/// the twist would silently drop terms.
inline void precision_gate(const BKModule& B, int height_bound = 0) {
  if (B.derived) return;
  const auto& A = B.ring();
  const int trusted = frobenius_trusted_precision(A.trunc(), A.base().p());
  auto over = [&](const AMat<ZpN>& X, const std::string& what) {
    for (std::size_t i = 0; i < X.rows(); ++i)
      for (std::size_t j = 0; j < X.cols(); ++j)
        if (A.zdeg_span(X(i, j)) > trusted)
          fail(ErrorKind::PrecisionLimited, what + " has z-degree beyond the trusted precision " +
                                                std::to_string(trusted) + " of the Frobenius twist");
  };
  over(B.M.rel, "a relation");
  over(B.phi.F, "the Frobenius matrix");
  if (height_bound + 1 > trusted)
    fail(ErrorKind::PrecisionLimited, "height bound " + std::to_string(height_bound) +
                                          " needs z-precision beyond the trusted " + std::to_string(trusted));
}

inline BKModule make_bk_module(const Module<ZpN>& M, const AMat<ZpN>& Phi, int s, int r,
                               const EisensteinSpec& E) {
  const auto& A = M.ring;
  require(A.trunc() > 1, "Breuil-Kisin modules need the two-variable ring", ErrorKind::UnsupportedRing);
  E.validate(A.base().p());
  require(0 <= s && s <= r, "height window must satisfy 0 <= s <= r");
  require(Phi.rows() == M.gens && (Phi.cols() == M.gens || M.gens == 0), "Frobenius matrix has the wrong shape");
  BKModule B;
  B.M = M;
  if (B.M.rel.rows() == 0) B.M.rel = amat(A, 0, M.gens);
  B.s = s;
  B.r = r;
  B.eisenstein = E;
  B.phi = ModuleMap<ZpN>{twisted(B.M), B.M, Phi, {}};
  precision_gate(B);
  try {
    B.phi = make_map(twisted(B.M), B.M, Phi);
  } catch (const Error&) {
    fail(ErrorKind::InvalidInput, "Frobenius is not well defined on the twisted presentation");
  }
  return B;
}

/// A BK structure on a library-computed module whose phi matrix is already known.
inline BKModule derived_bk(const Module<ZpN>& M, const AMat<ZpN>& Phi, const BKModule& like) {
  BKModule B;
  B.M = M;
  if (B.M.rel.rows() == 0) B.M.rel = amat(M.ring, 0, M.gens);
  B.s = like.s;
  B.r = like.r;
  B.eisenstein = like.eisenstein;
  B.derived = true;
  try {
    B.phi = make_map(twisted(B.M), B.M, Phi.rows() ? Phi : amat(M.ring, 0, M.gens));
  } catch (const Error&) {
    fail(ErrorKind::Inconsistency, "induced Frobenius is not well defined");
  }
  return B;
}

// ---------------------------------------------------------------------------
// height

struct HeightCertificate {
  int s = 0, r = 0;
  AMat<ZpN> upper;  // row i: E^r e_i = upper_i * phi.F  (mod relations)
  AMat<ZpN> lower;  // row k: phi(1 ⊗ e_k) = E^s lower_k  (mod relations)
};

struct HeightFailure {
  bool upper = true;       // which inclusion failed
  std::size_t index = 0;   // generator (upper) or phi image (lower)
  std::string message;
};

using HeightResult = std::variant<HeightCertificate, HeightFailure>;

inline bool verify_height(const BKModule& B, const HeightCertificate& c) {
  const auto& A = B.ring();
  const auto g = B.gens();
  auto Er = scalar_matrix(A, g, eisenstein_power(B, c.r));
  auto Es = scalar_matrix(A, g, eisenstein_power(B, c.s));
  if (c.upper.rows() != g || c.lower.rows() != g) return false;
  if (g == 0) return true;
  auto d1 = asub(A, Er, amul(A, c.upper, B.phi.F));
  auto d2 = asub(A, B.phi.F, amul(A, c.lower, Es));
  for (std::size_t i = 0; i < g; ++i)
    if (!is_zero_elem(B.M, d1.row(i)) || !is_zero_elem(B.M, d2.row(i))) return false;
  return true;
}

inline HeightResult check_height(const BKModule& B, int s, int r) {
  require(0 <= s && s <= r, "height window must satisfy 0 <= s <= r");
  precision_gate(B, r);
  const auto& A = B.ring();
  const auto g = B.gens();
  HeightCertificate c{s, r, amat(A, g, g), amat(A, g, g)};
  auto rel = rel_or_empty(B.M);
  auto Er = eisenstein_power(B, r);
  auto Es = scalar_matrix(A, g, eisenstein_power(B, s));
  auto image = vstack(g ? B.phi.F : amat(A, 0, 0), rel);
  for (std::size_t i = 0; i < g; ++i) {
    auto target = azero_vec(A, g);
    target[i] = Er;
    auto w = solve_in_span(A, image, target);
    if (!w) return HeightFailure{true, i, "E^" + std::to_string(r) + " e_" + std::to_string(i) + " is not in Im(phi)"};
    c.upper.set_row(i, AVec<ZpN>(w->begin(), w->begin() + static_cast<std::ptrdiff_t>(g)));
  }
  auto lower_span = vstack(Es, rel);
  for (std::size_t k = 0; k < g; ++k) {
    auto w = solve_in_span(A, lower_span, B.phi.F.row(k));
    if (!w)
      return HeightFailure{false, k, "phi(1 ⊗ e_" + std::to_string(k) + ") is not in E^" + std::to_string(s) + " M"};
    c.lower.set_row(k, AVec<ZpN>(w->begin(), w->begin() + static_cast<std::ptrdiff_t>(g)));
  }
  if (!verify_height(B, c)) fail(ErrorKind::Inconsistency, "height certificate failed verification");
  return c;
}

inline bool has_height(const BKModule& B, int s, int r) {
  return std::holds_alternative<HeightCertificate>(check_height(B, s, r));
}

// ---------------------------------------------------------------------------
// twists

inline BKModule twist(const BKModule& B, int t) {
  require(t >= 0, "twist must be non-negative");
  BKModule out = B;
  out.phi.F = amul(B.ring(), B.phi.F, scalar_matrix(B.ring(), B.gens(), eisenstein_power(B, t)));
  out.s += t;
  out.r += t;
  precision_gate(out);
  out.phi = make_map(out.phi.src, out.M, out.phi.F);
  return out;
}

inline BKModule untwist(const BKModule& B, int t) {
  require(t >= 0, "twist must be non-negative");
  require(B.s >= t, "untwist would leave a negative height window");
  const auto& A = B.ring();
  const auto g = B.gens();
  auto span = vstack(scalar_matrix(A, g, eisenstein_power(B, t)), rel_or_empty(B.M));
  auto F = amat(A, g, g);
  for (std::size_t k = 0; k < g; ++k) {
    auto w = solve_in_span(A, span, B.phi.F.row(k));
    require(w.has_value(), "inverse twist needs phi divisible by E^" + std::to_string(t));
    F.set_row(k, AVec<ZpN>(w->begin(), w->begin() + static_cast<std::ptrdiff_t>(g)));
  }
  BKModule out = B;
  out.s -= t;
  out.r -= t;
  try {
    out.phi = make_map(B.phi.src, B.M, F);
  } catch (const Error&) {
    fail(ErrorKind::InvalidInput, "inverse twist is not well defined");
  }
  return out;
}

// ---------------------------------------------------------------------------
// morphisms and subquotients

/// f : X -> Y commutes with Frobenius: phi_X then f equals φ*f then phi_Y.
inline bool is_phi_equivariant(const BKModule& X, const BKModule& Y, const AMat<ZpN>& F) {
  const auto& A = X.ring();
  if (X.gens() == 0) return true;
  auto lhs = amul(A, X.phi.F, F);
  auto rhs = Y.gens() ? amul(A, frobenius(A, F), Y.phi.F) : amat(A, X.gens(), 0);
  for (std::size_t i = 0; i < X.gens(); ++i)
    if (!is_zero_elem(Y.M, avec_sub(A, lhs.row(i), rhs.row(i)))) return false;
  return true;
}

inline ModuleMap<ZpN> bk_morphism(const BKModule& X, const BKModule& Y, const AMat<ZpN>& F,
                                  ErrorKind kind = ErrorKind::InvalidInput) {
  ModuleMap<ZpN> f;
  try {
    f = make_map(X.M, Y.M, F);
  } catch (const Error&) {
    fail(kind, "morphism is not well defined");
  }
  require(is_phi_equivariant(X, Y, f.F), "morphism does not commute with Frobenius", kind);
  return f;
}

/// num / den inside B with the induced Frobenius, presented on the rows of
/// num. Both must be φ-stable.
inline BKModule bk_subquotient(const BKModule& B, AMat<ZpN> num, AMat<ZpN> den,
                               ErrorKind kind = ErrorKind::Inconsistency) {
  const auto& A = B.ring();
  const auto g = B.gens();
  if (num.rows() == 0) num = amat(A, 0, g);
  if (den.rows() == 0) den = amat(A, 0, g);
  auto rel = rel_or_empty(B.M);
  auto den_span = vstack(den, rel);
  for (std::size_t k = 0; k < den.rows(); ++k)
    require(in_span(A, den_span, apply_phi(B, den.row(k))), "denominator is not stable under Frobenius", kind);
  auto span = vstack(vstack(num, den), rel);
  auto Phi = amat(A, num.rows(), num.rows());
  for (std::size_t k = 0; k < num.rows(); ++k) {
    auto c = solve_in_span(A, span, apply_phi(B, num.row(k)));
    require(c.has_value(), "numerator is not stable under Frobenius", kind);
    Phi.set_row(k, AVec<ZpN>(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(num.rows())));
  }
  auto Q = quotient(B.M, den).first;
  auto sub = submodule(Q, num).first;
  return derived_bk(sub, Phi, B);
}

/// p^j B / p^(j+1) B on the generators p^j e_i, with p-torsion imposed
/// explicitly: at precision N the element p^(N-1) has no visible annihilator.
inline BKModule gr_bk(const BKModule& B, int j) {
  const auto& A = B.ring();
  const auto p = A.base().p();
  const int N = A.base().precision();
  require(j >= 0 && j < N, "graded index must lie below the p-adic precision", ErrorKind::PrecisionLimited);
  const auto g = B.gens();
  auto pj = scalar_matrix(A, g, A.from_int(ipow(p, j)));
  auto pj1 = scalar_matrix(A, g, A.from_int(j + 1 < N ? ipow(p, j + 1) : 0));
  Module<ZpN> M{A, g, vstack(kernel_into(A, pj, vstack(rel_or_empty(B.M), pj1)), scalar_matrix(A, g, A.from_int(p)))};
  return derived_bk(M, B.phi.F, B);
}

inline BKModule zero_bk(const BKModule& like) {
  return derived_bk(zero_module(like.ring()), amat(like.ring(), 0, 0), like);
}

/// Coordinates of x (in B's generators) with respect to the rows of G, modulo relations.
inline std::optional<AVec<ZpN>> coords_in(const BKModule& B, const AMat<ZpN>& G, const AVec<ZpN>& x) {
  const auto& A = B.ring();
  auto c = solve_in_span(A, vstack(G.rows() ? G : amat(A, 0, B.gens()), rel_or_empty(B.M)), x);
  if (!c) return std::nullopt;
  return AVec<ZpN>(c->begin(), c->begin() + static_cast<std::ptrdiff_t>(G.rows()));
}

}  // namespace degen
