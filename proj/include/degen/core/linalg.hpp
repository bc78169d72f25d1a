#pragma once

// Smith normal form and the linear solves built on it, generic over the
// base ring policies in rings.hpp.

#include <optional>
#include <vector>

#include "degen/core/matrix.hpp"
#include "degen/core/rings.hpp"

namespace degen::la {

template <class R>
using Elem = typename R::elem;
template <class R>
using Vec = std::vector<Elem<R>>;
template <class R>
using Matrix = Mat<Elem<R>>;

template <class R>
Matrix<R> zeros(const R& ring, std::size_t m, std::size_t n) {
  Matrix<R> out(m, n, ring.zero());
  if (m == 0) out.set_cols(n);
  return out;
}

template <class R>
Matrix<R> identity(const R& ring, std::size_t n) {
  auto out = zeros(ring, n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = ring.one();
  return out;
}

template <class R>
Vec<R> zero_vec(const R& ring, std::size_t n) {
  return Vec<R>(n, ring.zero());
}

template <class R>
Matrix<R> mul(const R& ring, const Matrix<R>& a, const Matrix<R>& b) {
  auto out = zeros(ring, a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (ring.is_zero(a(i, k))) continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        out(i, j) = ring.add(out(i, j), ring.mul(a(i, k), b(k, j)));
    }
  return out;
}

template <class R>
Vec<R> vec_mul(const R& ring, const Vec<R>& x, const Matrix<R>& a) {
  auto out = zero_vec(ring, a.cols());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (ring.is_zero(x[k])) continue;
    for (std::size_t j = 0; j < a.cols(); ++j)
      out[j] = ring.add(out[j], ring.mul(x[k], a(k, j)));
  }
  return out;
}

template <class R>
bool is_zero_vec(const R& ring, const Vec<R>& v) {
  for (const auto& e : v)
    if (!ring.is_zero(e)) return false;
  return true;
}

template <class R>
bool is_zero_mat(const R& ring, const Matrix<R>& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!ring.is_zero(a(i, j))) return false;
  return true;
}

template <class R>
struct Smith {
  Matrix<R> D;               // diagonal, canonical divisors
  Matrix<R> U, V;            // U * A * V = D
  Matrix<R> Uinv, Vinv;
  Vec<R> divisors;           // D(i,i) for i < min(m, n)
};

namespace detail {

// Row/column operations that keep U, Uinv (resp. V, Vinv) in sync.
template <class R>
struct SmithState {
  const R& ring;
  Matrix<R> A, U, V, Uinv, Vinv;

  void swap_rows(std::size_t a, std::size_t b) {
    A.swap_rows(a, b);
    U.swap_rows(a, b);
    Uinv.swap_cols(a, b);
  }
  void swap_cols(std::size_t a, std::size_t b) {
    A.swap_cols(a, b);
    V.swap_cols(a, b);
    Vinv.swap_rows(a, b);
  }
  // row_i -= c * row_t
  void row_axpy(std::size_t i, std::size_t t, const Elem<R>& c) {
    for (std::size_t j = 0; j < A.cols(); ++j) A(i, j) = ring.sub(A(i, j), ring.mul(c, A(t, j)));
    for (std::size_t j = 0; j < U.cols(); ++j) U(i, j) = ring.sub(U(i, j), ring.mul(c, U(t, j)));
    for (std::size_t r = 0; r < Uinv.rows(); ++r)
      Uinv(r, t) = ring.add(Uinv(r, t), ring.mul(c, Uinv(r, i)));
  }
  // col_j -= c * col_t
  void col_axpy(std::size_t j, std::size_t t, const Elem<R>& c) {
    for (std::size_t i = 0; i < A.rows(); ++i) A(i, j) = ring.sub(A(i, j), ring.mul(c, A(i, t)));
    for (std::size_t i = 0; i < V.rows(); ++i) V(i, j) = ring.sub(V(i, j), ring.mul(c, V(i, t)));
    for (std::size_t k = 0; k < Vinv.cols(); ++k)
      Vinv(t, k) = ring.add(Vinv(t, k), ring.mul(c, Vinv(j, k)));
  }
  // (row_t, row_i) <- [s t; u v] (row_t, row_i)
  void row_mix(std::size_t t, std::size_t i, const GcdEx<Elem<R>>& g) {
    auto mix = [&](Matrix<R>& M) {
      for (std::size_t j = 0; j < M.cols(); ++j) {
        auto a = M(t, j), b = M(i, j);
        M(t, j) = ring.add(ring.mul(g.s, a), ring.mul(g.t, b));
        M(i, j) = ring.add(ring.mul(g.u, a), ring.mul(g.v, b));
      }
    };
    mix(A);
    mix(U);
    auto det = ring.sub(ring.mul(g.s, g.v), ring.mul(g.t, g.u));
    auto di = ring.inv(det);
    // inverse [v -t; -u s]/det applied on the right to columns (t, i)
    for (std::size_t r = 0; r < Uinv.rows(); ++r) {
      auto a = Uinv(r, t), b = Uinv(r, i);
      Uinv(r, t) = ring.mul(di, ring.sub(ring.mul(a, g.v), ring.mul(b, g.u)));
      Uinv(r, i) = ring.mul(di, ring.sub(ring.mul(b, g.s), ring.mul(a, g.t)));
    }
  }
  // (col_t, col_j) <- (col_t, col_j) [s u; t v]
  void col_mix(std::size_t t, std::size_t j, const GcdEx<Elem<R>>& g) {
    auto mix = [&](Matrix<R>& M) {
      for (std::size_t i = 0; i < M.rows(); ++i) {
        auto a = M(i, t), b = M(i, j);
        M(i, t) = ring.add(ring.mul(g.s, a), ring.mul(g.t, b));
        M(i, j) = ring.add(ring.mul(g.u, a), ring.mul(g.v, b));
      }
    };
    mix(A);
    mix(V);
    auto det = ring.sub(ring.mul(g.s, g.v), ring.mul(g.t, g.u));
    auto di = ring.inv(det);
    for (std::size_t k = 0; k < Vinv.cols(); ++k) {
      auto a = Vinv(t, k), b = Vinv(j, k);
      Vinv(t, k) = ring.mul(di, ring.sub(ring.mul(g.v, a), ring.mul(g.u, b)));
      Vinv(j, k) = ring.mul(di, ring.sub(ring.mul(g.s, b), ring.mul(g.t, a)));
    }
  }
  void scale_row(std::size_t t, const Elem<R>& unit) {
    auto ui = ring.inv(unit);
    for (std::size_t j = 0; j < A.cols(); ++j) A(t, j) = ring.mul(ui, A(t, j));
    for (std::size_t j = 0; j < U.cols(); ++j) U(t, j) = ring.mul(ui, U(t, j));
    for (std::size_t r = 0; r < Uinv.rows(); ++r) Uinv(r, t) = ring.mul(unit, Uinv(r, t));
  }
};

}  // namespace detail

/// Smith normal form. Pivots are entries of minimal size (valuation for the
/// chain rings), ties broken by row-major position, so output is
/// deterministic. Divisors are canonical associates (p^k, z^k, or a positive
/// S-free integer) and are non-decreasing in the divisibility order.
template <class R>
Smith<R> smith(const R& ring, const Matrix<R>& A) {
  const std::size_t m = A.rows(), n = A.cols();
  detail::SmithState<R> st{ring, A, identity(ring, m), identity(ring, n),
                           identity(ring, m), identity(ring, n)};
  if (m == 0) st.A.set_cols(n);
  const std::size_t k = std::min(m, n);
  for (std::size_t t = 0; t < k; ++t) {
    for (;;) {
      // pivot search
      bool found = false;
      std::size_t pi = t, pj = t;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j) {
          if (ring.is_zero(st.A(i, j))) continue;
          if (!found || ring.pivot_less(st.A(i, j), st.A(pi, pj))) {
            found = true;
            pi = i;
            pj = j;
          }
        }
      if (!found) break;
      st.swap_rows(t, pi);
      st.swap_cols(t, pj);
      for (std::size_t i = t + 1; i < m; ++i) {
        if (ring.is_zero(st.A(i, t))) continue;
        if (ring.divides(st.A(t, t), st.A(i, t)))
          st.row_axpy(i, t, ring.quo(st.A(i, t), st.A(t, t)));
        else
          st.row_mix(t, i, ring.gcdex(st.A(t, t), st.A(i, t)));
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (ring.is_zero(st.A(t, j))) continue;
        if (ring.divides(st.A(t, t), st.A(t, j)))
          st.col_axpy(j, t, ring.quo(st.A(t, j), st.A(t, t)));
        else
          st.col_mix(t, j, ring.gcdex(st.A(t, t), st.A(t, j)));
      }
      bool clean = true;
      for (std::size_t i = t + 1; i < m && clean; ++i)
        if (!ring.is_zero(st.A(i, t))) clean = false;
      for (std::size_t j = t + 1; j < n && clean; ++j)
        if (!ring.is_zero(st.A(t, j))) clean = false;
      if (!clean) continue;
      // divisibility of the remaining block by the pivot
      bool bad = false;
      for (std::size_t i = t + 1; i < m && !bad; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (!ring.divides(st.A(t, t), st.A(i, j))) {
            st.row_axpy(t, i, ring.neg(ring.one()));
            bad = true;
            break;
          }
      if (!bad) break;
    }
  }
  Smith<R> out;
  for (std::size_t t = 0; t < k; ++t) {
    auto [canon, unit] = ring.associate(st.A(t, t));
    if (!ring.is_zero(st.A(t, t))) st.scale_row(t, unit);
    out.divisors.push_back(st.A(t, t));
  }
  out.D = std::move(st.A);
  out.U = std::move(st.U);
  out.V = std::move(st.V);
  out.Uinv = std::move(st.Uinv);
  out.Vinv = std::move(st.Vinv);
  return out;
}

/// Generators of { x : x A = 0 } as rows (width = A.rows()).
template <class R>
Matrix<R> left_kernel(const R& ring, const Matrix<R>& A) {
  const std::size_t m = A.rows(), n = A.cols();
  Matrix<R> out;
  out.set_cols(m);
  if (m == 0) return out;
  auto s = smith(ring, A);
  for (std::size_t i = 0; i < m; ++i) {
    bool free = i >= n || ring.is_zero(s.divisors[i]);
    if (free) out.push_row(s.U.row(i));
  }
  return out;
}

/// Some x with x A = b, or nullopt.
template <class R>
std::optional<Vec<R>> solve_left(const R& ring, const Matrix<R>& A, const Vec<R>& b) {
  const std::size_t m = A.rows(), n = A.cols();
  if (m == 0) {
    if (is_zero_vec(ring, b)) return Vec<R>{};
    return std::nullopt;
  }
  auto s = smith(ring, A);
  auto c = vec_mul(ring, b, s.V);
  Vec<R> y = zero_vec(ring, m);
  for (std::size_t j = 0; j < n; ++j) {
    if (j < m) {
      const auto& d = s.divisors[j];
      if (ring.is_zero(d)) {
        if (!ring.is_zero(c[j])) return std::nullopt;
      } else {
        if (!ring.divides(d, c[j])) return std::nullopt;
        y[j] = ring.quo(c[j], d);
      }
    } else if (!ring.is_zero(c[j])) {
      return std::nullopt;
    }
  }
  return vec_mul(ring, y, s.U);
}

/// Inverse of a square matrix, or nullopt if it is not invertible.
template <class R>
std::optional<Matrix<R>> inverse(const R& ring, const Matrix<R>& A) {
  if (A.rows() != A.cols()) return std::nullopt;
  auto s = smith(ring, A);
  auto Dinv = zeros(ring, A.rows(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    if (!ring.is_unit(s.divisors[i])) return std::nullopt;
    Dinv(i, i) = ring.inv(s.divisors[i]);
  }
  return mul(ring, mul(ring, s.V, Dinv), s.U);
}

}  // namespace degen::la

namespace degen::la {

/// Like solve_left, but on failure reports where the system is inconsistent:
/// after the change of basis, coordinate `index` of the right-hand side is
/// `residue`, which the divisor at that position does not divide.
template <class R>
struct SolveReport {
  std::optional<Vec<R>> x;
  std::size_t index = 0;
  Elem<R> divisor{};
  Elem<R> residue{};
};

template <class R>
SolveReport<R> solve_left_report(const R& ring, const Matrix<R>& A, const Vec<R>& b) {
  SolveReport<R> out;
  const std::size_t m = A.rows(), n = A.cols();
  out.divisor = ring.zero();
  out.residue = ring.zero();
  if (m == 0) {
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!ring.is_zero(b[j])) {
        out.index = j;
        out.residue = b[j];
        return out;
      }
    out.x = Vec<R>{};
    return out;
  }
  auto s = smith(ring, A);
  auto c = vec_mul(ring, b, s.V);
  Vec<R> y = zero_vec(ring, m);
  for (std::size_t j = 0; j < n; ++j) {
    auto d = j < m ? s.divisors[j] : ring.zero();
    bool ok = ring.is_zero(d) ? ring.is_zero(c[j]) : ring.divides(d, c[j]);
    if (!ok) {
      out.index = j;
      out.divisor = d;
      out.residue = c[j];
      return out;
    }
    if (!ring.is_zero(d)) y[j] = ring.quo(c[j], d);
  }
  out.x = vec_mul(ring, y, s.U);
  return out;
}

}  // namespace degen::la
