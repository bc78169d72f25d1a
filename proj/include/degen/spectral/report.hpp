#pragma once

// Degeneration verdicts for a filtered complex over a discrete valuation ring
// (or its truncation). The length ledger and divisor comparison decide
// saturation and splitting when the sequence degenerates rationally; the
// direct checks (quotient saturation, explicit retractions) are always run
// and must agree.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "degen/spectral/filtered.hpp"

namespace degen {

struct TorsionShape {
  std::size_t free_rank = 0;
  int torsion_length = 0;
  std::vector<std::string> divisors;  // sorted canonical torsion divisors
};

template <class Base>
TorsionShape torsion_shape(const Module<Base>& M) {
  auto d = decompose_elementary(M);
  TorsionShape s;
  s.free_rank = d.free_rank;
  const auto& B = M.ring.base();
  for (const auto& x : d.divisors) {
    s.torsion_length += divisor_length(B, x);
    s.divisors.push_back(B.to_string(x));
  }
  std::sort(s.divisors.begin(), s.divisors.end());
  return s;
}

struct DegreeLedger {
  int degree = 0;
  int homology_length = 0;  // len of H_i torsion
  int graded_length = 0;    // sum over n of len of E_1^n torsion
  std::size_t homology_rank = 0, graded_rank = 0;
  std::vector<std::string> homology_divisors, graded_divisors;
  bool balanced() const { return homology_length == graded_length; }
  bool divisors_match() const { return homology_divisors == graded_divisors; }
};

struct InjectivityWitness {
  int degree = 0, weight = 0;
  bool injective = true;
};

struct SaturationWitness {
  int degree = 0, weight = 0;
  bool saturated = true;
  std::vector<std::string> quotient_torsion;  // torsion of H / (F^n H + H_tors)
};

template <class Base>
struct SplitWitness {
  int degree = 0, weight = 0;
  bool split = false;
  std::optional<AMat<Base>> retraction;  // H_i -> H_i(fil^n)
  Obstruction obstruction;
};

template <class Base>
struct DegenerationReport {
  bool rationally_degenerate = false;
  bool degenerate = false;
  bool saturated = false;
  bool split = false;
  bool criterion_applied = false;  // saturated/split taken from ledger/divisors
  std::vector<DegreeLedger> ledger;
  std::vector<InjectivityWitness> injectivity;
  std::vector<SaturationWitness> saturation;
  std::vector<SplitWitness<Base>> splitting;
  bool direct_saturated = false, direct_split = false;
};

/// Some r with incl then r = id, for an injective map of modules.
template <class Base>
HomSolve<Base> retraction(const ModuleMap<Base>& incl) {
  const auto& A = incl.src.ring;
  const auto& S = incl.src;
  const auto& T = incl.tgt;
  std::vector<AVec<Base>> rhs;
  std::vector<AMat<Base>> rels;
  auto Srel = rel_or_empty(S);
  for (std::size_t r = 0; r < T.rel.rows(); ++r) {
    rhs.push_back(azero_vec(A, S.gens));
    rels.push_back(Srel);
  }
  for (std::size_t i = 0; i < S.gens; ++i) {
    rhs.push_back(unit_vec(A, S.gens, i));
    rels.push_back(Srel);
  }
  auto lin = [&](const AMat<Base>& Y) {
    std::vector<AVec<Base>> out;
    auto RY = amul(A, rel_or_empty(T), Y);
    for (std::size_t r = 0; r < RY.rows(); ++r) out.push_back(RY.row(r));
    auto FY = amul(A, incl.F.rows() ? incl.F : amat(A, 0, T.gens), Y);
    for (std::size_t i = 0; i < FY.rows(); ++i) out.push_back(FY.row(i));
    return out;
  };
  return solve_hom<Base>(A, T.gens, S.gens, lin, rhs, rels);
}

template <class Base>
DegenerationReport<Base> degeneration_report(const FilteredComplex<Base>& X) {
  require_snf_capable(X.ring);
  const auto& A = X.ring;
  DegenerationReport<Base> rep;
  bool ranks_agree = true;
  bool injective_all = true, saturated_all = true, split_all = true;
  for (int i = X.lo; i <= X.hi; ++i) {
    auto H = homology_piece(X, i);
    auto hs = torsion_shape(H.mod);
    DegreeLedger L;
    L.degree = i;
    L.homology_length = hs.torsion_length;
    L.homology_rank = hs.free_rank;
    L.homology_divisors = hs.divisors;
    for (int n = X.wmin; n <= X.wmax; ++n) {
      auto es = torsion_shape(page_piece(X, 1, n, i).mod);
      L.graded_length += es.torsion_length;
      L.graded_rank += es.free_rank;
      L.graded_divisors.insert(L.graded_divisors.end(), es.divisors.begin(), es.divisors.end());
    }
    std::sort(L.graded_divisors.begin(), L.graded_divisors.end());
    ranks_agree = ranks_agree && L.graded_rank == L.homology_rank;
    rep.ledger.push_back(L);

    auto tors = torsion_part(H.mod);
    auto tors_ambient = amul(A, tors.incl.F.rows() ? tors.incl.F : amat(A, 0, H.num.rows()), H.num);
    for (int n = X.wmin + 1; n <= X.wmax; ++n) {
      auto Hf = filtered_homology_piece(X, i, n);
      auto iota = piece_map(X, Hf, H, static_cast<const AMat<Base>*>(nullptr));
      InjectivityWitness inj{i, n, is_injective(iota)};
      injective_all = injective_all && inj.injective;
      rep.injectivity.push_back(inj);

      auto q = make_piece(X, i, H.num, vstack(vstack(H.den, cycles(X, i, n)), tors_ambient));
      SaturationWitness sat{i, n, true, torsion_shape(q.mod).divisors};
      sat.saturated = sat.quotient_torsion.empty();
      saturated_all = saturated_all && sat.saturated;
      rep.saturation.push_back(sat);

      SplitWitness<Base> sp;
      sp.degree = i;
      sp.weight = n;
      if (inj.injective) {
        auto r = retraction(iota);
        sp.split = r.Y.has_value();
        sp.retraction = r.Y;
        sp.obstruction = r.obstruction;
      }
      split_all = split_all && sp.split;
      rep.splitting.push_back(std::move(sp));
    }
  }
  rep.rationally_degenerate = ranks_agree;
  rep.degenerate = injective_all;
  rep.direct_saturated = injective_all && saturated_all;
  rep.direct_split = injective_all && split_all;
  if (rep.rationally_degenerate) {
    rep.criterion_applied = true;
    bool balanced = std::all_of(rep.ledger.begin(), rep.ledger.end(), [](const auto& l) { return l.balanced(); });
    bool matched = std::all_of(rep.ledger.begin(), rep.ledger.end(), [](const auto& l) { return l.divisors_match(); });
    rep.saturated = balanced;
    rep.split = matched;
    if (rep.saturated != rep.direct_saturated)
      fail(ErrorKind::Inconsistency, "length ledger and direct saturation check disagree");
    if (rep.split != rep.direct_split)
      fail(ErrorKind::Inconsistency, "divisor comparison and explicit sections disagree");
  } else {
    rep.saturated = rep.direct_saturated;
    rep.split = rep.direct_split;
  }
  if ((rep.split && !rep.saturated) || (rep.saturated && !rep.degenerate))
    fail(ErrorKind::Inconsistency, "degeneration verdicts are not monotone");
  return rep;
}

// ---------------------------------------------------------------------------
// length inequality for reductions

struct LenfilRow {
  int degree = 0;
  int lhs = 0;  // len H_i / ϖ^n
  int rhs = 0;  // sum over a of len E_1^a / ϖ^n
  bool holds() const { return lhs <= rhs; }
};

template <class Base>
int reduction_length(const Module<Base>& M, int n) {
  auto d = decompose_elementary(M);
  int len = static_cast<int>(d.free_rank) * n;
  for (const auto& x : d.divisors) len += std::min(divisor_length(M.ring.base(), x), n);
  return len;
}

template <class Base>
std::vector<LenfilRow> lenfil_check(const FilteredComplex<Base>& X, int n) {
  require(n > 0, "reduction exponent must be positive");
  if constexpr (std::is_same_v<Base, LocZ>) fail(ErrorKind::UnsupportedRing, "ring has no uniformizer");
  auto rep = degeneration_report(X);
  require(rep.saturated, "spectral sequence is not saturated degenerate", ErrorKind::HypothesisUnmet);
  std::vector<LenfilRow> out;
  for (int i = X.lo; i <= X.hi; ++i) {
    LenfilRow row{i, reduction_length(homology_piece(X, i).mod, n), 0};
    for (int a = X.wmin; a <= X.wmax; ++a) row.rhs += reduction_length(page_piece(X, 1, a, i).mod, n);
    if (!row.holds())
      fail(ErrorKind::Inconsistency, "length inequality fails in degree " + std::to_string(i));
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// base change

inline FilteredComplex<ZpN> base_change_complex(const FilteredComplex<LocZ>& X, LocalizedToPadic spec) {
  FilteredComplex<ZpN> Y;
  Y.ring = make_padic(spec.ell, spec.precision_N);
  Y.lo = X.lo;
  Y.hi = X.hi;
  Y.wmin = X.wmin;
  Y.wmax = X.wmax;
  for (int i = X.lo; i <= X.hi; ++i) {
    const auto k = static_cast<std::size_t>(i - X.lo);
    Y.C.push_back(base_change(X.C[k], spec).mod);
    std::vector<AMat<ZpN>> f;
    for (const auto& G : X.fil[k]) f.push_back(push_matrix(X.ring, G, Y.ring, spec.ell));
    Y.fil.push_back(f);
    Y.d.push_back(push_matrix(X.ring, X.d[k], Y.ring, spec.ell));
  }
  return validate(Y);
}

struct DescentEntry {
  int weight = 0, degree = 0;
  bool injective = true;
  std::vector<std::string> lost_divisors;  // torsion divisors not supported at the prime
};

struct BaseChangeReport {
  DegenerationReport<ZpN> after;
  std::vector<DescentEntry> entries;
  bool hypothesis_met = false;
  bool descended_degenerate = false;
};

/// Report over Z/ell^N, and descent of degeneration. Every E_1 entry must
/// embed into its base change; over Z_S that happens exactly when all
/// torsion divisors are powers of ell (below the working precision).
inline BaseChangeReport base_change_report(const FilteredComplex<LocZ>& X, LocalizedToPadic spec) {
  BaseChangeReport out;
  auto Y = base_change_complex(X, spec);
  out.after = degeneration_report(Y);
  out.hypothesis_met = true;
  const auto& L = X.ring.base();
  for (int n = X.wmin; n <= X.wmax; ++n)
    for (int i = X.lo; i <= X.hi; ++i) {
      DescentEntry e{n, i, true, {}};
      auto d = decompose_elementary(page_piece(X, 1, n, i).mod);
      for (const auto& x : d.divisors) {
        auto f = factorize(L.norm(x));
        bool ell_power = f.size() == 1 && f.begin()->first == spec.ell && f.begin()->second < spec.precision_N;
        if (!ell_power) {
          e.injective = false;
          e.lost_divisors.push_back(L.to_string(x));
        }
      }
      if (!e.injective)
        fail(ErrorKind::HypothesisUnmet, "E_1 entry at weight " + std::to_string(n) + ", degree " +
                                             std::to_string(i) + " does not embed into its base change");
      out.entries.push_back(e);
    }
  if (out.hypothesis_met && out.after.degenerate) {
    auto own = degeneration_report(X);
    if (!own.degenerate)
      fail(ErrorKind::Inconsistency, "degeneration did not descend although E_1 embeds");
    out.descended_degenerate = true;
  }
  return out;
}

}  // namespace degen
