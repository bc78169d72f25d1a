#pragma once

// Prime-local tests over Λ = Z_S[q]/(q-1)^M. A statement about all primes
// ell outside S is reduced to finitely many by a support certificate: the
// primes where the relevant obstruction module survives mod (ell, q-1). At
// every other prime the local condition holds for free.

#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "degen/module_algebra.hpp"

namespace degen {

using LambdaAlg = LocAlg;

// ---------------------------------------------------------------------------
// precision of the truncated completions

namespace detail {

inline int max_entry_valuation(const LambdaAlg& A, const AMat<LocZ>& X, std::int64_t ell) {
  int v = 0;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j)
      for (std::size_t k = 0; k < A.width(); ++k)
        if (X(i, j)[k] != 0) v = std::max(v, ell_valuation(X(i, j)[k], ell));
  return v;
}

inline int content_valuation(const Module<LocZ>& M, std::int64_t ell) {
  auto s = support_primes(M, 2);
  return s.everywhere || s.content == 0 ? 0 : ell_valuation(s.content, ell);
}

}  // namespace detail

/// ell-adic precision for Z/ell^N models of the completion: above every
/// ell-power that the presentations or the torsion of the parts can see.
inline int completion_precision(std::int64_t ell, const std::vector<const Module<LocZ>*>& mods,
                                const std::vector<const AMat<LocZ>*>& maps) {
  int N = 2;
  for (const auto* M : mods) {
    N += detail::content_valuation(*M, ell);
    N = std::max(N, detail::max_entry_valuation(M->ring, rel_or_empty(*M), ell) + 2);
  }
  for (const auto* F : maps)
    if (!mods.empty()) N = std::max(N, detail::max_entry_valuation(mods.front()->ring, *F, ell) + 2);
  return N;
}

// ---------------------------------------------------------------------------
// sequences

struct LocalSequence {
  int precision_N = 1;
  ShortExactSequence<ZpN> seq;
};

struct LambdaSES {
  ShortExactSequence<LocZ> seq;
  std::map<std::int64_t, LocalSequence> completions;
};

inline LambdaSES make_lambda_ses(const ModuleMap<LocZ>& inject, const ModuleMap<LocZ>& surject) {
  return {make_ses(inject, surject), {}};
}

inline int completion_precision(const ShortExactSequence<LocZ>& s, std::int64_t ell) {
  return completion_precision(ell, {&s.A, &s.B, &s.C}, {&s.inject.F, &s.surject.F});
}

/// The sequence over Z/ell^N[q-1]/(q-1)^M; cached per prime.
inline const LocalSequence& completion(LambdaSES& s, std::int64_t ell) {
  if (auto it = s.completions.find(ell); it != s.completions.end()) return it->second;
  const int N = completion_precision(s.seq, ell);
  const LambdaCompletion spec{ell, N};
  auto A = base_change(s.seq.A, spec).mod, B = base_change(s.seq.B, spec).mod, C = base_change(s.seq.C, spec).mod;
  const auto& T = B.ring;
  const auto& L = s.seq.B.ring;
  LocalSequence out{N, {}};
  try {
    out.seq = make_ses(make_map(A, B, push_matrix(L, s.seq.inject.F, T, ell)),
                       make_map(B, C, push_matrix(L, s.seq.surject.F, T, ell)));
  } catch (const Error& e) {
    fail(ErrorKind::PrecisionLimited,
         "completed sequence at " + std::to_string(ell) + " is not exact at precision " + std::to_string(N) + ": " + e.what());
  }
  return s.completions.emplace(ell, std::move(out)).first->second;
}

// ---------------------------------------------------------------------------
// extension class and its support

/// Class of 0 -> A -> B -> C -> 0 in Ext^1(C, A): lift C's generators to B,
/// push C's relations through the lift, and read them in A.
inline AVec<LocZ> extension_cocycle(const ShortExactSequence<LocZ>& s) {
  const auto& L = s.B.ring;
  const auto R = rel_or_empty(s.C);
  auto lifts = amat(L, s.C.gens, s.B.gens);
  for (std::size_t k = 0; k < s.C.gens; ++k) {
    auto w = solve_in_span(L, vstack(s.surject.F, rel_or_empty(s.C)), unit_vec(L, s.C.gens, k));
    require(w.has_value(), "sequence is not surjective", ErrorKind::Inconsistency);
    auto c = AVec<LocZ>(w->begin(), w->begin() + static_cast<std::ptrdiff_t>(s.B.gens));
    lifts.set_row(k, c);
  }
  auto inB = amul(L, R, lifts);
  AVec<LocZ> Y(R.rows() * s.A.gens, L.zero());
  for (std::size_t j = 0; j < R.rows(); ++j) {
    auto a = preimage(s.inject, inB.row(j));
    for (std::size_t i = 0; i < s.A.gens; ++i) Y[j * s.A.gens + i] = a[i];
  }
  return Y;
}

struct SupportCertificate {
  std::vector<std::int64_t> primes;  // every prime outside S where the obstruction survives
  bool complete = true;              // false when the obstruction survives at every prime
  BigInt content = 0;
  std::string source;
};

inline SupportCertificate certificate_of(const Module<LocZ>& M, std::int64_t bound, const std::string& source) {
  auto sp = support_primes(M, bound);
  return {sp.primes, sp.complete && !sp.everywhere, sp.content, source};
}

/// Support of the submodule of Ext^1(C, A) generated by the class of s.
inline SupportCertificate class_support(const ShortExactSequence<LocZ>& s, std::int64_t bound = 50) {
  const auto& L = s.B.ring;
  auto E = ext1(s.C, s.A);
  auto Y = extension_cocycle(s);
  const auto r = rel_or_empty(s.C).rows();
  auto d0 = hom_dual(L, rel_or_empty(s.C), s.C.gens, s.A.gens);
  auto H1 = hom_from_free(s.A, r);
  auto span = vstack(vstack(E.reps.rows() ? E.reps : amat(L, 0, Y.size()), d0), rel_or_empty(H1));
  auto w = solve_in_span(L, span, Y);
  require(w.has_value(), "extension cocycle is not a cocycle", ErrorKind::Inconsistency);
  AMat<LocZ> cls = amat(L, 0, E.ext.gens);
  cls.push_row(AVec<LocZ>(w->begin(), w->begin() + static_cast<std::ptrdiff_t>(E.ext.gens)));
  if (E.ext.gens == 0) return {{}, true, 1, "extension class (Ext^1 vanishes)"};
  auto [sub, incl] = submodule(E.ext, cls);
  (void)incl;
  return certificate_of(sub, bound, "extension class");
}

// ---------------------------------------------------------------------------
// survey

struct LocalVerdict {
  std::int64_t ell = 0;
  int precision_N = 0;
  bool split = false;
  bool in_support = false;  // outside the support the sequence splits for free
  std::string obstruction;
};

struct SplitSurvey {
  std::vector<LocalVerdict> table;  // ascending in ell
  SupportCertificate certificate;
  bool covers_certificate = false;
  bool all_split() const {
    for (const auto& v : table)
      if (!v.split) return false;
    return true;
  }
};

/// Split verdicts over the completions at `primes`, or at the certified
/// support when no list is given. Primes in S are rejected.
inline SplitSurvey local_split_survey(LambdaSES& s, const std::optional<std::vector<std::int64_t>>& primes = {},
                                      std::int64_t bound = 50) {
  const auto& Lz = s.seq.B.ring.base();
  SplitSurvey out;
  out.certificate = class_support(s.seq, bound);
  auto list = primes ? *primes : out.certificate.primes;
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());
  for (auto ell : list) {
    require(is_prime(ell), "survey primes must be prime");
    require(!Lz.is_inverted(ell), "prime " + std::to_string(ell) + " is inverted in Λ");
  }
  // completions are built serially (the cache is not thread safe), tested concurrently
  std::vector<const LocalSequence*> local;
  for (auto ell : list) local.push_back(&completion(s, ell));
  std::vector<std::future<SplitResult<ZpN>>> jobs;
  for (const auto* c : local) jobs.push_back(std::async(std::launch::async, [c] { return split_test(c->seq); }));
  const auto& cert = out.certificate.primes;
  for (std::size_t k = 0; k < list.size(); ++k) {
    auto r = jobs[k].get();
    LocalVerdict v{list[k], local[k]->precision_N, r.split,
                   !out.certificate.complete || std::find(cert.begin(), cert.end(), list[k]) != cert.end(), ""};
    if (!r.split) v.obstruction = "coordinate " + std::to_string(r.obstruction.index) + ": " + r.obstruction.residue +
                                  " not divisible by " + r.obstruction.divisor;
    if (!v.split && !v.in_support)
      fail(ErrorKind::Inconsistency, "sequence fails to split at " + std::to_string(list[k]) +
                                         " outside the support of its extension class");
    out.table.push_back(std::move(v));
  }
  out.covers_certificate = out.certificate.complete;
  for (auto ell : cert)
    out.covers_certificate = out.covers_certificate && std::binary_search(list.begin(), list.end(), ell);
  return out;
}

/// Primes ell <= bound outside S at which the completed sequence does not split.
inline std::vector<std::int64_t> bounded_nonsplit_search(LambdaSES& s, std::int64_t bound) {
  std::vector<std::int64_t> out;
  for (auto ell : primes_up_to(bound)) {
    if (s.seq.B.ring.base().is_inverted(ell)) continue;
    if (!split_test(completion(s, ell).seq).split) out.push_back(ell);
  }
  return out;
}

struct GlobalSplit {
  ModuleMap<LocZ> section;  // C -> B
};

/// From a survey that splits at every certified prime, a section over Λ
/// itself. Failing to find one would contradict the local-global principle.
inline GlobalSplit global_split_conclude(const LambdaSES& s, const SplitSurvey& survey) {
  require(survey.covers_certificate, "survey does not cover a complete certified prime set");
  for (const auto& v : survey.table)
    require(v.split, "survey reports a non-split completion at " + std::to_string(v.ell));
  auto r = split_test(s.seq);
  if (!r.split)
    fail(ErrorKind::Inconsistency, "every completion splits but no global section exists: " + r.obstruction.residue +
                                       " not divisible by " + r.obstruction.divisor);
  require(maps_equal(compose(*r.section, s.seq.surject), identity_map(s.seq.C)), "global section fails verification",
          ErrorKind::Inconsistency);
  return {*r.section};
}

// ---------------------------------------------------------------------------
// zero detection, both sides

struct LocalZero {
  std::int64_t ell = 0;
  int precision_N = 0;
  bool zero = false;
};

struct ZeroLocalGlobal {
  bool direct_zero = false;
  std::optional<NonzeroAt> witness;
  SupportCertificate certificate;  // support of the image of f
  std::vector<LocalZero> local;
  bool all_local_zero = true;
  bool agree = false;
};

inline bool local_map_is_zero(const ModuleMap<LocZ>& f, std::int64_t ell, int N) {
  const LambdaCompletion spec{ell, N};
  auto src = base_change(f.src, spec).mod, tgt = base_change(f.tgt, spec).mod;
  return is_zero_map(make_map(src, tgt, push_matrix(f.src.ring, f.F, tgt.ring, ell)));
}

/// f = 0 against f ⊗ Λ_ell = 0 for every ell outside S. The second side runs
/// over the support of Im f; when that support is every prime, the primes up
/// to `bound` are tested. Disagreement raises Inconsistency.
inline ZeroLocalGlobal zero_local_global(const ModuleMap<LocZ>& f, std::int64_t bound = 30) {
  require(verify_map(f), "map is not well-defined");
  ZeroLocalGlobal out;
  auto zd = zero_detect(f);
  out.direct_zero = std::holds_alternative<IsZero>(zd);
  if (auto* w = std::get_if<NonzeroAt>(&zd)) out.witness = *w;
  auto sq = subquotient(f);
  out.certificate = certificate_of(sq.image, bound, "image");
  for (auto ell : out.certificate.primes) {
    const int N = completion_precision(ell, {&f.src, &f.tgt}, {&f.F});
    LocalZero z{ell, N, local_map_is_zero(f, ell, N)};
    out.all_local_zero = out.all_local_zero && z.zero;
    out.local.push_back(z);
  }
  if (out.witness && std::none_of(out.local.begin(), out.local.end(),
                                   [&](const LocalZero& z) { return z.ell == out.witness->ell; })) {
    const int N = std::max(out.witness->precision_N, completion_precision(out.witness->ell, {&f.src, &f.tgt}, {&f.F}));
    LocalZero z{out.witness->ell, N, local_map_is_zero(f, out.witness->ell, N)};
    out.all_local_zero = out.all_local_zero && z.zero;
    out.local.push_back(z);
    std::sort(out.local.begin(), out.local.end(), [](const auto& a, const auto& b) { return a.ell < b.ell; });
  }
  out.agree = out.direct_zero == out.all_local_zero;
  if (!out.agree)
    fail(ErrorKind::Inconsistency, out.direct_zero ? "zero map is nonzero after some completion"
                                                   : "nonzero map vanishes after every completion in its support");
  return out;
}

}  // namespace degen
