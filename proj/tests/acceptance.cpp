// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <tuple>

#include "degen/io/batch.hpp"
#include "degen/module/ext_oracle.hpp"
#include "support/lambda_corpus.hpp"
#include "support/random_complexes.hpp"
#include "support/random_towers.hpp"

using namespace degen;
namespace lg = degen::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  int failures = 0;

  void check(bool cond, const std::string& what) {
    if (cond) return;
    if (failures++ < 3) detail << (detail.tellp() > 0 ? "; " : "") << what;
    ok = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Module<ZpN> cyc(const PadicAlg& A, std::int64_t p, int a) { return cyclic_module(A, A.from_int(ipow(p, a))); }

void ext_table(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  int cells = 0, oracle_checks = 0;
  for (std::int64_t p : {2, 3}) {
    auto A = make_bk(p, 4, 3);
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b) {
        auto C = cyc(A, p, a);
        auto s = elementary_shape(ext1(C, cyc(A, p, b)).ext);
        std::ostringstream at;
        at << "p=" << p << " a=" << a << " b=" << b;
        o.check(s.has_value() && s->free_rank == 0 && s->exponents == std::vector<int>{std::min(a, b)},
                "Ext^1 shape wrong at " + at.str());
        ++cells;
        if (p == 2 && s) {
          std::int64_t order = 1;
          for (int e : s->exponents) order *= ipow(p, 3 * e);
          o.check(order == ext_oracle::ext_order_by_cocycles(C, ipow(p, b)), "cocycle count differs at " + at.str());
          ++oracle_checks;
        }
      }
  }
  const double dt = seconds_since(t0);
  o.check(dt < 60.0, "took " + std::to_string(dt) + " s");
  o.detail << (o.ok ? "" : " | ") << cells << " cells, " << oracle_checks << " cocycle checks, " << dt << " s";
}

void degeneration(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  const std::int64_t p = 3;
  auto A = make_padic(p, 3);
  FilteredComplex<ZpN> X;
  X.ring = A;
  X.lo = X.hi = 0;
  X.wmin = 0;
  X.wmax = 1;
  X.C = {cyclic_module(A, A.from_int(p * p))};
  auto f1 = amat(A, 1, 1);
  f1(0, 0) = A.from_int(p);
  X.fil = {{aidentity(A, 1), f1}};
  X = validate(X);
  auto rep = degeneration_report(X);
  o.check(rep.degenerate, "not degenerate");
  o.check(rep.saturated, "not saturated");
  o.check(!rep.split, "reported split");
  o.check(rep.ledger.size() == 1, "ledger has " + std::to_string(rep.ledger.size()) + " rows");
  if (rep.ledger.size() == 1) {
    const auto& row = rep.ledger[0];
    o.check(row.homology_length == 2 && row.graded_length == 2, "ledger lengths are not 2 = 1 + 1");
    o.check(row.homology_divisors == std::vector<std::string>{"9"}, "homology divisors are not {9}");
    o.check(row.graded_divisors == (std::vector<std::string>{"3", "3"}), "graded divisors are not {3,3}");
  }
  auto orc = oracle(X);
  o.check(orc.degenerate == rep.degenerate && orc.saturated == rep.saturated && orc.split == rep.split,
          "oracle disagrees");
  const double dt = seconds_since(t0);
  o.check(dt < 1.0, "took " + std::to_string(dt) + " s");
  o.detail << (o.ok ? "" : " | ") << "ledger 2=1+1, divisors {9} vs {3,3}, " << dt << " s";
}

void fuzz(Outcome& o) {
  std::mt19937 rng(20240);
  int n = 0, split = 0;
  for (std::int64_t p : {2, 3})
    for (int t = 0; t < 110; ++t, ++n) {
      auto X = lg::random_filtered_complex(p, rng);
      auto rep = degeneration_report(X);
      auto orc = oracle(X);
      const auto tag = "p=" + std::to_string(p) + " #" + std::to_string(t);
      o.check(rep.degenerate == orc.degenerate, "degenerate differs " + tag);
      o.check(rep.saturated == orc.saturated, "saturated differs " + tag);
      o.check(rep.split == orc.split, "split differs " + tag);
      for (std::size_t k = 0; k < rep.ledger.size(); ++k)
        o.check(rep.ledger[k].homology_length == orc.homology_length[k] &&
                    rep.ledger[k].graded_length == orc.graded_length[k],
                "lengths differ " + tag);
      split += rep.split;
    }
  o.check(split > 0 && split < n, "fuzz corpus is one-sided");
  o.detail << (o.ok ? "" : " | ") << n << " complexes, " << split << " split";
}

AMat<ZpN> random_invertible(const PadicAlg& A, std::size_t n, std::mt19937& rng) {
  auto P = aidentity(A, n);
  std::uniform_int_distribution<std::int64_t> c(0, A.base().modulus() - 1);
  for (int step = 0; step < 6 * static_cast<int>(n); ++step) {
    auto i = rng() % n, j = rng() % n;
    if (i == j) continue;
    auto coef = A.zero();
    for (auto& e : coef) e = c(rng);
    for (std::size_t k = 0; k < n; ++k) P(i, k) = A.add(P(i, k), A.mul(coef, P(j, k)));
  }
  return P;
}

void decompose(Outcome& o) {
  std::mt19937 rng(77);
  int trips = 0;
  for (auto [p, N, M] : {std::tuple{2, 4, 3}, {3, 3, 3}, {5, 3, 2}}) {
    auto A = make_bk(p, N, M);
    std::uniform_int_distribution<int> cnt(0, 2), expo(1, N - 1);
    for (int t = 0; t < 40; ++t) {
      const auto m = static_cast<std::size_t>(cnt(rng));
      std::vector<int> exps;
      for (int i = cnt(rng) + (m == 0 ? 1 : 0); i > 0; --i) exps.push_back(expo(rng));
      std::sort(exps.begin(), exps.end());
      const std::size_t g = exps.size() + m + 1;
      auto R = amat(A, exps.size() + 1, g);
      for (std::size_t i = 0; i < exps.size(); ++i) R(i, i) = A.from_int(ipow(p, exps[i]));
      for (std::size_t j = 0; j + 1 < g; ++j) R(exps.size(), j) = A.from_int(static_cast<std::int64_t>(rng() % 7));
      R(exps.size(), g - 1) = A.from_int(-1);
      Module<ZpN> hidden{A, g, amul(A, amul(A, random_invertible(A, R.rows(), rng), R), random_invertible(A, g, rng))};
      auto r = decompose_over_S(hidden);
      const auto* d = std::get_if<ElementaryDecomposition<ZpN>>(&r);
      const auto tag = "p=" + std::to_string(p) + " #" + std::to_string(t);
      o.check(d && d->free_rank == m && d->torsion_exponents == exps, "round trip lost the shape " + tag);
      o.check(d && verify_decomposition(hidden, *d), "decomposition does not verify " + tag);
      ++trips;
    }
  }
  auto A = make_bk(3, 3, 3);
  Module<ZpN> Q{A, 1, amat(A, 2, 1)};
  Q.rel(0, 0) = A.from_int(3);
  Q.rel(1, 0) = A.var();
  auto q = decompose_over_S(Q);
  const auto* ne = std::get_if<NotElementary>(&q);
  o.check(ne && ne->failing_j == 0, "S/(p,z) was not rejected at j=0");
  o.detail << (o.ok ? "" : " | ") << trips << " round trips, S/(p,z) rejected at j=0";
}

void structure(Outcome& o) {
  std::mt19937 rng(4242);
  int n = 0, nonsplit = 0;
  std::map<int, int> codes;
  for (int t = 0; t < 120; ++t, ++n) {
    const std::int64_t p = t % 2 ? 3 : 5;
    auto rt = lg::random_tower(p, rng);
    const auto tag = "p=" + std::to_string(p) + " #" + std::to_string(t);
    try {
      auto rep = structure_check(rt.B, 1, 1, rt.tower);
      ++codes[0];
      o.check(rep.hypothesis_met, "hypothesis unmet " + tag);
      o.check(rep.decomposition.has_value(), "no decomposition " + tag);
      if (!rep.decomposition) continue;
      auto got = rep.decomposition->torsion_exponents;
      std::sort(got.begin(), got.end());
      o.check(got == rep.predicted_exponents, "exponents differ from the tower prediction " + tag);
      nonsplit += std::find(got.begin(), got.end(), 2) != got.end();
    } catch (const Error& e) {
      ++codes[io::exit_code_of(e.kind())];
      o.check(false, "exit " + std::to_string(io::exit_code_of(e.kind())) + " " + tag + ": " + e.what());
    }
  }
  o.check(codes[4] == 0, "exit 4 fired " + std::to_string(codes[4]) + " times");
  o.check(nonsplit > 0, "no tower produced a non-split extension");
  o.detail << (o.ok ? "" : " | ") << n << " towers, " << nonsplit << " with S/p^2, exit 4 count " << codes[4];
}

bool trace_exact(const KTheoryResult& r) {
  for (const auto& st : r.skeletal_trace)
    for (const auto& node : st.nodes)
      if (!node.exact) return false;
  return true;
}

void cw(Outcome& o) {
  const LocalizedAbelianGroup Z0{0, {}}, Z1{1, {}}, Z2{2, {}};
  int nodes = 0;
  auto count = [&](const KTheoryResult& r) {
    for (const auto& st : r.skeletal_trace) nodes += static_cast<int>(st.nodes.size());
  };
  for (int d = 1; d <= 4; ++d) {
    auto r = ktheory(sphere(d));
    count(r);
    const auto tag = "S^" + std::to_string(d);
    o.check(r.K0 == (d % 2 ? Z0 : Z1) && r.K1 == (d % 2 ? Z1 : Z0), tag + " has the wrong K-groups");
    o.check(r.skeletal_trace.size() == static_cast<std::size_t>(d), tag + " trace length");
    o.check(trace_exact(r), tag + " has an inexact node");
  }
  auto rp2 = ktheory(real_projective_space(2));
  count(rp2);
  o.check(rp2.M == 1 && rp2.K0 == make_group(0, {BigInt(2)}) && rp2.K1.is_zero(), "RP^2 is not K0=Z/2, K1=0 at M=1");
  o.check(trace_exact(rp2), "RP^2 has an inexact node");
  auto cp2 = ktheory(complex_projective_space(2));
  count(cp2);
  o.check(cp2.M == 2 && cp2.K0 == Z2 && cp2.K1.is_zero(), "CP^2 is not rank 2 at M=2");
  o.check(trace_exact(cp2), "CP^2 has an inexact node");
  o.detail << (o.ok ? "" : " | ") << "S^1..S^4, RP^2, CP^2; " << nodes << " LES nodes exact";
}

void local_global(Outcome& o) {
  std::mt19937 rng(555);
  int maps = 0, zeros = 0;
  for (int t = 0; t < 150; ++t, ++maps) {
    auto r = zero_local_global(lg::random_lambda_map(rng));
    o.check(r.agree, "zero test disagrees on map #" + std::to_string(t));
    zeros += r.direct_zero;
  }
  o.check(zeros > 0 && zeros < maps, "zero fuzz is one-sided");

  int sections = 0;
  for (int t = 0; t < 40; ++t) {
    auto s = lg::scrambled_split(rng);
    auto survey = local_split_survey(s);
    try {
      auto g = global_split_conclude(s, survey);
      o.check(verify_map(g.section) &&
                  maps_equal(compose(g.section, s.seq.surject), identity_map(s.seq.C)),
              "recovered section is not a section, #" + std::to_string(t));
      ++sections;
    } catch (const Error& e) {
      o.check(false, std::string("no section for scrambled split #") + std::to_string(t) + ": " + e.what());
    }
  }

  const std::vector<std::int64_t> probe{3, 5, 7, 11};
  auto nine = lg::power_extension(3, 1, 1);
  auto survey = local_split_survey(nine, probe);
  for (const auto& v : survey.table) o.check(v.split == (v.ell != 3), "Λ/9 verdict wrong at " + std::to_string(v.ell));
  o.check(class_support(nine.seq).primes == std::vector<std::int64_t>{3}, "Λ/9 support is not {3}");
  int family = 0;
  for (auto& c : lg::nonsplit_family(rng)) {
    for (const auto& v : local_split_survey(c.s, probe).table)
      o.check(v.split == (v.ell != c.ell), "family member at " + std::to_string(c.ell) + " wrong at " + std::to_string(v.ell));
    ++family;
  }
  o.detail << (o.ok ? "" : " | ") << maps << " maps (" << zeros << " zero), " << sections << " sections, " << family
           << " non-split sequences, Λ/9 non-split only at 3";
}

void precision(Outcome& o, const std::string& corpus) {
  // M against pM: crossing inputs are refused at M and accepted at pM, and
  // heights certified at pM hold at M
  std::mt19937 rng(808);
  int refused = 0, accepted = 0;
  for (int t = 0; t < 80; ++t) {
    const std::int64_t p = t % 2 ? 2 : 3;
    const int M = 2 + static_cast<int>(rng() % 4);
    auto small = make_bk(p, 3, M), big = make_bk(p, 3, static_cast<int>(p) * M);
    const int d = static_cast<int>(rng() % static_cast<unsigned>(M)), r = static_cast<int>(rng() % 3) % M;
    const std::int64_t lead = 1 + static_cast<std::int64_t>(rng() % 2);
    auto build = [&](const PadicAlg& A) {
      auto x = A.zero();
      x[static_cast<std::size_t>(d)] = A.base().from_int(lead);
      x[0] = A.base().from_int(1);
      return make_bk_module(free_module(A, 1), scalar_matrix(A, 1, x), 0, 0, EisensteinSpec::linear(p));
    };
    const int trusted = frobenius_trusted_precision(M, p);
    const bool crosses = d + 1 > trusted || r + 1 > trusted;
    const auto tag = " #" + std::to_string(t);
    try {
      auto Bb = build(big);
      const bool at_big = has_height(Bb, 0, r);
      try {
        const bool at_small = has_height(build(small), 0, r);
        o.check(!crosses, "crossing input accepted" + tag);
        o.check(!at_big || at_small, "height at pM not seen at M" + tag);
        ++accepted;
      } catch (const Error& e) {
        o.check(crosses && io::exit_code_of(e.kind()) == 3, "refusal without exit 3" + tag);
        ++refused;
      }
    } catch (const Error& e) {
      o.check(false, std::string("precision pM refused") + tag + ": " + e.what());
    }
  }
  o.check(refused > 0 && accepted > 0, "metamorphic suite is one-sided");

  int jobs = 0;
  for (auto [name, want] : {std::pair{"bk_height_crossing", 3}, {"bk_twist_crossing", 3},
                            {"bk_height_crossing_lifted", 0}, {"bk_twist_crossing_lifted", 0}, {"bk_twist_exact", 0}}) {
    auto rep = io::run_job_file(corpus + "/" + name + io::kJobSuffix, {});
    o.check(rep.exit_code == want, std::string(name) + " exits " + std::to_string(rep.exit_code));
    ++jobs;
  }
  o.detail << (o.ok ? "" : " | ") << refused << " refused at M, " << accepted << " accepted, " << jobs
           << " corpus jobs with the expected exit code";
}

}  // namespace

int main() {
  const std::string corpus = DEGEN_CORPUS_DIR;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"Ext^1 golden table and cocycle oracle", ext_table},
      {"degeneration of Z/p^2 with fil^1 = p", degeneration},
      {"random filtered complexes against the oracle", fuzz},
      {"decompose_over_S round trips", decompose},
      {"structure theorem on random towers", structure},
      {"CW K-theory", cw},
      {"local-global on the Λ corpus", local_global},
      {"Frobenius precision", [&](Outcome& o) { precision(o, corpus); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " | uncaught: " << e.what();
    }
    failed += !o.ok;
    std::printf("criterion %zu %s: %s (%s)\n", k + 1, o.ok ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
