#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "degen/breuil_kisin.hpp"
#include "support/random_towers.hpp"

using namespace degen;

namespace {

AMat<ZpN> scalar1(const PadicAlg& A, const AElem<ZpN>& c) { return scalar_matrix(A, 1, c); }

BKModule cyclic_bk(const PadicAlg& A, std::int64_t d, const AElem<ZpN>& phi) {
  auto M = d ? cyclic_module(A, A.from_int(d)) : free_module(A, 1);
  return make_bk_module(M, scalar1(A, phi), 0, 0, EisensteinSpec::linear(A.base().p()));
}

Module<ZpN> kill_p_and_z(const PadicAlg& A) {
  auto M = free_module(A, 1);
  M.rel.push_row({A.from_int(A.base().p())});
  M.rel.push_row({A.monomial(1, A.base().one())});
  return M;
}

int tlen(const Module<ZpN>& M) {
  auto d = decompose_over_S(M);
  int n = 0;
  for (int a : std::get<ElementaryDecomposition<ZpN>>(d).torsion_exponents) n += a;
  return n;
}

bool is_zero_bk(const BKModule& B) { return is_zero_module(B.M); }

AElem<ZpN> Epow(const PadicAlg& A, int h) { return eisenstein_eval(A, EisensteinSpec::linear(A.base().p()), h); }

}  // namespace

TEST(BreuilKisin, HeightExamples) {
  auto A = make_bk(3, 3, 9);
  auto one = cyclic_bk(A, 3, A.one());
  EXPECT_TRUE(has_height(one, 0, 0));

  auto e = cyclic_bk(A, 3, Epow(A, 1));
  EXPECT_TRUE(has_height(e, 1, 1));
  auto h = check_height(e, 0, 0);
  ASSERT_TRUE(std::holds_alternative<HeightFailure>(h));
  EXPECT_TRUE(std::get<HeightFailure>(h).upper);

  for (int r : {0, 1, 2}) {
    auto F = cyclic_bk(A, 0, Epow(A, r));
    EXPECT_TRUE(has_height(F, r, r)) << r;
    if (r > 0) {
      EXPECT_FALSE(has_height(F, r - 1, r - 1));
    }
    if (r < 2) {
      EXPECT_FALSE(has_height(F, r + 1, r + 1));
    }
    // window coherence
    EXPECT_TRUE(has_height(F, 0, 2));
  }
  auto cert = std::get<HeightCertificate>(check_height(cyclic_bk(A, 0, Epow(A, 1)), 0, 2));
  EXPECT_TRUE(verify_height(cyclic_bk(A, 0, Epow(A, 1)), cert));
  cert.upper(0, 0) = A.add(cert.upper(0, 0), A.one());
  EXPECT_FALSE(verify_height(cyclic_bk(A, 0, Epow(A, 1)), cert));

  // a height bound of 3 needs z^3, beyond the trusted precision 3 of z^9
  try {
    check_height(cyclic_bk(A, 0, A.one()), 3, 3);
    FAIL() << "precision gate did not fire";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::PrecisionLimited);
  }
}

TEST(BreuilKisin, FrobeniusMustBeWellDefined) {
  auto A = make_bk(3, 3, 6);
  // S/p -> S/p with phi = 1 is fine; S/p with phi(1 ⊗ e) landing in a free module is not
  Module<ZpN> M = direct_sum(cyclic_module(A, A.from_int(3)), free_module(A, 1));
  auto Phi = amat(A, 2, 2);
  Phi(0, 1) = A.one();
  Phi(1, 1) = A.one();
  EXPECT_THROW(make_bk_module(M, Phi, 0, 0, EisensteinSpec::linear(3)), Error);
  Phi(0, 1) = A.zero();
  Phi(0, 0) = A.one();
  EXPECT_NO_THROW(make_bk_module(M, Phi, 0, 0, EisensteinSpec::linear(3)));
}

TEST(BreuilKisin, TwistCoherence) {
  std::mt19937 rng(7);
  for (int t = 0; t < 30; ++t) {
    auto p = t % 2 ? 3 : 5;
    auto rt = degen::testing::random_tower(p, rng, 3, 4 * p);
    auto B = rt.B;
    auto A = B.ring();
    // twisting by 0 changes nothing
    auto T0 = twist(B, 0);
    EXPECT_TRUE(amat_eq(A, T0.phi.F, B.phi.F));
    for (int s = 0; s <= 1; ++s)
      for (int r = s; r <= 1; ++r) {
        bool before = has_height(B, s, r);
        auto T1 = twist(B, 1);
        EXPECT_EQ(has_height(T1, s + 1, r + 1), before) << t;
        auto back = untwist(T1, 1);
        EXPECT_EQ(has_height(back, s, r), before);
      }
  }
  // double twist equals twist by 2
  auto A = make_bk(3, 3, 9);
  auto B = cyclic_bk(A, 0, A.one());
  EXPECT_TRUE(amat_eq(A, twist(twist(B, 1), 1).phi.F, twist(B, 2).phi.F));
  EXPECT_EQ(twist(B, 2).s, 2);
  EXPECT_THROW(untwist(cyclic_bk(A, 0, A.one()), 1), Error);
  try {
    untwist(twist(cyclic_bk(A, 0, A.one()), 1), 1);
  } catch (...) {
    FAIL() << "untwist of a twist refused";
  }
}

TEST(BreuilKisin, PrecisionMetamorphic) {
  // the same data at z-precision M and pM: inputs crossing ⌈M/p⌉ are refused
  // at M and accepted at pM, and anything certified at pM also holds at M
  std::mt19937 rng(99);
  int refused = 0, accepted = 0;
  for (int t = 0; t < 60; ++t) {
    const std::int64_t p = t % 2 ? 2 : 3;
    const int M = 2 + static_cast<int>(rng() % 4);
    auto small = make_bk(p, 3, M);
    auto big = make_bk(p, 3, static_cast<int>(p) * M);
    std::uniform_int_distribution<int> deg(0, M - 1), c(0, 8), h(0, 2);
    auto draw = [&](const PadicAlg& A, int d, std::int64_t seed) {
      auto x = A.zero();
      x[static_cast<std::size_t>(d)] = A.base().from_int(1 + seed % 2);
      x[0] = A.base().from_int(1);
      return x;
    };
    const int d = deg(rng), s = c(rng);
    const int r = h(rng) % std::max(1, M);
    auto build = [&](const PadicAlg& A) {
      return make_bk_module(free_module(A, 1), scalar1(A, draw(A, d, s)), 0, 0, EisensteinSpec::linear(p));
    };
    const int trusted = frobenius_trusted_precision(M, p);
    const bool crosses = d + 1 > trusted || r + 1 > trusted;
    bool small_ok = false;
    try {
      auto B = build(small);
      auto v = has_height(B, 0, r);
      small_ok = true;
      // the twist is stable under raising the precision
      auto Bb = build(big);
      auto tw_small = twisted(B.M), tw_big = twisted(Bb.M);
      EXPECT_EQ(tw_small.rel.rows(), tw_big.rel.rows());
      if (has_height(Bb, 0, r)) {
        EXPECT_TRUE(v) << t;
      }
      ++accepted;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::PrecisionLimited) << t;
      ++refused;
    }
    EXPECT_EQ(small_ok, !crosses) << t;
    EXPECT_NO_THROW(has_height(build(big), 0, r));
  }
  EXPECT_GT(refused, 0);
  EXPECT_GT(accepted, 0);

  // relations crossing the trusted precision are refused as well
  auto A = make_bk(3, 3, 6);
  auto x = A.from_int(3);
  x[3] = A.base().one();
  EXPECT_THROW(make_bk_module(cyclic_module(A, x), scalar1(A, A.one()), 0, 0, EisensteinSpec::linear(3)), Error);
}

TEST(BreuilKisin, CanonicalDecomposition) {
  auto A = make_bk(3, 3, 6);
  auto E = EisensteinSpec::linear(3);
  Module<ZpN> M = direct_sum(cyclic_module(A, A.from_int(9)), free_module(A, 1));
  auto Phi = amat(A, 2, 2);
  Phi(0, 0) = A.one();
  Phi(1, 1) = Epow(A, 1);
  auto B = make_bk_module(M, Phi, 0, 1, E);
  auto res = canonical_decomposition(B);
  ASSERT_TRUE(std::holds_alternative<CanonicalSequence>(res));
  const auto& cs = std::get<CanonicalSequence>(res);
  EXPECT_EQ(cs.decomposition.torsion_exponents, std::vector<int>{2});
  EXPECT_EQ(cs.decomposition.free_rank, 1u);
  EXPECT_EQ(tlen(cs.tors.M), 2);
  EXPECT_TRUE(is_zero_module(cs.bar.M));

  auto T = make_bk_module(cyclic_module(A, A.from_int(3)), scalar1(A, A.one()), 0, 0, E);
  auto rt = std::get<CanonicalSequence>(canonical_decomposition(T));
  EXPECT_TRUE(is_zero_bk(rt.free));

  std::mt19937 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto B2 = degen::testing::random_tower(t % 2 ? 3 : 5, rng).B;
    auto r2 = canonical_decomposition(B2);
    ASSERT_TRUE(std::holds_alternative<CanonicalSequence>(r2));
    const auto& c2 = std::get<CanonicalSequence>(r2);
    EXPECT_TRUE(is_phi_equivariant(c2.tors, B2, c2.tors_incl));
    EXPECT_TRUE(is_phi_equivariant(B2, c2.free, c2.free_proj));
  }

  auto bad = make_bk_module(kill_p_and_z(A),
                            scalar1(A, A.one()), 0, 0, E);
  EXPECT_TRUE(std::holds_alternative<NotElementary>(canonical_decomposition(bad)));
}

TEST(BreuilKisin, KernelCokernel) {
  auto A = make_bk(5, 3, 10);
  auto E = EisensteinSpec::linear(5);
  auto Q = make_bk_module(cyclic_module(A, A.from_int(5)), scalar1(A, Epow(A, 1)), 0, 1, E);
  auto zero = bk_kernel_cokernel(Q, Q, amat(A, 1, 1), 1, 1);
  EXPECT_TRUE(zero.hypothesis_met);
  EXPECT_EQ(tlen(simplify(zero.kernel.M).mod), tlen(Q.M));
  EXPECT_EQ(tlen(simplify(zero.cokernel.M).mod), tlen(Q.M));
  auto id = bk_kernel_cokernel(Q, Q, aidentity(A, 1), 1, 1);
  EXPECT_TRUE(is_zero_bk(id.kernel));
  EXPECT_TRUE(is_zero_bk(id.cokernel));
  EXPECT_TRUE(id.kernel_check.ok && id.cokernel_check.ok);

  // multiplication by z between rank-one objects needs phi_Q = z^(p-1) phi_N,
  // of height p-1 > r: only possible outside the low-ramification range
  auto B3 = make_bk(3, 3, 9);
  auto E3 = EisensteinSpec::linear(3);
  auto N3 = make_bk_module(cyclic_module(B3, B3.from_int(3)), scalar1(B3, B3.one()), 0, 2, E3);
  auto Q3 = make_bk_module(cyclic_module(B3, B3.from_int(3)), scalar1(B3, Epow(B3, 2)), 0, 2, E3);
  auto zmap = scalar1(B3, B3.monomial(1, B3.base().one()));
  auto kc = bk_kernel_cokernel(Q3, N3, zmap, 1, 2);
  EXPECT_FALSE(kc.hypothesis_met);
  EXPECT_FALSE(kc.cokernel_check.ok);  // S/(p, z) is not free over S/p
  EXPECT_THROW(bk_kernel_cokernel(Q3, N3, zmap, 1, 1), Error);

  // not equivariant
  EXPECT_THROW(bk_kernel_cokernel(N3, N3, zmap, 1, 2), Error);
}

TEST(BreuilKisin, ClosureCheck) {
  auto A = make_bk(5, 3, 10);
  auto E = EisensteinSpec::linear(5);
  // N = S/p^2 with phi = 1, tower pN ⊂ N of two S/p layers
  auto N = make_bk_module(cyclic_module(A, A.from_int(25)), scalar1(A, A.one()), 0, 1, E);
  Tower T{{scalar1(A, A.from_int(5)), scalar1(A, A.one())}};
  EXPECT_EQ(verify_tower(N, T, 1, false).tag, CategoryTag::ModSinf);
  auto Q = make_bk_module(cyclic_module(A, A.from_int(5)), scalar1(A, A.one()), 0, 1, E);

  auto incl = closure_check(Q, N, scalar1(A, A.from_int(5)), T, 1);
  EXPECT_EQ(tlen(simplify(incl.image.M).mod), 1);
  EXPECT_EQ(tlen(simplify(incl.cokernel.M).mod), 1);

  auto zero = closure_check(Q, N, amat(A, 1, 1), T, 1);
  EXPECT_TRUE(is_zero_bk(zero.image));
  EXPECT_EQ(tlen(simplify(zero.cokernel.M).mod), 2);

  // N in Mod_S1: tower of length one
  auto direct = closure_check(Q, Q, aidentity(A, 1), trivial_tower(Q), 1);
  EXPECT_EQ(direct.image_tower.steps.size(), 1u);
  EXPECT_TRUE(is_zero_bk(direct.cokernel));

  // a broken tower is rejected
  Tower bad{{scalar1(A, A.one()), scalar1(A, A.from_int(5))}};
  EXPECT_THROW(verify_tower(N, bad, 1, false), Error);
  Tower short_tower{{scalar1(A, A.from_int(5))}};
  EXPECT_THROW(verify_tower(N, short_tower, 1, false), Error);
}

TEST(BreuilKisin, GradedExtensionTransfer) {
  auto A = make_bk(2, 3, 4);
  auto E = EisensteinSpec::linear(2);
  auto S1 = make_bk_module(cyclic_module(A, A.from_int(2)), scalar1(A, A.one()), 0, 0, E);
  auto S2 = make_bk_module(cyclic_module(A, A.from_int(4)), scalar1(A, A.one()), 0, 0, E);
  std::vector<Tower> certs;
  for (int j = 0; j < 3; ++j) certs.push_back(trivial_tower(gr_bk(S1, j)));

  // 0 -> S/2 -> S/4 -> S/2 -> 0
  auto seq = make_bk_sequence(S1, S2, S1, scalar1(A, A.from_int(2)), scalar1(A, A.one()));
  auto g = gr_extension_transfer(seq, QuotientKind::ModS1, certs, 0);
  ASSERT_EQ(g.towers.size(), 3u);
  EXPECT_FALSE(is_zero_elem(gr_bk(S1, 0).M, g.connecting[0].row(0)));
  for (int j = 0; j < 3; ++j) {
    auto m = verify_tower(gr_bk(S2, j), g.towers[static_cast<std::size_t>(j)], 0, false);
    EXPECT_TRUE(m.tag == CategoryTag::ModS1 || m.tag == CategoryTag::ModSinf);
  }

  // split: S/2 ⊕ S/2
  auto D = make_bk_module(direct_sum(S1.M, S1.M), aidentity(A, 2), 0, 0, E);
  auto i = amat(A, 1, 2), q = amat(A, 2, 1);
  i(0, 0) = A.one();
  q(1, 0) = A.one();
  auto split = gr_extension_transfer(make_bk_sequence(S1, D, S1, i, q), QuotientKind::ModS1, certs, 0);
  for (const auto& c : split.connecting) EXPECT_TRUE(is_zero_elem(gr_bk(S1, 0).M, c.row(0)));

  // free quotient: 0 -> S/2 -> S/2 ⊕ S -> S -> 0
  auto F = make_bk_module(free_module(A, 1), scalar1(A, A.one()), 0, 0, E);
  auto DF = make_bk_module(direct_sum(S1.M, F.M), aidentity(A, 2), 0, 0, E);
  auto fr = gr_extension_transfer(make_bk_sequence(S1, DF, F, i, q), QuotientKind::FreeS, certs, 0);
  EXPECT_EQ(fr.towers[0].steps.size(), 2u);
  EXPECT_EQ(gr_p(DF.M, 0).rank, 2u);
  EXPECT_EQ(gr_p(DF.M, 1).rank, 1u);
}

TEST(BreuilKisin, StructureExamples) {
  auto A = make_bk(5, 3, 10);
  auto E = EisensteinSpec::linear(5);
  // S/p^2 as an extension of S/p by S/p, phi = E on both layers
  auto B = make_bk_module(cyclic_module(A, A.from_int(25)), scalar1(A, Epow(A, 1)), 0, 1, E);
  Tower T{{scalar1(A, A.from_int(5)), scalar1(A, A.one())}};
  auto rep = structure_check(B, 1, 1, T);
  EXPECT_TRUE(rep.hypothesis_met);
  ASSERT_TRUE(rep.decomposition.has_value());
  EXPECT_EQ(rep.decomposition->torsion_exponents, std::vector<int>{2});
  EXPECT_EQ(rep.predicted_exponents, std::vector<int>{2});
  EXPECT_EQ(rep.gr_certificates.size(), 3u);

  auto F = make_bk_module(free_module(A, 2), scalar_matrix(A, 2, Epow(A, 1)), 0, 1, E);
  auto fr = structure_check(F, 1, 1, trivial_tower(F));
  EXPECT_EQ(fr.decomposition->free_rank, 2u);
  EXPECT_TRUE(fr.decomposition->torsion_exponents.empty());

  auto kz = kill_p_and_z(A);
  auto K = make_bk_module(kz, scalar1(A, A.one()), 0, 1, E);
  auto kr = structure_check(K, 1, 1, std::nullopt);
  ASSERT_TRUE(kr.counterexample.has_value());
  EXPECT_EQ(kr.counterexample->failing_j, 0);
  // and no tower can certify it
  EXPECT_THROW(structure_check(K, 1, 1, trivial_tower(K)), Error);
}

TEST(BreuilKisin, StructureTheoremProperty) {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(31337);
  int nonsplit = 0;
  for (int t = 0; t < 100; ++t) {
    const std::int64_t p = t % 2 ? 3 : 5;
    auto rt = degen::testing::random_tower(p, rng);
    StructureReport rep;
    try {
      rep = structure_check(rt.B, 1, 1, rt.tower);
    } catch (const Error& e) {
      FAIL() << t << ": " << e.what();
    }
    ASSERT_TRUE(rep.decomposition.has_value()) << t;
    auto got = rep.decomposition->torsion_exponents;
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, rep.predicted_exponents);
    EXPECT_EQ(rep.gr_certificates.size(), 3u) << t << " " << rep.note;
    nonsplit += std::find(got.begin(), got.end(), 2) != got.end();
  }
  EXPECT_GT(nonsplit, 0);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 600.0);
}
