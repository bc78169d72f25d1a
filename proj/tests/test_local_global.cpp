#include <gtest/gtest.h>

#include "degen/local_global.hpp"
#include "support/lambda_corpus.hpp"

using namespace degen;
namespace lg = degen::testing;
using lg::corpus_ring;
using lg::lam;

namespace {

std::vector<std::int64_t> V(std::initializer_list<std::int64_t> l) { return l; }

}  // namespace

TEST(LocalGlobal, PowerExtensionIsNonsplitOnlyAtItsPrime) {
  auto s = lg::power_extension(3, 1, 1);
  auto cert = class_support(s.seq);
  EXPECT_TRUE(cert.complete);
  EXPECT_EQ(cert.primes, V({3}));
  auto survey = local_split_survey(s, V({3, 5, 7}));
  ASSERT_EQ(survey.table.size(), 3u);
  EXPECT_FALSE(survey.table[0].split);
  EXPECT_TRUE(survey.table[0].in_support);
  EXPECT_FALSE(survey.table[0].obstruction.empty());
  EXPECT_TRUE(survey.table[1].split);
  EXPECT_FALSE(survey.table[1].in_support);
  EXPECT_TRUE(survey.table[2].split);
  // the completion at 5 is the zero sequence
  const auto& c5 = completion(s, 5).seq;
  EXPECT_TRUE(is_zero_module(c5.B));
  EXPECT_THROW(global_split_conclude(s, survey), Error);
}

TEST(LocalGlobal, InvertedPrimeIsRejected) {
  auto s = lg::power_extension(3, 1, 1);
  EXPECT_THROW(local_split_survey(s, V({2})), Error);
}

TEST(LocalGlobal, FreeSequenceWithUnitSurjection) {
  auto A = corpus_ring();
  auto L = free_module(A, 1), L2 = free_module(A, 2);
  auto i = amat(A, 1, 2), q = amat(A, 2, 1);
  i(0, 0) = A.one();
  i(0, 1) = A.from_int(-1);
  q(0, 0) = A.one();
  q(1, 0) = A.one();
  auto s = make_lambda_ses(make_map(L, L2, i), make_map(L2, L, q));
  auto survey = local_split_survey(s);
  EXPECT_TRUE(survey.certificate.primes.empty());
  EXPECT_TRUE(survey.covers_certificate);
  auto explicit_survey = local_split_survey(s, V({3, 5, 7, 11}));
  EXPECT_TRUE(explicit_survey.all_split());
  auto g = global_split_conclude(s, survey);
  EXPECT_TRUE(maps_equal(compose(g.section, s.seq.surject), identity_map(s.seq.C)));
}

TEST(LocalGlobal, DirectSumIsImmediate) {
  auto A = corpus_ring();
  LambdaSES s{direct_sum_sequence(lg::cyclic_lambda(A, A.from_int(9)), free_module(A, 1)), {}};
  auto survey = local_split_survey(s);
  EXPECT_TRUE(survey.table.empty());
  EXPECT_NO_THROW(global_split_conclude(s, survey));
}

TEST(LocalGlobal, IncompleteSurveyIsRejected) {
  // the class of Λ --3--> Λ -> Λ/3 is 3-torsion, so certified at 3 only
  auto A = corpus_ring();
  auto i = amat(A, 1, 1), q = amat(A, 1, 1);
  i(0, 0) = A.from_int(3);
  q(0, 0) = A.one();
  auto s = make_lambda_ses(make_map(free_module(A, 1), free_module(A, 1), i),
                           make_map(free_module(A, 1), lg::cyclic_lambda(A, A.from_int(3)), q));
  auto partial = local_split_survey(s, V({5}));
  EXPECT_FALSE(partial.covers_certificate);
  EXPECT_THROW(global_split_conclude(s, partial), Error);
  auto full = local_split_survey(s);
  EXPECT_EQ(full.certificate.primes, V({3}));
  EXPECT_FALSE(full.all_split());
}

TEST(LocalGlobal, ScrambledSplitSequencesRecoverSections) {
  std::mt19937 rng(17);
  for (int t = 0; t < 40; ++t) {
    auto s = lg::scrambled_split(rng);
    auto survey = local_split_survey(s);
    EXPECT_TRUE(survey.certificate.primes.empty()) << t;
    EXPECT_TRUE(local_split_survey(s, V({3, 5, 7})).all_split()) << t;
    auto g = global_split_conclude(s, survey);
    EXPECT_TRUE(verify_map(g.section));
  }
}

TEST(LocalGlobal, NonsplitFamilyFlagsExactlyItsPrime) {
  std::mt19937 rng(3);
  for (auto& c : lg::nonsplit_family(rng)) {
    auto survey = local_split_survey(c.s, V({3, 5, 7, 11}));
    for (const auto& v : survey.table) EXPECT_EQ(v.split, v.ell != c.ell) << c.ell << " at " << v.ell;
    EXPECT_EQ(class_support(c.s.seq).primes, V({c.ell}));
  }
}

TEST(LocalGlobal, CertificateContainsEveryBoundedFinding) {
  std::mt19937 rng(8);
  std::vector<LambdaSES> seqs;
  for (auto& c : lg::nonsplit_family(rng)) seqs.push_back(c.s);
  for (int t = 0; t < 10; ++t) seqs.push_back(lg::scrambled_split(rng));
  for (auto& s : seqs) {
    auto cert = class_support(s.seq);
    ASSERT_TRUE(cert.complete);
    auto small = bounded_nonsplit_search(s, 13), large = bounded_nonsplit_search(s, 31);
    for (auto ell : large) EXPECT_TRUE(std::find(cert.primes.begin(), cert.primes.end(), ell) != cert.primes.end());
    for (auto ell : small) EXPECT_TRUE(std::find(large.begin(), large.end(), ell) != large.end());
  }
}

TEST(LocalGlobal, ZeroExamples) {
  auto A = corpus_ring();
  auto L = free_module(A, 1);
  auto z = zero_local_global(zero_map(L, L));
  EXPECT_TRUE(z.direct_zero);
  EXPECT_TRUE(z.all_local_zero);
  EXPECT_TRUE(z.agree);

  // multiplication by q-1 on Λ/(q-1)^2 = Λ
  auto t = amat(A, 1, 1);
  t(0, 0) = lam(A, 0, 1);
  auto r = zero_local_global(make_map(L, L, t));
  EXPECT_FALSE(r.direct_zero);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->ell, 3);
  EXPECT_FALSE(r.all_local_zero);
  EXPECT_FALSE(r.certificate.complete);

  auto two = amat(A, 1, 1);
  two(0, 0) = A.from_int(2);
  auto u = zero_local_global(make_map(L, L, two));
  EXPECT_FALSE(u.direct_zero);
  for (const auto& loc : u.local) EXPECT_FALSE(loc.zero);

  // 3 on Λ/9 is nonzero only at 3
  auto M9 = lg::cyclic_lambda(A, A.from_int(9));
  auto three = amat(A, 1, 1);
  three(0, 0) = A.from_int(3);
  auto w = zero_local_global(make_map(M9, M9, three));
  EXPECT_EQ(w.certificate.primes, V({3}));
  EXPECT_EQ(w.witness->ell, 3);
}

TEST(LocalGlobal, ZeroDetectionAgreesOnFuzzedMaps) {
  std::mt19937 rng(123);
  int zeros = 0;
  for (int t = 0; t < 120; ++t) {
    auto f = lg::random_lambda_map(rng);
    auto r = zero_local_global(f);
    EXPECT_TRUE(r.agree);
    zeros += r.direct_zero;
    for (const auto& loc : r.local)
      if (r.witness && loc.ell == r.witness->ell) {
        EXPECT_FALSE(loc.zero);
      }
  }
  EXPECT_GT(zeros, 5);
  EXPECT_LT(zeros, 115);
}
