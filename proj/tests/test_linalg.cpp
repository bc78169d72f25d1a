#include <gtest/gtest.h>

#include <random>

#include "degen/core/linalg.hpp"

using namespace degen;

namespace {

template <class R, class Gen>
Mat<typename R::elem> random_mat(const R& ring, std::size_t m, std::size_t n, Gen&& gen) {
  auto A = la::zeros(ring, m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = gen();
  return A;
}

template <class R>
void check_smith(const R& ring, const Mat<typename R::elem>& A) {
  auto s = la::smith(ring, A);
  EXPECT_TRUE(la::mul(ring, la::mul(ring, s.U, A), s.V) == s.D);
  EXPECT_TRUE(la::mul(ring, s.U, s.Uinv) == la::identity(ring, A.rows()));
  EXPECT_TRUE(la::mul(ring, s.V, s.Vinv) == la::identity(ring, A.cols()));
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (i != j) {
        EXPECT_TRUE(ring.is_zero(s.D(i, j)));
      }
  for (std::size_t t = 0; t + 1 < s.divisors.size(); ++t)
    EXPECT_TRUE(ring.divides(s.divisors[t], s.divisors[t + 1]));
  for (const auto& d : s.divisors) EXPECT_TRUE(ring.eq(ring.associate(d).first, d));

  // kernel rows annihilate A, and solve_left reproduces random combinations
  auto K = la::left_kernel(ring, A);
  EXPECT_TRUE(la::is_zero_mat(ring, la::mul(ring, K, A)));
  if (A.rows() > 0) {
    auto x = la::zero_vec(ring, A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) x[i] = ring.from_int(static_cast<std::int64_t>(i) + 2);
    auto b = la::vec_mul(ring, x, A);
    auto y = la::solve_left(ring, A, b);
    ASSERT_TRUE(y.has_value());
    EXPECT_TRUE(la::vec_mul(ring, *y, A) == b);
  }
}

}  // namespace

TEST(Smith, ExamplesOverZpN) {
  ZpN R(2, 6);
  Mat<std::int64_t> A(2, 2, 0);
  A(0, 0) = 2; A(0, 1) = 4; A(1, 0) = 6; A(1, 1) = 8;
  auto s = la::smith(R, A);
  EXPECT_EQ(s.divisors, (std::vector<std::int64_t>{2, 4}));
  check_smith(R, A);

  ZpN R5(3, 5);
  Mat<std::int64_t> B(2, 2, 0);
  B(0, 0) = 3; B(1, 1) = 9;
  EXPECT_EQ(la::smith(R5, B).divisors, (std::vector<std::int64_t>{3, 9}));
  EXPECT_EQ(la::smith(R5, la::identity(R5, 2)).divisors, (std::vector<std::int64_t>{1, 1}));
}

TEST(Smith, RandomZpN) {
  std::mt19937 rng(1);
  for (auto [p, N] : {std::pair{2, 5}, {3, 3}, {5, 2}}) {
    ZpN R(p, N);
    std::uniform_int_distribution<std::int64_t> d(0, R.modulus() - 1);
    std::uniform_int_distribution<int> sz(0, 5), vp(0, N);
    for (int t = 0; t < 80; ++t) {
      auto A = random_mat(R, static_cast<std::size_t>(sz(rng)), static_cast<std::size_t>(sz(rng)),
                          [&] { return R.mul(d(rng), ipow(p, vp(rng)) % R.modulus()); });
      check_smith(R, A);
    }
  }
}

TEST(Smith, RandomFpSeries) {
  std::mt19937 rng(2);
  FpSeries R(3, 5);
  std::uniform_int_distribution<std::int64_t> d(0, 2);
  std::uniform_int_distribution<int> sz(0, 4), sh(0, 5);
  for (int t = 0; t < 80; ++t) {
    auto A = random_mat(R, static_cast<std::size_t>(sz(rng)), static_cast<std::size_t>(sz(rng)), [&] {
      auto e = R.zero();
      for (auto& c : e) c = d(rng);
      return R.shift_up(e, sh(rng));
    });
    check_smith(R, A);
  }
}

TEST(Smith, RandomLocZ) {
  std::mt19937 rng(3);
  LocZ R({2});
  std::uniform_int_distribution<int> d(-30, 30), sz(0, 4);
  for (int t = 0; t < 80; ++t) {
    auto A = random_mat(R, static_cast<std::size_t>(sz(rng)), static_cast<std::size_t>(sz(rng)),
                        [&] { return BigRat(d(rng), (t % 3 == 0) ? 2 : 1); });
    check_smith(R, A);
  }
  Mat<BigRat> F(1, 1, BigRat(60));
  EXPECT_EQ(la::smith(R, F).divisors[0], BigRat(15));
}

TEST(Smith, SolveDetectsInconsistency) {
  ZpN R(3, 4);
  Mat<std::int64_t> A(1, 1, 9);
  EXPECT_FALSE(la::solve_left(R, A, {3}).has_value());
  EXPECT_TRUE(la::solve_left(R, A, {18}).has_value());
  // lifted semantics: a nonzero scalar has no annihilator
  EXPECT_EQ(la::left_kernel(R, A).rows(), 0u);
  Mat<std::int64_t> Z(1, 1, 0);
  EXPECT_EQ(la::left_kernel(R, Z).rows(), 1u);
}

TEST(Smith, Inverse) {
  ZpN R(5, 3);
  Mat<std::int64_t> A(2, 2, 0);
  A(0, 0) = 2; A(0, 1) = 5; A(1, 0) = 1; A(1, 1) = 3;
  auto inv = la::inverse(R, A);
  ASSERT_TRUE(inv.has_value());
  EXPECT_TRUE(la::mul(R, A, *inv) == la::identity(R, 2));
  A(1, 1) = 5;
  A(1, 0) = 5;
  EXPECT_FALSE(la::inverse(R, A).has_value());
}
